"""Corrupted oracles for exercising the mitigators.

Every constructor returns a :class:`FunctionOracle` that is deterministic given
its arguments and carries a :class:`Certificate`: the loss of the corrupted
oracle against the nominal predictor ``h``, computed exactly where a closed
form or full enumeration is available and by Monte Carlo otherwise.  A finite
library like this one can only exhibit admissible attacks, not exhaust them.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, InadmissibleAttack
from .fourier import FourierSpectrum
from .geometry import UnitBall
from .oracle import FunctionOracle, Hypercube, LossKind, cube_points, pack_bits, unpack_bits
from .streams import substream

CERT_DRAWS = 100_000
EXACT_CUBE_DIM = 16
QUANTUM = 1e-12


@dataclass(frozen=True)
class Certificate:
    """Loss of an attack oracle against the nominal predictor."""

    loss: str
    threshold: float
    value: float
    stderr: float
    method: str
    draws: int = 0
    closed_form: float = None

    def admissible(self, bound):
        return self.value <= bound

    def upper(self, z=3.0):
        return self.value + z * self.stderr


def _rules(h, n):
    """``(rule, bits_rule)`` for a predictor given as an oracle, spectrum or callable."""
    if isinstance(h, FunctionOracle):
        return h.rule, h.bits_rule
    rule = getattr(h, "evaluate", h)
    return rule, getattr(h, "evaluate_bits", None)


def certify(f, h, domain, kind, rng=None, draws=CERT_DRAWS):
    """Loss of ``f`` against labels ``h(x)`` under the uniform law on ``domain``.

    Small hypercubes are enumerated; everything else uses ``draws`` Monte Carlo
    points.  ``f`` is evaluated on a fresh copy so its query counter is untouched.
    """
    probe = f.fresh() if isinstance(f, FunctionOracle) else f
    h_rule, _ = _rules(h, domain.n)
    if isinstance(domain, Hypercube) and domain.n <= EXACT_CUBE_DIM:
        X = cube_points(domain.n)
        loss = kind.pointwise(probe.evaluate(X), h_rule(X))
        return Certificate(kind.kind, kind.delta, float(loss.mean()), 0.0, "exact", X.shape[0])
    if rng is None:
        rng = substream(0, 0xCE27)
    X = domain.sample_uniform(draws, rng)
    loss = kind.pointwise(probe.evaluate(X), h_rule(X))
    return Certificate(kind.kind, kind.delta, float(loss.mean()), float(loss.std() / math.sqrt(draws)), "monte_carlo", draws)


# ------------------------------------------------------------------ attacks


def missing_coefficient_attack(h, S):
    """``h`` with the coefficient at ``S`` deleted; its square loss is ``h^(S)^2``."""
    if not isinstance(h, FourierSpectrum):
        raise ConfigError("missing_coefficient_attack needs a FourierSpectrum")
    S = int(S)
    if S not in h.coeffs:
        raise ConfigError(f"character {S:#x} is not in the support of h")
    g = h.without(S)
    f = g.as_oracle(name=f"missing[{S:x}]")
    f.certificate = Certificate("square", 0.0, h[S] ** 2, 0.0, "closed_form", closed_form=h[S] ** 2)
    return f


def spectral_perturbation_attack(h, extra, clip=True):
    """``clip(h + sum_T extra[T] chi_T, -1, 1)`` with an exact square-loss certificate."""
    coeffs = dict(h.coeffs)
    for T, c in extra.items():
        coeffs[int(T)] = coeffs.get(int(T), 0.0) + float(c)
    g = FourierSpectrum(h.n, coeffs)

    def bits_rule(bits):
        v = g.evaluate_bits(bits)
        return np.clip(v, -1.0, 1.0) if clip else v

    f = FunctionOracle(lambda X: bits_rule(pack_bits(X)), h.n, bits_rule=bits_rule, name="spectral")
    if h.n <= EXACT_CUBE_DIM:
        f.certificate = certify(f, h, Hypercube(h.n), LossKind("square"))
    else:
        bound = sum(c * c for c in extra.values())
        f.certificate = Certificate("square", 0.0, bound, 0.0, "closed_form", closed_form=bound)
    return f


def ball_mass(body, center, radius):
    """Closed-form uniform mass of ``B(center, radius)`` when it lies inside a unit ball body."""
    if isinstance(body, UnitBall) and np.linalg.norm(center) + radius <= 1.0:
        return float(radius**body.n)
    return None


def targeted_ball_attack(h, center, radius, payload, body, eps, rng=None, draws=CERT_DRAWS):
    """``h + payload`` inside ``B(center, radius)``, ``h`` elsewhere.

    The certificate is the corrupted mass: closed form when available, and
    always checked against a Monte Carlo estimate.  Raises
    :class:`InadmissibleAttack` when the mass exceeds ``eps``.
    """
    center = np.asarray(center, dtype=np.float64)
    radius = float(radius)
    h_rule, _ = _rules(h, body.n)

    def inside(X):
        return np.linalg.norm(X - center, axis=1) < radius

    def rule(X):
        return h_rule(X) + payload * inside(X)

    if rng is None:
        rng = substream(0, 0xBA11)
    X = body.sample_uniform(draws, rng)
    hits = inside(X)
    mc = float(hits.mean())
    se = float(math.sqrt(max(mc * (1 - mc), 1.0 / draws) / draws))
    closed = ball_mass(body, center, radius)
    if closed is not None:
        cert = Certificate("mass", radius, closed, 0.0, "closed_form", draws, closed)
    else:
        cert = Certificate("mass", radius, mc, se, "monte_carlo", draws)
    if cert.value > eps:
        raise InadmissibleAttack(f"corrupted mass {cert.value:.3g} exceeds eps={eps}")
    return FunctionOracle(rule, body.n, name="targeted_ball", certificate=cert)


def linear_bias_attack(h, anchor, c, body=None, threshold=None, rng=None, draws=CERT_DRAWS):
    """``h(x) + c ||x - anchor||``: an error that grows with distance from ``anchor``.

    With ``body`` and ``threshold`` given, the certificate is the mass where the
    error exceeds ``threshold``, i.e. outside ``B(anchor, threshold / c)``.
    """
    anchor = np.asarray(anchor, dtype=np.float64)
    h_rule, _ = _rules(h, anchor.size)

    def rule(X):
        return h_rule(X) + c * np.linalg.norm(X - anchor, axis=1)

    cert = None
    if body is not None and threshold is not None:
        if c == 0:
            cert = Certificate("cutoff", threshold, 0.0, 0.0, "closed_form", closed_form=0.0)
        else:
            rho = threshold / abs(c)
            if rng is None:
                rng = substream(0, 0xB1A5)
            X = body.sample_uniform(draws, rng)
            out = np.linalg.norm(X - anchor, axis=1) > rho
            mc = float(out.mean())
            inner = ball_mass(body, anchor, rho)
            closed = None if inner is None else 1.0 - inner
            cert = Certificate(
                "cutoff", threshold, mc, float(math.sqrt(mc * (1 - mc) / draws)), "monte_carlo", draws, closed
            )
    return FunctionOracle(rule, anchor.size, name="linear_bias", certificate=cert)


def hash_uniforms(X, seed, domain=None):
    """Deterministic pseudo-uniforms in [0, 1) keyed on each point.

    Cube points are keyed on their packed bits; continuous points on their
    coordinates quantized at ``1e-12``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if isinstance(domain, Hypercube):
        keys = pack_bits(X)[:, None]
    else:
        keys = np.round(X / QUANTUM).astype(np.int64).view(np.uint64)
    return _kernels.hash_rows(keys, seed)


def eps_mass_random_attack(h, eps, payload, seed, domain, certify_kind=None, rng=None):
    """``payload`` on a pseudo-random ``eps``-mass set, ``h`` elsewhere.

    ``payload`` may be a number (added to ``h``), the string ``"flip"``
    (replaces ``h`` by ``-h``), or a callable ``X -> values`` used as is.
    """
    if not 0 <= eps <= 1:
        raise ConfigError(f"0 <= eps <= 1 violated (eps={eps})")
    n = domain.n
    h_rule, h_bits = _rules(h, n)

    def corrupt(base, X):
        if callable(payload):
            return np.asarray(payload(X), dtype=np.float64)
        if payload == "flip":
            return -base
        return base + float(payload)

    def rule(X):
        X = np.atleast_2d(X)
        base = np.asarray(h_rule(X), dtype=np.float64)
        hit = hash_uniforms(X, seed, domain) < eps
        out = base.copy()
        if hit.any():
            out[hit] = corrupt(base[hit], X[hit])
        return out

    bits_rule = None
    if isinstance(domain, Hypercube):

        def bits_rule(bits):
            base = np.asarray(h_bits(bits) if h_bits else h_rule(unpack_bits(bits, n)), dtype=np.float64)
            hit = _kernels.hash_rows(np.asarray(bits, dtype=np.uint64)[:, None], seed) < eps
            out = base.copy()
            if hit.any():
                out[hit] = corrupt(base[hit], unpack_bits(bits[hit], n))
            return out

    f = FunctionOracle(rule, n, bits_rule=bits_rule, name=f"eps_mass[{eps:g}]")
    if certify_kind is not None:
        f.certificate = certify(f, h, domain, certify_kind, rng)
    return f


# ------------------------------------------------------------------ lower bound


class FlatBump:
    """``(1 - ||x||^2)^(d/2)``: equals 1 at the origin and is tiny on most of the ball."""

    def __init__(self, n, d):
        self.n = n
        self.d = d

    def evaluate(self, X):
        X = np.atleast_2d(X)
        return np.clip(1.0 - np.einsum("ij,ij->i", X, X), 0.0, None) ** (self.d // 2)

    __call__ = evaluate


class Zero:
    def __init__(self, n):
        self.n = n

    def evaluate(self, X):
        return np.zeros(np.atleast_2d(X).shape[0])

    __call__ = evaluate


def flat_bump_polynomials(n, d):
    """The pair ``(0, (1 - ||x||^2)^(d/2))`` of degree-``d`` polynomials.

    They differ by 1 at the origin but by less than ``n^(-d/4)`` except on a set
    of mass at most ``exp(-sqrt(n)/2)``, so a mitigator that tolerates that
    much per-point error cannot tell them apart at the origin.
    """
    if d < 2 or d % 2:
        raise ConfigError(f"d must be even and >= 2, got {d}")
    return Zero(n), FlatBump(n, d)


def _mask(key):
    return int(key, 0) if isinstance(key, str) else int(key)


def attack_from_config(spec, h, domain, rng=None):
    """Build an attack from a config mapping with a ``kind`` key."""
    kind = spec.get("kind", "none")
    if kind == "none":
        rule, bits = _rules(h, domain.n)
        return FunctionOracle(rule, domain.n, bits_rule=bits, name="clean")
    if kind == "missing_coefficient":
        return missing_coefficient_attack(h, _mask(spec["character"]))
    if kind == "spectral":
        return spectral_perturbation_attack(h, {_mask(k): v for k, v in spec["extra"].items()}, spec.get("clip", True))
    if kind == "targeted_ball":
        return targeted_ball_attack(
            h, spec["center"], spec["radius"], spec["payload"], domain, spec.get("eps", 1.0), rng
        )
    if kind == "linear_bias":
        return linear_bias_attack(h, spec["anchor"], spec["c"], domain, spec.get("threshold"), rng)
    if kind == "eps_mass":
        ck = spec.get("certify")
        return eps_mass_random_attack(
            h, spec["eps"], spec["payload"], int(spec["seed"]), domain,
            LossKind(ck["kind"], ck.get("delta", 0.0)) if ck else None, rng,
        )
    raise ConfigError(f"unknown attack kind {kind!r}")
