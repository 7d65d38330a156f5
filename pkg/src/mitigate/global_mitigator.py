"""Global mitigation for populations whose best predictor is Fourier-heavy.

The mitigator runs the heavy-coefficient search on the (possibly corrupted)
oracle, then re-estimates each recovered coefficient from fresh labeled
samples.  Because the recovered set is, with high probability, the same fixed
set for every admissible oracle, the output law barely depends on which
admissible oracle was supplied.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ConfigError, DimensionError, ShapeError
from .fourier import FourierSpectrum, GLConfig, MAX_WHT_DIM, goldreich_levin
from .oracle import FunctionOracle, pack_bits, unpack_bits


def sample_budget(params):
    """Labeled samples used to re-estimate the recovered coefficients.

    ``ceil(8 (s + ln(8 / tau^2)) / (tau^2 (eps1 - eps0)))``: Hoeffding for the
    range-2 summands ``chi_S(x) y`` plus a union bound over at most ``4 / tau^2``
    coefficients, each allowed failure mass ``e^-s tau^2 / 4``.
    """
    if not params.eps1 > params.eps0:
        raise ConfigError(f"eps1 > eps0 violated (eps1={params.eps1}, eps0={params.eps0})")
    tau = params.tau
    return math.ceil(8 * (params.s + math.log(8 / tau**2)) / (tau**2 * (params.eps1 - params.eps0)))


def gl_config_for(params, **overrides):
    """Search settings giving ``f^{>=2tau/3} <= S <= f^{>=tau/2}``.

    The search keeps leaves at ``7 tau' / 8`` with accuracy ``tau' / 8``; with
    ``tau' = 2 tau / 3`` that is a ``7 tau / 12`` cut with ``tau / 12`` accuracy.
    """
    kw = dict(tau=2 * params.tau / 3, fail_prob=math.exp(-params.s))
    kw.update(overrides)
    return GLConfig(**kw)


@dataclass
class GlobalMitigationOutput:
    recovered_set: frozenset
    estimates: dict
    g: FourierSpectrum
    samples_used: int
    queries_used: int


def fourier_heavy_mitigate(f, sampler, params, rng, gl_config=None):
    """Mitigate ``f`` against a population with uniform marginal on the cube.

    ``sampler(m, rng)`` returns ``(X, y)`` with ``X`` in {-1, +1}^(m x n).
    """
    params.check_global()
    if f.n != params.n:
        raise DimensionError(f"oracle has n={f.n}, params say n={params.n}")
    cfg = gl_config if gl_config is not None else gl_config_for(params)
    q0 = f.query_count
    recovered = goldreich_levin(f, cfg, rng)
    queries = f.query_count - q0

    m = sample_budget(params)
    X, y = sampler(m, rng)
    y = np.asarray(y, dtype=np.float64)
    if X.shape != (m, params.n) or y.shape != (m,):
        raise ShapeError(f"sampler returned shapes {X.shape}, {y.shape}; expected ({m}, {params.n}), ({m},)")
    masks = np.array(sorted(recovered), dtype=np.uint64)
    est = _kernels.character_means(pack_bits(X), y, masks) if masks.size else np.zeros(0)
    estimates = {int(S): float(c) for S, c in zip(masks, est)}
    return GlobalMitigationOutput(recovered, estimates, FourierSpectrum(params.n, estimates), m, queries)


def binary_heavy_mitigate(f, sampler, params, rng):
    """The sign-composed variant for +-1 labels.

    Zero-one loss of +-1 functions is a quarter of their square loss, so the
    real-valued mitigator is run with ``4 eps0`` and its output passed through
    sign.  Requires ``eps0 <= (tau/12)^2`` and ``eps1 > 4 eps0``.
    """
    bound = (params.tau / 12) ** 2
    if params.eps0 > bound:
        raise ConfigError(f"eps0 <= (tau/12)^2 violated: eps0={params.eps0} > {bound:.6g}")
    if not params.eps1 > 4 * params.eps0:
        raise ConfigError(f"eps1 > 4 eps0 violated (eps1={params.eps1}, eps0={params.eps0})")
    out = fourier_heavy_mitigate(f, sampler, replace(params, eps0=4 * params.eps0), rng)
    return out, sign_compose(out.g)


def sign_compose(g):
    """``x -> sign(g(x))`` with ``sign(0) = +1``."""

    def bits_rule(bits):
        return np.where(g.evaluate_bits(bits) >= 0, 1.0, -1.0)

    def rule(X):
        return bits_rule(pack_bits(X))

    return FunctionOracle(rule, g.n, bits_rule=bits_rule, name="sign(g)")


# ------------------------------------------------------------------ exact losses


@dataclass
class LabelTable:
    """Per-point label distributions on the cube.

    Row ``k`` of ``values`` / ``probs`` describes the labels at the point with
    packed bits ``k``; each row of ``probs`` sums to one.  The marginal on ``x``
    is uniform unless ``weights`` is given.
    """

    values: np.ndarray
    probs: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        self.probs = np.atleast_2d(np.asarray(self.probs, dtype=np.float64))
        if self.values.shape != self.probs.shape:
            raise ShapeError("values and probs must have the same shape")
        size = self.values.shape[0]
        if size < 2 or size & (size - 1):
            raise ShapeError(f"table has {size} rows, not a power of two")
        if not np.allclose(self.probs.sum(axis=1), 1.0, atol=1e-12) or np.any(self.probs < 0):
            raise ConfigError("each row of probs must be a probability vector")
        if self.weights is None:
            self.weights = np.full(size, 1.0 / size)
        else:
            self.weights = np.asarray(self.weights, dtype=np.float64)

    @property
    def n(self):
        return self.values.shape[0].bit_length() - 1

    @classmethod
    def deterministic(cls, labels):
        labels = np.asarray(labels, dtype=np.float64)
        return cls(labels[:, None], np.ones((labels.size, 1)))

    def conditional_mean(self):
        return (self.values * self.probs).sum(axis=1)

    def conditional_variance(self):
        mu = self.conditional_mean()
        return (self.probs * (self.values - mu[:, None]) ** 2).sum(axis=1)

    def sampler(self):
        """A labeled-example source drawing from this table."""
        cdf = np.cumsum(self.probs, axis=1)
        n = self.n

        def sample(m, rng):
            k = rng.choice(self.values.shape[0], size=m, p=self.weights)
            u = rng.random(m)
            j = np.minimum((u[:, None] > cdf[k]).sum(axis=1), self.values.shape[1] - 1)
            return unpack_bits(k.astype(np.uint64), n), self.values[k, j]

        return sample


@dataclass(frozen=True)
class LossDecompositionReport:
    total_square_loss: float
    fit_term: float
    variance_term: float


def _table_of(r, n):
    if isinstance(r, FourierSpectrum):
        if r.n != n:
            raise DimensionError(f"spectrum has n={r.n}, table has n={n}")
        return r.truth_table()
    return np.asarray(r.evaluate_bits(np.arange(2**n, dtype=np.uint64)), dtype=np.float64)


def loss_decomposition_bruteforce(r, table):
    """Both sides of ``E (r - y)^2 = E (r - E[y|x])^2 + E Var[y|x]`` by enumeration."""
    if table.n > 12:
        raise ConfigError(f"n <= 12 required for exhaustive decomposition, got {table.n}")
    rv = _table_of(r, table.n)
    w = table.weights
    total = float(np.sum(w * np.sum(table.probs * (rv[:, None] - table.values) ** 2, axis=1)))
    fit = float(np.sum(w * (rv - table.conditional_mean()) ** 2))
    var = float(np.sum(w * table.conditional_variance()))
    return LossDecompositionReport(total, fit, var)


def exact_square_loss(r, table):
    return loss_decomposition_bruteforce(r, table).total_square_loss


def exact_zero_one_loss(r, table):
    if table.n > MAX_WHT_DIM:
        raise ConfigError("table too large")
    rv = _table_of(r, table.n)
    miss = (rv[:, None] != table.values).astype(np.float64)
    return float(np.sum(table.weights * np.sum(table.probs * miss, axis=1)))
