"""Synthetic populations: label functions, benign noise, and random generators."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fourier import FourierSpectrum, wht_bruteforce
from .oracle import cube_points

# ------------------------------------------------------------------ noise


class NoiseModel:
    """Label noise symmetric about zero with a declared variance proxy."""

    proxy = 0.0

    def sample(self, m, rng):
        return np.zeros(m)

    def tail_threshold(self, eps):
        """``sigma sqrt(2 ln(2/eps))``: the subgaussian tail radius at mass ``eps``."""
        return math.sqrt(self.proxy) * math.sqrt(2 * math.log(2 / eps))


class NoNoise(NoiseModel):
    def __repr__(self):
        return "NoNoise()"


@dataclass(frozen=True)
class BoundedUniform(NoiseModel):
    a: float

    @property
    def proxy(self):
        return self.a**2

    def sample(self, m, rng):
        return rng.uniform(-self.a, self.a, size=m)


@dataclass(frozen=True)
class ScaledRademacher(NoiseModel):
    a: float

    @property
    def proxy(self):
        return self.a**2

    def sample(self, m, rng):
        return self.a * (2.0 * rng.integers(0, 2, size=m) - 1.0)


@dataclass(frozen=True)
class TruncatedGaussian(NoiseModel):
    sigma: float
    cut: float

    @property
    def proxy(self):
        # symmetric truncation of N(0, sigma^2) stays SubG(sigma^2), and is bounded by cut
        return min(self.sigma**2, self.cut**2)

    def sample(self, m, rng):
        out = rng.normal(0.0, self.sigma, size=m)
        bad = np.abs(out) > self.cut
        while bad.any():
            out[bad] = rng.normal(0.0, self.sigma, size=int(bad.sum()))
            bad = np.abs(out) > self.cut
        return out


def uniform_noise_for_proxy(sigma):
    """Uniform noise on ``[-sigma sqrt 3, sigma sqrt 3]``: variance ``sigma^2``."""
    return BoundedUniform(sigma * math.sqrt(3))


# ------------------------------------------------------------------ label models


@dataclass(frozen=True)
class AffineModel:
    w: np.ndarray
    intercept: float = 0.0

    def evaluate(self, X):
        return np.atleast_2d(X) @ np.asarray(self.w, dtype=np.float64) + self.intercept

    __call__ = evaluate


class PolynomialModel:
    """``sum_k coeffs[k] * prod_i x_i ** exponents[k, i]``."""

    def __init__(self, exponents, coeffs):
        self.exponents = np.atleast_2d(np.asarray(exponents, dtype=np.int64))
        self.coeffs = np.asarray(coeffs, dtype=np.float64)
        self.degree = int(self.exponents.sum(axis=1).max()) if len(self.coeffs) else 0

    def evaluate(self, X):
        X = np.atleast_2d(X)
        terms = np.prod(X[:, None, :] ** self.exponents[None, :, :], axis=2)
        return terms @ self.coeffs

    __call__ = evaluate


def monomial_exponents(n, d):
    """Exponent vectors of every monomial in ``n`` variables of total degree <= d."""
    rows = []
    for k in range(d + 1):
        for combo in itertools.combinations_with_replacement(range(n), k):
            e = np.zeros(n, dtype=np.int64)
            for i in combo:
                e[i] += 1
            rows.append(e)
    return np.array(rows)


def random_polynomial(n, d, rng, scale=1.0):
    exps = monomial_exponents(n, d)
    coeffs = rng.normal(0.0, scale, size=len(exps)) / math.sqrt(len(exps))
    return PolynomialModel(exps, coeffs)


class FourierHeavyModel:
    def __init__(self, spectrum):
        self.spectrum = spectrum

    def evaluate(self, X):
        return self.spectrum.evaluate(X)

    __call__ = evaluate


class LabeledPopulation:
    """``x`` uniform on ``domain``, ``y = h(x) + eta``; callable as a sampler."""

    def __init__(self, model, domain, noise=None):
        self.model = model
        self.domain = domain
        self.noise = noise if noise is not None else NoNoise()

    def sample(self, m, rng):
        X = self.domain.sample_uniform(m, rng)
        y = self.model.evaluate(X) + self.noise.sample(m, rng)
        return X, y

    __call__ = sample


def sample_labeled(model, domain, m, rng, noise=None):
    return LabeledPopulation(model, domain, noise).sample(m, rng)


# ------------------------------------------------------------------ generators


def make_tau_heavy(n, t, tau, rng, max_retries=100):
    """A random Fourier spectrum with at most ``t`` terms, every coefficient of
    magnitude ``>= tau``, and sup norm ``<= 1`` on the cube.

    Coefficients start with magnitudes in ``[tau, max(tau, 1/t)]``; if the exact
    sup norm exceeds 1 the spectrum is rescaled, and when that pushes a term
    below ``tau`` the draw is repeated with one term fewer.
    """
    if t < 1 or t * tau**2 > 1:
        raise ConfigError(f"t * tau^2 <= 1 violated (t={t}, tau={tau})")
    if t > 2**n:
        raise ConfigError(f"cannot pick {t} distinct subsets of [{n}]")
    terms = t
    for _ in range(max_retries):
        masks = set()
        while len(masks) < terms:
            masks.add(int(rng.integers(0, 1 << n, dtype=np.uint64)))
        masks = sorted(masks)
        hi = max(tau, 1.0 / terms)
        mags = rng.uniform(tau, hi, size=terms)
        signs = rng.choice([-1.0, 1.0], size=terms)
        spec = FourierSpectrum(n, dict(zip(masks, (signs * mags).tolist())))
        sup = spec.sup_norm()
        if sup > 1.0:
            spec = FourierSpectrum(n, {S: c / sup for S, c in spec.coeffs.items()})
        if min(abs(c) for c in spec.coeffs.values()) >= tau:
            return spec
        terms = max(1, terms - 1)
    raise ConfigError(f"could not build a {tau}-heavy spectrum with <= {t} terms")


def random_decision_tree(n, depth, rng):
    """Random complete tree: internal nodes ``(var, low, high)``, leaves +-1.

    ``low`` is followed when ``x_var = +1``.  Variables do not repeat on a path.
    """
    if depth > n:
        raise ConfigError(f"depth {depth} exceeds n={n}")

    def grow(level, used):
        if level == depth:
            return float(rng.choice([-1.0, 1.0]))
        var = int(rng.choice([i for i in range(n) if i not in used]))
        return (var, grow(level + 1, used | {var}), grow(level + 1, used | {var}))

    return grow(0, frozenset())


def evaluate_tree(tree, X):
    X = np.atleast_2d(X)
    if not isinstance(tree, tuple):
        return np.full(X.shape[0], tree)
    var, low, high = tree
    return np.where(X[:, var] > 0, evaluate_tree(low, X), evaluate_tree(high, X))


def tree_spectrum_by_paths(tree, n):
    """Exact spectrum via ``1[x_i = s_i for i on path] = prod (1 + s_i x_i) / 2``."""
    coeffs = {}

    def walk(node, path):
        if not isinstance(node, tuple):
            k = len(path)
            for r in range(k + 1):
                for sub in itertools.combinations(path, r):
                    mask = 0
                    sign = 1.0
                    for var, s in sub:
                        mask |= 1 << var
                        sign *= s
                    coeffs[mask] = coeffs.get(mask, 0.0) + node * sign / 2**k
            return
        var, low, high = node
        walk(low, path + ((var, 1.0),))
        walk(high, path + ((var, -1.0),))

    walk(tree, ())
    return FourierSpectrum(n, {S: c for S, c in coeffs.items() if abs(c) > 1e-15})


def make_shallow_tree(n, depth, rng):
    """Spectrum of a random depth-``depth`` decision tree with +-1 leaves."""
    if depth > 12:
        raise ConfigError(f"depth <= 12 required, got {depth}")
    tree = random_decision_tree(n, depth, rng)
    if n <= 12:
        return wht_bruteforce(evaluate_tree(tree, cube_points(n)))
    return tree_spectrum_by_paths(tree, n)
