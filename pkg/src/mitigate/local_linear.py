"""Local mitigators for affine labels.

Both estimators evaluate the oracle at two random points collinear with the
probe ``x_star`` and extrapolate the line through them back to ``x_star``.  The
basic one takes a median of these extrapolations; the advanced one also uses
labeled samples to subtract an independent estimate of each trial's bias, which
removes systematic error that grows with the distance from ``x_star``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsufficientAcceptance, NumericalError
from .geometry import correlated_pairs, pairs_from_anchors
from .robust import mean_of_medians, median


def lambda_bound(n):
    """Trials are accepted only if their extrapolation weights are at most ``4 n``."""
    return 4 * n


@dataclass(frozen=True)
class BasicLinearConfig:
    s: int
    delta: float = 1.0
    eps: float = 0.01

    def __post_init__(self):
        if self.s < 1:
            raise ConfigError(f"s >= 1 violated (s={self.s})")
        if not 0 <= self.eps <= 0.01:
            raise ConfigError(f"eps <= 1/100 violated (eps={self.eps})")
        if not self.delta > 0:
            raise ConfigError(f"delta > 0 violated (delta={self.delta})")

    @property
    def m(self):
        return 320 * self.s

    def tolerated_error(self, n):
        """Corruptions smaller than this in magnitude do not count as errors."""
        return self.delta / (20 * n)


@dataclass(frozen=True)
class AdvancedLinearConfig:
    s: int
    sigma: float = 0.0
    delta: float = 1.0
    eps: float = 0.01

    def __post_init__(self):
        if self.s < 2:
            raise ConfigError(f"s >= 2 violated (s={self.s})")
        if self.sigma < 0:
            raise ConfigError(f"sigma >= 0 violated (sigma={self.sigma})")
        if not self.delta > 0:
            raise ConfigError(f"delta > 0 violated (delta={self.delta})")
        if not 0 < self.eps < 1:
            raise ConfigError(f"0 < eps < 1 violated (eps={self.eps})")

    def noise_limit(self, n):
        return (self.delta / n) / math.sqrt(2 * math.log(2 / self.eps))

    def check_noise(self, n):
        """Raise unless the noise proxy is small enough for the accuracy guarantee."""
        lim = self.noise_limit(n)
        if self.sigma > lim:
            raise ConfigError(f"sigma <= (delta/n) (2 ln(2/eps))^-1/2 violated: {self.sigma} > {lim:.6g}")

    def accuracy(self, n):
        """The guaranteed cutoff radius ``(1/n + ln(s) / s^(1/4)) delta``."""
        return (1.0 / n + math.log(self.s) / self.s**0.25) * self.delta

    @classmethod
    def recommended(cls, n, **kw):
        """``s = ceil(ln(n) sqrt(n))``."""
        return cls(s=max(2, math.ceil(math.log(n) * math.sqrt(n))), **kw)


@dataclass
class LocalEstimate:
    y_star: float
    accepted_count: int
    trials: int
    queries: int
    samples: int = 0
    discarded: int = 0
    diagnostics: dict = field(default=None, repr=False)


def interpolate_pair(y_at_x, f_at_xprime, lam):
    """``(1 - lam) y + lam f(x')``: the line through both values evaluated at ``x_star``."""
    y_at_x = np.asarray(y_at_x, dtype=np.float64)
    f_at_xprime = np.asarray(f_at_xprime, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    if not (np.all(np.isfinite(y_at_x)) and np.all(np.isfinite(f_at_xprime)) and np.all(np.isfinite(lam))):
        raise NumericalError("interpolate_pair got a non-finite input")
    out = (1.0 - lam) * y_at_x + lam * f_at_xprime
    return float(out) if out.ndim == 0 else out


def basic_linear_mitigate(f, body, x_star, cfg, rng, keep_diagnostics=False):
    """Median of two-point extrapolations over ``320 s`` trials; no labeled samples."""
    n = body.n
    pairs = correlated_pairs(x_star, body, cfg.m, rng)
    lam = pairs.lam
    ok = np.abs(lam) <= lambda_bound(n)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        raise InsufficientAcceptance(f"no trial out of {cfg.m} had |lambda| <= {lambda_bound(n)}")
    q0 = f.query_count
    fx = f.evaluate(pairs.x[idx])
    fxp = f.evaluate(pairs.x_prime[idx])
    g = interpolate_pair(fx, fxp, lam[idx])
    diag = dict(g=g, lam=lam[idx], index=idx) if keep_diagnostics else None
    return LocalEstimate(median(g), int(idx.size), cfg.m, f.query_count - q0, 0, 0, diag)


def pair_up(indices):
    """Consecutive pairs ``(i1, i2), (i3, i4), ...``; a trailing index is dropped."""
    k = len(indices) // 2
    a = np.asarray(indices[: 2 * k:2])
    b = np.asarray(indices[1 : 2 * k : 2])
    if np.any(a == b):
        raise AssertionError("a bias term was paired with its own trial")
    return a, b


def advanced_linear_mitigate(f, sampler, body, x_star, cfg, rng, keep_diagnostics=False):
    """Bias-cancelled extrapolation using ``s`` labeled samples and ``<= 2 s`` queries.

    ``sampler(m, rng)`` returns ``(X, y)`` with ``X`` uniform on ``body``.
    """
    n = body.n
    X, y = sampler(cfg.s, rng)
    y = np.asarray(y, dtype=np.float64)
    pairs = pairs_from_anchors(x_star, body, X, rng.random(cfg.s))
    lam, lam_p = pairs.lam, pairs.lam_prime
    bound = lambda_bound(n)
    idx = np.flatnonzero((np.abs(lam) <= bound) & (np.abs(lam_p) <= bound))
    if idx.size < 2:
        raise InsufficientAcceptance(f"{idx.size} of {cfg.s} trials accepted, need at least 2")
    q0 = f.query_count
    fx = f.evaluate(pairs.x[idx])
    fxp = f.evaluate(pairs.x_prime[idx])
    b = (fx - y[idx]) * lam_p[idx]
    g = interpolate_pair(y[idx], fxp, lam[idx])
    first, second = pair_up(np.arange(idx.size))
    diffs = g[second] - b[first]
    report = mean_of_medians(diffs)
    diag = dict(g=g, b=b, lam=lam[idx], diffs=diffs, index=idx) if keep_diagnostics else None
    return LocalEstimate(report.estimate, int(idx.size), cfg.s, f.query_count - q0, cfg.s, 0, diag)
