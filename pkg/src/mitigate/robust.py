"""Mean-of-medians location estimation, the median-of-means baseline, and
randomized rounding of local predictions."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptySample


def median(values):
    """Median; even-length inputs give the midpoint of the two central values."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptySample("median of an empty list")
    return float(np.median(v))


@dataclass(frozen=True)
class RobustMeanReport:
    estimate: float
    batch_size: int
    batch_medians: np.ndarray
    dropped: int


def mean_of_medians(values):
    """Split the first ``b*b`` values (``b = floor(sqrt(len))``) into ``b``
    consecutive batches, take each batch median, and average the medians.

    Batching follows the given order; shuffle upstream if that matters.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptySample("mean_of_medians of an empty list")
    b = math.isqrt(v.size)
    meds = np.median(v[: b * b].reshape(b, b), axis=1)
    return RobustMeanReport(float(np.mean(meds)), b, meds, int(v.size - b * b))


def median_of_means(values, batch_size):
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptySample("median_of_means of an empty list")
    if batch_size < 1 or batch_size > v.size:
        raise ConfigError(f"batch size must lie in [1, {v.size}], got {batch_size}")
    k = v.size // batch_size
    return float(np.median(v[: k * batch_size].reshape(k, batch_size).mean(axis=1)))


@dataclass(frozen=True)
class MixtureSpec:
    """``(1 - alpha) P + alpha Q`` with ``P`` having mean ``mu`` and
    ``P[|x - mu| > B] < beta``."""

    alpha: float
    mu: float
    tail_radius: float
    tail_mass: float

    def check(self):
        lhs = (1 - self.alpha) * (1 - self.tail_mass)
        if lhs < 2 / 3:
            raise ConfigError(f"(1-alpha)(1-beta) >= 2/3 violated: {lhs:.4g}")

    def concentration_bound(self, eps, m):
        """``4 exp(-gamma sqrt(m))`` with ``gamma = min(1/100, 2 eps^2 / B^2)``."""
        gamma = min(0.01, 2 * eps**2 / self.tail_radius**2)
        return 4 * math.exp(-gamma * math.sqrt(m))


# ------------------------------------------------------------------ rounding


@dataclass(frozen=True)
class RoundingConfig:
    beta: float
    delta1: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ConfigError(f"beta > 0 violated (beta={self.beta})")
        if not self.grid > 0:
            raise ConfigError("rounding grid beta * delta1 must be positive")

    @property
    def grid(self):
        return self.beta * self.delta1

    @property
    def accuracy_radius(self):
        return self.delta1 * (1 + self.beta)


def floor_to_grid(y, grid):
    return math.floor(y / grid) * grid


def randomized_round(y, grid, offset):
    """``floor(y + offset)`` rounded down to a multiple of ``grid``."""
    return floor_to_grid(y + offset, grid)


def draw_offset(cfg, rng):
    return float(rng.uniform(0.0, cfg.grid))


class RoundedPredictor:
    """A local predictor whose outputs are snapped to a randomly shifted grid.

    The offset is drawn once, at wrap time, and reused for every call.
    """

    def __init__(self, predictor, cfg, rng):
        self.predictor = predictor
        self.cfg = cfg
        self.offset = draw_offset(cfg, rng)

    def __call__(self, x, rng):
        return randomized_round(self.predictor(x, rng), self.cfg.grid, self.offset)


def wrap_with_rounding(predictor, cfg, rng):
    return RoundedPredictor(predictor, cfg, rng)
