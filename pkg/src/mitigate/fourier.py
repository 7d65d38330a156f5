"""Fourier analysis over the hypercube {-1, +1}^n.

Character indices ``S`` are integer bitmasks over 0-based coordinates: bit ``i``
of ``S`` set means coordinate ``i`` belongs to ``S``.  Truth tables are indexed the
same way as packed points, so entry ``k`` of a table is the value at the point
whose ``-1`` coordinates are the set bits of ``k``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BudgetExceeded, ConfigError, DimensionError, EmptySample, ShapeError
from .oracle import FunctionOracle, Hypercube, pack_bits

MAX_WHT_DIM = 24


def mask_of(indices):
    """Bitmask for an iterable of 0-based coordinate indices."""
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def indices_of(mask):
    return tuple(i for i in range(int(mask).bit_length()) if (mask >> i) & 1)


def format_mask_set(masks):
    """Canonical string for a set of character indices: sorted hex joined by '+'."""
    return "+".join(f"{m:x}" for m in sorted(masks))


def eval_character(S, x):
    """chi_S(x): the product of the coordinates of ``x`` indexed by ``S``."""
    x = np.asarray(x)
    if x.ndim != 1:
        raise DimensionError("eval_character takes a single point")
    if int(S) >> x.shape[0]:
        raise DimensionError(f"character {S:#x} references coordinates beyond n={x.shape[0]}")
    return int(np.prod(x[list(indices_of(S))], initial=1.0))


@dataclass
class FourierSpectrum:
    """Sparse Fourier expansion ``sum_S coeffs[S] * chi_S`` on {-1, +1}^n."""

    n: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.n <= 63:
            raise DimensionError(f"spectrum dimension must lie in [1, 63], got {self.n}")
        self.coeffs = {int(S): float(c) for S, c in self.coeffs.items()}
        for S in self.coeffs:
            if S < 0 or S >> self.n:
                raise DimensionError(f"character {S:#x} out of range for n={self.n}")
        self._masks = np.fromiter(self.coeffs.keys(), dtype=np.uint64, count=len(self.coeffs))
        self._values = np.fromiter(self.coeffs.values(), dtype=np.float64, count=len(self.coeffs))

    @property
    def support(self):
        return frozenset(self.coeffs)

    def __getitem__(self, S):
        return self.coeffs.get(int(S), 0.0)

    def __len__(self):
        return len(self.coeffs)

    def heavy(self, threshold):
        """Characters whose coefficient has magnitude at least ``threshold``."""
        return frozenset(S for S, c in self.coeffs.items() if abs(c) >= threshold)

    def weight(self):
        return math.fsum(c * c for c in self.coeffs.values())

    def l1(self):
        return math.fsum(abs(c) for c in self.coeffs.values())

    def evaluate_bits(self, bits):
        return _kernels.spectrum_eval(bits, self._masks, self._values)

    def evaluate(self, X):
        X = np.atleast_2d(X)
        if X.shape[1] != self.n:
            raise DimensionError(f"spectrum has n={self.n}, points have {X.shape[1]}")
        return self.evaluate_bits(pack_bits(X))

    def truth_table(self):
        if self.n > MAX_WHT_DIM:
            raise ConfigError(f"refusing to tabulate 2^{self.n} points")
        return self.evaluate_bits(np.arange(2**self.n, dtype=np.uint64))

    def sup_norm(self):
        """Exact sup norm by enumeration for n <= 20, else the l1 upper bound."""
        if not self.coeffs:
            return 0.0
        if self.n <= 20:
            return float(np.max(np.abs(self.truth_table())))
        return self.l1()

    def without(self, S):
        return FourierSpectrum(self.n, {T: c for T, c in self.coeffs.items() if T != S})

    def as_oracle(self, name="spectrum"):
        return FunctionOracle(self.evaluate, self.n, bits_rule=self.evaluate_bits, name=name)

    @classmethod
    def from_table(cls, table):
        return wht_bruteforce(table)


def wht_bruteforce(truth_table):
    """Exact Fourier spectrum of a full truth table of length 2^n.

    Computed exhaustively over all 2^n points with the butterfly recursion, so
    each coefficient is ``2^-n sum_x f(x) chi_S(x)`` up to rounding.
    """
    table = np.asarray(truth_table, dtype=np.float64).ravel()
    size = table.shape[0]
    if size < 2 or size & (size - 1):
        raise ShapeError(f"truth table length {size} is not a power of two >= 2")
    n = size.bit_length() - 1
    if n > MAX_WHT_DIM:
        raise ConfigError(f"n={n} exceeds the exhaustive-transform limit {MAX_WHT_DIM}")
    coeffs = _kernels.fwht(table)
    nz = np.flatnonzero(coeffs)
    return FourierSpectrum(n, dict(zip(nz.tolist(), coeffs[nz].tolist())))


def estimate_coefficient_from_samples(S, X, y):
    """Empirical mean of ``chi_S(x) * y`` over a labeled sample."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] == 0:
        raise EmptySample("no samples to estimate a coefficient from")
    bits = pack_bits(X)
    return float(_kernels.character_means(bits, y, np.array([S], dtype=np.uint64))[0])


# ---------------------------------------------------------------- heavy search


@dataclass(frozen=True)
class GLConfig:
    """Thresholds and sample sizes for the heavy-coefficient search.

    Buckets (prefix assignments) are kept when their estimated weight reaches
    ``(3 tau / 4)^2 (1 - slack)``; weight estimates are accurate to
    ``slack (3 tau / 4)^2``.  Leaves are kept when the estimated coefficient
    reaches ``7 tau / 8`` with accuracy ``tau / 8``.  Per-estimate sample sizes
    come from Hoeffding (range 2) with a union bound over every estimate the
    search can make; pass ``weight_samples`` / ``leaf_samples`` to override.
    """

    tau: float
    fail_prob: float = 0.01
    slack: float = 0.25
    weight_samples: int = None
    leaf_samples: int = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError(f"tau > 0 violated (tau={self.tau})")
        if self.tau > 2:
            raise ConfigError(f"tau <= 2 violated for [-1,1]-valued oracles (tau={self.tau})")
        if not 0 < self.fail_prob <= 1:
            raise ConfigError(f"fail_prob must lie in (0, 1], got {self.fail_prob}")
        if not 0 < self.slack < 0.5:
            raise ConfigError(f"slack must lie in (0, 1/2), got {self.slack}")

    @property
    def prune_threshold(self):
        return (0.75 * self.tau) ** 2 * (1 - self.slack)

    @property
    def weight_accuracy(self):
        return self.slack * (0.75 * self.tau) ** 2

    @property
    def leaf_threshold(self):
        return 7 * self.tau / 8

    @property
    def leaf_accuracy(self):
        return self.tau / 8

    @property
    def max_live(self):
        # a surviving bucket has true weight >= (3 tau / 4)^2 (1 - 2 slack); Parseval caps the count
        return math.ceil(1.0 / ((0.75 * self.tau) ** 2 * (1 - 2 * self.slack)))

    def total_estimates(self, n):
        return 2 * n * self.max_live

    def samples_for(self, accuracy, n):
        return math.ceil(2.0 / accuracy**2 * math.log(2 * self.total_estimates(n) / self.fail_prob))

    def weight_sample_count(self, n):
        if self.weight_samples is not None:
            return int(self.weight_samples)
        return self.samples_for(self.weight_accuracy, n)

    def leaf_sample_count(self, n):
        if self.leaf_samples is not None:
            return int(self.leaf_samples)
        return self.samples_for(self.leaf_accuracy, n)

    def query_budget(self, n):
        return 2 * (n - 1) * self.weight_sample_count(n) + self.leaf_sample_count(n)


def goldreich_levin(f, cfg, rng):
    """Find every character with ``|f^(S)| >= tau`` using queries to ``f``.

    Returns a frozenset of masks.  With probability at least ``1 - fail_prob``
    it contains every ``S`` with ``|f^(S)| >= tau`` and nothing with
    ``|f^(S)| < 3 tau / 4``.  ``f`` must take values in [-1, 1].
    """
    n = f.n
    cube = Hypercube(n)
    m_w = cfg.weight_sample_count(n)
    m_leaf = cfg.leaf_sample_count(n)
    start = f.query_count

    live = [0]
    for k in range(1, n):
        split = np.uint64(1 << (k - 1))
        cands = np.array([J for J0 in live for J in (J0, J0 | int(split))], dtype=np.uint64)
        prefix = np.uint64((1 << k) - 1)
        b1 = cube.sample_bits(m_w, rng)
        z2 = rng.integers(0, 1 << k, size=m_w, dtype=np.uint64)
        b2 = (b1 & ~prefix) | z2
        prod = f.evaluate_bits(b1) * f.evaluate_bits(b2)
        weights = _kernels.character_means(b1 ^ b2, prod, cands)
        live = [int(J) for J, w in zip(cands, weights) if w >= cfg.prune_threshold]
        if len(live) > cfg.max_live:
            raise BudgetExceeded(
                f"{len(live)} live buckets at prefix length {k} exceed the cap {cfg.max_live}; "
                "sample counts are too small or f is not [-1,1]-valued"
            )
        if not live:
            return frozenset()

    top = 1 << (n - 1)
    leaves = np.array([S for J in live for S in (J, J | top)], dtype=np.uint64)
    bits = cube.sample_bits(m_leaf, rng)
    est = _kernels.character_means(bits, f.evaluate_bits(bits), leaves)
    used = f.query_count - start
    if used > cfg.query_budget(n):
        raise BudgetExceeded(f"used {used} queries, budget {cfg.query_budget(n)}")
    return frozenset(int(S) for S, e in zip(leaves, est) if abs(e) >= cfg.leaf_threshold)
