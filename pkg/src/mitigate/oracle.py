"""Domain primitives, query-counted function oracles, and loss/dissimilarity estimators."""

import math
import threading
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, EmptySample, NumericalError
from .streams import substream

GEOMETRY_ATOL = 1e-9


# ------------------------------------------------------------------ hypercube


def pack_bits(X):
    """Pack ``(m, n)`` arrays of +-1 into uint64 words (bit i set <=> x_i = -1)."""
    X = np.atleast_2d(np.asarray(X))
    n = X.shape[1]
    if n > 63:
        raise DimensionError(f"hypercube dimension {n} exceeds 63")
    weights = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
    return ((X < 0).astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)


def unpack_bits(bits, n):
    bits = np.asarray(bits, dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    set_ = (bits[:, None] >> shifts[None, :]) & np.uint64(1)
    return 1.0 - 2.0 * set_.astype(np.float64)


def cube_points(n):
    """All 2^n hypercube points in truth-table order (row k has bits k)."""
    return unpack_bits(np.arange(2**n, dtype=np.uint64), n)


class Hypercube:
    """The domain {-1, +1}^n with its uniform law."""

    def __init__(self, n):
        if not 1 <= n <= 63:
            raise DimensionError(f"hypercube dimension must lie in [1, 63], got {n}")
        self.n = n

    def sample_bits(self, m, rng):
        return rng.integers(0, 1 << self.n, size=m, dtype=np.uint64)

    def sample_uniform(self, m, rng):
        return unpack_bits(self.sample_bits(m, rng), self.n)

    def contains(self, X):
        X = np.atleast_2d(X)
        return np.all(np.abs(X) == 1.0, axis=1)

    def __repr__(self):
        return f"Hypercube(n={self.n})"


# ------------------------------------------------------------------ oracles


class FunctionOracle:
    """Query access to a fixed evaluation rule, with an exact query counter.

    ``rule`` maps an ``(m, n)`` array of points to ``m`` real values.  Hypercube
    rules may additionally supply ``bits_rule`` operating on packed points, which
    the heavy-coefficient search uses to avoid unpacking.  The counter lives here
    rather than in the rule, so the same rule can be replayed through
    :meth:`fresh` with a zeroed counter.
    """

    def __init__(self, rule, n, *, bits_rule=None, name="f", certificate=None):
        self.rule = rule
        self.bits_rule = bits_rule
        self.n = n
        self.name = name
        self.certificate = certificate
        self._count = 0
        self._lock = threading.Lock()

    @property
    def query_count(self):
        return self._count

    def _charge(self, k):
        with self._lock:
            self._count += int(k)

    def evaluate(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n:
            raise DimensionError(f"{self.name} expects dimension {self.n}, got {X.shape[1]}")
        self._charge(X.shape[0])
        return np.asarray(self.rule(X), dtype=np.float64).reshape(X.shape[0])

    def evaluate_bits(self, bits):
        bits = np.asarray(bits, dtype=np.uint64)
        self._charge(bits.shape[0])
        if self.bits_rule is not None:
            return np.asarray(self.bits_rule(bits), dtype=np.float64)
        return np.asarray(self.rule(unpack_bits(bits, self.n)), dtype=np.float64)

    def __call__(self, x):
        return float(self.evaluate(np.asarray(x, dtype=np.float64)[None, :])[0])

    def fresh(self):
        return FunctionOracle(
            self.rule, self.n, bits_rule=self.bits_rule, name=self.name, certificate=self.certificate
        )

    def __repr__(self):
        return f"FunctionOracle({self.name!r}, n={self.n}, queries={self._count})"


def oracle_from(fn, n, name="f"):
    """Wrap any vectorized callable (or an object with ``evaluate``) as an oracle."""
    if isinstance(fn, FunctionOracle):
        return fn
    bits_rule = getattr(fn, "evaluate_bits", None)
    rule = getattr(fn, "evaluate", fn)
    return FunctionOracle(rule, n, bits_rule=bits_rule, name=name)


# ------------------------------------------------------------------ parameters


@dataclass(frozen=True)
class MitigationParams:
    n: int
    s: int = 8
    tau: float = 0.5
    eps0: float = 0.0
    eps1: float = 0.1
    delta0: float = 0.0
    delta1: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"dimension n must be positive, got {self.n}")
        if self.s < 1:
            raise ConfigError(f"security parameter s must be positive, got {self.s}")
        if self.tau <= 0:
            raise ConfigError(f"tau > 0 violated (tau={self.tau})")
        if self.eps0 < 0 or self.delta0 < 0 or self.delta1 < 0:
            raise ConfigError("loss bounds and cutoff radii must be non-negative")
        if self.delta1 < self.delta0:
            raise ConfigError(f"delta1 >= delta0 violated ({self.delta1} < {self.delta0})")

    def check_global(self):
        """Fail unless the heavy-coefficient mitigator's preconditions hold."""
        if not self.eps1 > self.eps0:
            raise ConfigError(f"eps1 > eps0 violated (eps1={self.eps1}, eps0={self.eps0})")
        bound = (self.tau / 6) ** 2
        if self.eps0 > bound:
            raise ConfigError(
                f"eps0 <= (tau/6)^2 violated: eps0={self.eps0} > {bound:.6g}; at eps0 ~ tau^2 "
                "two oracles each missing a different heavy coefficient are both admissible"
            )


# ------------------------------------------------------------------ losses


@dataclass(frozen=True)
class LossKind:
    kind: str
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero_one", "square", "cutoff"):
            raise ConfigError(f"unknown loss kind {self.kind!r}")
        if self.delta < 0:
            raise ConfigError("cutoff threshold must be >= 0")

    @classmethod
    def cutoff(cls, delta):
        return cls("cutoff", float(delta))

    def pointwise(self, pred, y):
        pred = np.asarray(pred, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.kind == "zero_one":
            return (pred != y).astype(np.float64)
        if self.kind == "square":
            return (pred - y) ** 2
        return (np.abs(pred - y) > self.delta).astype(np.float64)


ZERO_ONE = LossKind("zero_one")
SQUARE = LossKind("square")


def estimate_loss(f, sampler, kind, m, rng):
    """Empirical population loss of ``f`` on ``m`` fresh examples from ``sampler``.

    ``sampler(m, rng)`` must return ``(X, y)``.  Exactly ``m`` examples are drawn
    and ``m`` oracle queries made.
    """
    if m < 1:
        raise ConfigError("sample count m must be >= 1")
    X, y = sampler(m, rng)
    y = np.asarray(y, dtype=np.float64)
    pred = f.evaluate(X) if hasattr(f, "evaluate") else np.asarray(f(X), dtype=np.float64)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(pred))):
        raise NumericalError("non-finite label or oracle output")
    return float(np.mean(kind.pointwise(pred, y)))


# ------------------------------------------------------------------ dissimilarity


def _hashable(v):
    if isinstance(v, np.ndarray):
        return v.tobytes()
    return v


def empirical_tv_discrete(samples_a, samples_b):
    """Total variation distance between two empirical distributions."""
    a = Counter(_hashable(v) for v in samples_a)
    b = Counter(_hashable(v) for v in samples_b)
    na, nb = sum(a.values()), sum(b.values())
    if na == 0 or nb == 0:
        raise EmptySample("both sample multisets must be non-empty")
    support = a.keys() | b.keys()
    return 0.5 * math.fsum(abs(a[v] / na - b[v] / nb) for v in support)


def empirical_cutoff_dissimilarity(g_a, g_b, probes, delta, trials, rng):
    """Max over probes of the estimated ``P[|g_a(x) - g_b(x)| > delta]``.

    ``g_a`` and ``g_b`` are randomized predictors ``(x, rng) -> float``; every
    trial hands each of them its own independent stream.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    probes = list(probes)
    if not probes:
        raise EmptySample("probe set is empty")
    base = int(rng.integers(2**63))
    worst = 0.0
    for p, x in enumerate(probes):
        hits = 0
        for t in range(trials):
            ya = g_a(x, substream(base, p, t, 0))
            yb = g_b(x, substream(base, p, t, 1))
            if not (math.isfinite(ya) and math.isfinite(yb)):
                raise NumericalError("predictor returned a non-finite value")
            hits += abs(ya - yb) > delta
        worst = max(worst, hits / trials)
    return worst
