"""Convex bodies inside the unit ball and collinear correlated sampling.

Resampling along a ray keeps the uniform law: if ``x`` is uniform on the body and
``t`` is the length of the segment from ``x_star`` through ``x`` to the boundary,
drawing a fresh distance ``r' = t * u ** (1 / n)`` (density ``n r^(n-1) / t^n``)
and stepping that far along the same direction gives another uniform point.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateRay, DimensionError

BISECTION_STEPS = 64


class ConvexBody:
    """A bounded convex body contained in the closed unit ball."""

    n: int

    def contains(self, X):
        raise NotImplementedError

    def sample_uniform(self, m, rng):
        raise NotImplementedError

    def exit_lengths(self, origin, directions):
        """Distance from ``origin`` to the boundary along each unit direction (rows)."""
        raise NotImplementedError

    def ray_exit_length(self, x_star, x):
        x_star = np.asarray(x_star, dtype=np.float64)
        x = np.asarray(x, dtype=np.float64)
        if x_star.shape != (self.n,) or x.shape != (self.n,):
            raise DimensionError(f"points must have dimension {self.n}")
        d = x - x_star
        r = np.linalg.norm(d)
        if r == 0.0:
            raise DegenerateRay("x coincides with x_star")
        return float(self.exit_lengths(x_star, (d / r)[None, :])[0])

    def volume_fraction_bound(self, radius):
        """Upper bound on the uniform mass of any ball of ``radius`` (None if unknown)."""
        return None


class UnitBall(ConvexBody):
    def __init__(self, n):
        if n < 1:
            raise DimensionError("dimension must be positive")
        self.n = n

    def contains(self, X):
        X = np.atleast_2d(X)
        return np.einsum("ij,ij->i", X, X) <= 1.0 + 1e-12

    def sample_uniform(self, m, rng):
        g = rng.standard_normal((m, self.n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g * (rng.random(m) ** (1.0 / self.n))[:, None]

    def exit_lengths(self, origin, directions):
        p = np.asarray(origin, dtype=np.float64)
        pu = directions @ p
        disc = pu * pu + max(0.0, 1.0 - float(p @ p))
        return -pu + np.sqrt(disc)

    def volume_fraction_bound(self, radius):
        return min(1.0, radius) ** self.n

    def __repr__(self):
        return f"UnitBall(n={self.n})"


class Box(ConvexBody):
    """Axis-aligned cube ``[-a, a]^n`` with ``a * sqrt(n) <= 1``."""

    def __init__(self, n, half_width=None):
        if n < 1:
            raise DimensionError("dimension must be positive")
        a = 1.0 / np.sqrt(n) if half_width is None else float(half_width)
        if not 0 < a <= 1.0 / np.sqrt(n) + 1e-15:
            raise ConfigError(f"box half-width {a} does not fit inside the unit ball")
        self.n = n
        self.a = a

    def contains(self, X):
        return np.all(np.abs(np.atleast_2d(X)) <= self.a + 1e-12, axis=1)

    def sample_uniform(self, m, rng):
        return rng.uniform(-self.a, self.a, size=(m, self.n))

    def exit_lengths(self, origin, directions):
        p = np.asarray(origin, dtype=np.float64)
        u = np.asarray(directions, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(u > 0, (self.a - p) / u, np.where(u < 0, (-self.a - p) / u, np.inf))
        return t.min(axis=1)

    def __repr__(self):
        return f"Box(n={self.n}, a={self.a:g})"


class MembershipBody(ConvexBody):
    """Convex body known only through a membership test and an exact sampler.

    Ray exits are found by bisection on ``[0, 2]`` (the diameter bound of the
    unit ball), to within ``2 ** -BISECTION_STEPS``.
    """

    def __init__(self, n, contains, sampler):
        self.n = n
        self._contains = contains
        self._sampler = sampler

    def contains(self, X):
        return np.asarray(self._contains(np.atleast_2d(X)), dtype=bool)

    def sample_uniform(self, m, rng):
        return np.asarray(self._sampler(m, rng), dtype=np.float64)

    def exit_lengths(self, origin, directions):
        p = np.asarray(origin, dtype=np.float64)
        u = np.asarray(directions, dtype=np.float64)
        lo = np.zeros(u.shape[0])
        hi = np.full(u.shape[0], 2.0)
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            inside = self.contains(p + mid[:, None] * u)
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return lo


# ------------------------------------------------------------------ sampling


def collinearity_residual(x_star, x, x_prime):
    """Sine of the angle between ``x - x_star`` and ``x_prime - x_star`` (row-wise)."""
    a = np.atleast_2d(x) - x_star
    b = np.atleast_2d(x_prime) - x_star
    ua = a / np.linalg.norm(a, axis=1, keepdims=True)
    ub = b / np.linalg.norm(b, axis=1, keepdims=True)
    proj = np.einsum("ij,ij->i", ua, ub)
    return np.linalg.norm(ua - proj[:, None] * ub, axis=1)


def _rays(x_star, X):
    d = X - x_star
    r = np.linalg.norm(d, axis=1)
    if np.any(r == 0.0):
        raise DegenerateRay("a sampled point coincides with x_star")
    return d / r[:, None], r


def resample_radius(t, u, n):
    """Inverse CDF of the density ``n r^(n-1) / t^n`` on ``[0, t]``."""
    return t * u ** (1.0 / n)


def resample(x_star, x, body, rng):
    """A uniform point on the ray from ``x_star`` through ``x`` (given uniform ``x``)."""
    x_star = np.asarray(x_star, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    dirs, _ = _rays(x_star, x[None, :])
    t = body.exit_lengths(x_star, dirs)
    r_new = resample_radius(t, rng.random(1), body.n)
    return x_star + r_new[0] * dirs[0]


def _draw_anchors(x_star, body, m, rng):
    X = body.sample_uniform(m, rng)
    bad = np.flatnonzero(np.all(X == x_star, axis=1))
    if bad.size:
        X[bad] = body.sample_uniform(bad.size, rng)
        if np.any(np.all(X[bad] == x_star, axis=1)):
            raise DegenerateRay("uniform draw hit x_star twice")
    return X


@dataclass
class CollinearPairs:
    """A batch of correlated pairs; row ``i`` is one pair ``(x_i, x_i')``."""

    x_star: np.ndarray
    x: np.ndarray
    x_prime: np.ndarray
    t: np.ndarray
    r: np.ndarray
    r_prime: np.ndarray

    @property
    def lam(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.r != self.r_prime, self.r / (self.r - self.r_prime), np.inf)

    @property
    def lam_prime(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.r != self.r_prime, self.r_prime / (self.r_prime - self.r), np.inf)

    def __len__(self):
        return self.x.shape[0]

    def __getitem__(self, i):
        return CollinearPair(
            self.x[i], self.x_prime[i], float(self.t[i]), float(self.r[i]), float(self.r_prime[i])
        )


@dataclass
class CollinearPair:
    x: np.ndarray
    x_prime: np.ndarray
    t: float
    r: float
    r_prime: float

    @property
    def lam(self):
        return self.r / (self.r - self.r_prime) if self.r != self.r_prime else float("inf")

    @property
    def lam_prime(self):
        return self.r_prime / (self.r_prime - self.r) if self.r != self.r_prime else float("inf")

    def accepted(self, bound):
        return max(abs(self.lam), abs(self.lam_prime)) <= bound


def correlated_pairs(x_star, body, m, rng):
    """``m`` independent pairs, each member marginally uniform on ``body``."""
    x_star = np.asarray(x_star, dtype=np.float64)
    X = _draw_anchors(x_star, body, m, rng)
    return pairs_from_anchors(x_star, body, X, rng.random(m))


def pairs_from_anchors(x_star, body, X, u):
    """Pairs through given uniform anchors ``X`` using uniforms ``u`` for the new radii."""
    x_star = np.asarray(x_star, dtype=np.float64)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    dirs, r = _rays(x_star, X)
    t = body.exit_lengths(x_star, dirs)
    r_prime = resample_radius(t, u, body.n)
    return CollinearPairs(x_star, X, x_star + r_prime[:, None] * dirs, t, r, r_prime)


def correlated_pair(x_star, body, rng):
    return correlated_pairs(x_star, body, 1, rng)[0]


@dataclass
class CollinearTuples:
    """A batch of ``(d+1)``-point collinear tuples.

    ``points[i, 0]`` is the uniform anchor and ``points[i, j]`` (j >= 1) its
    resamples; ``nodes`` are distances from ``x_star`` divided by ``t``.
    """

    x_star: np.ndarray
    points: np.ndarray
    nodes: np.ndarray
    t: np.ndarray

    def __len__(self):
        return self.points.shape[0]


def correlated_tuples(x_star, body, m, d, rng):
    if d < 1:
        raise ConfigError(f"degree d >= 1 violated (d={d})")
    x_star = np.asarray(x_star, dtype=np.float64)
    X = _draw_anchors(x_star, body, m, rng)
    u = rng.random((m, d))
    dirs, r = _rays(x_star, X)
    t = body.exit_lengths(x_star, dirs)
    radii = np.column_stack([r, resample_radius(t[:, None], u, body.n)])
    points = x_star + radii[:, :, None] * dirs[:, None, :]
    return CollinearTuples(x_star, points, radii / t[:, None], t)


def correlated_tuple(x_star, body, d, rng):
    return correlated_tuples(x_star, body, 1, d, rng)


def min_node_gaps(nodes):
    """Smallest pairwise gap among each row's nodes."""
    s = np.sort(nodes, axis=1)
    return np.diff(s, axis=1).min(axis=1)
