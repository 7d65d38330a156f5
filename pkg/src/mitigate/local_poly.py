"""Local mitigation for polynomial labels of bounded total degree.

Restricted to a line through ``x_star``, a degree-``d`` polynomial is a
univariate degree-``d`` polynomial in the distance from ``x_star``.  Each trial
queries the oracle at ``d + 1`` collinear points, interpolates in the
normalized radius, and reads off the constant term, i.e. the value at
``x_star``.  The output is the median over trials.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, InsufficientAcceptance, ShapeError, SingularSystem
from .geometry import correlated_tuples, min_node_gaps
from .local_linear import LocalEstimate
from .robust import median

MIN_NODE_GAP = 1e-12


@dataclass(frozen=True)
class PolyConfig:
    n: int
    d: int
    s: int
    delta1: float = 1.0
    eps: float = None

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError(f"degree d >= 1 violated (d={self.d})")
        if self.s < 1:
            raise ConfigError(f"s >= 1 violated (s={self.s})")
        if not self.delta1 > 0:
            raise ConfigError(f"delta1 > 0 violated (delta1={self.delta1})")
        if self.eps is not None and not 0 <= self.eps <= 1 / (20 * self.d):
            raise ConfigError(f"eps <= 1/(20d) violated (eps={self.eps}, d={self.d})")

    @property
    def delta0(self):
        """Per-point error tolerated before a trial can be thrown off."""
        return self.delta1 / (4 * (80 * self.n * self.d**2) ** self.d)

    @property
    def separation(self):
        """Node gap ``1/(40 n d^2)`` reached with probability at least 5/6."""
        return 1.0 / (40 * self.n * self.d**2)

    @property
    def queries(self):
        return self.s * (self.d + 1)


def _check_nodes(nodes):
    nodes = np.asarray(nodes, dtype=np.float64).ravel()
    s = np.sort(nodes)
    if nodes.size > 1 and np.min(np.diff(s)) <= MIN_NODE_GAP:
        raise SingularSystem(f"nodes are not separated by more than {MIN_NODE_GAP}")
    return nodes


def vandermonde_solve(nodes, values):
    """Coefficients ``a`` with ``sum_k a[k] v**k == values`` at every node."""
    nodes = _check_nodes(nodes)
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.shape != nodes.shape:
        raise ShapeError(f"{nodes.size} nodes but {values.size} values")
    return _kernels.bjorck_pereyra(nodes[None, :], values[None, :])[0]


def vandermonde_inverse_norm_bound(nodes):
    """``max_j prod_{i != j} (1 + |v_i|) / |v_i - v_j|``.

    Column ``j`` of ``V^-1`` (with ``V[i, k] = v_i**k``) holds the monomial
    coefficients of the ``j``-th Lagrange basis polynomial, whose absolute sum
    is at most the ``j``-th product.  So this bounds the largest column sum of
    ``V^-1``, which is ``||V^-T||_inf``; row sums can be up to ``d + 1`` times larger.
    """
    v = _check_nodes(nodes)
    best = 0.0
    for j in range(v.size):
        others = np.delete(v, j)
        best = max(best, float(np.prod((1 + np.abs(others)) / np.abs(others - v[j]))))
    return best


def separated_bound(n, d):
    """The inverse-norm bound for nodes in [0, 1] separated by ``1/(40 n d^2)``."""
    return float((80 * n * d**2) ** d)


def poly_mitigate(f, body, x_star, cfg, rng, keep_diagnostics=False):
    """Median over ``s`` trials of the interpolated value at ``x_star``.

    Trials whose nodes are not separated by more than ``MIN_NODE_GAP`` are
    discarded before querying; they are reported in ``discarded``.
    """
    if body.n != cfg.n:
        raise ConfigError(f"body has n={body.n}, config says n={cfg.n}")
    tup = correlated_tuples(x_star, body, cfg.s, cfg.d, rng)
    ok = np.flatnonzero(min_node_gaps(tup.nodes) > MIN_NODE_GAP)
    if ok.size == 0:
        raise InsufficientAcceptance(f"all {cfg.s} trials had coincident nodes")
    k = cfg.d + 1
    q0 = f.query_count
    vals = f.evaluate(tup.points[ok].reshape(ok.size * k, cfg.n)).reshape(ok.size, k)
    coeffs = _kernels.bjorck_pereyra(tup.nodes[ok], vals)
    est = coeffs[:, 0]
    if not np.all(np.isfinite(est)):
        raise SingularSystem("interpolation produced a non-finite value")
    diag = dict(estimates=est, index=ok, nodes=tup.nodes[ok], values=vals) if keep_diagnostics else None
    return LocalEstimate(median(est), int(ok.size), cfg.s, f.query_count - q0, 0, int(cfg.s - ok.size), diag)


def perturbation_bound(nodes, max_value_error):
    """Worst-case coefficient error from node-wise value errors of the given size.

    Sums the per-node products rather than taking their maximum, which gives a
    valid bound on the row sums of ``V^-1``.
    """
    v = _check_nodes(nodes)
    total = 0.0
    for j in range(v.size):
        others = np.delete(v, j)
        total += float(np.prod((1 + np.abs(others)) / np.abs(others - v[j])))
    return total * max_value_error
