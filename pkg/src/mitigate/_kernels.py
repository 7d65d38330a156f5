"""Hot numeric kernels with a numba path and a pure-numpy path.

The numba path is used when numba imports and ``MITIGATE_NUMBA`` is not ``"0"``.
Both paths are always importable as ``<name>_numpy`` / ``<name>_jit`` so tests and
``benchmarks/bench_kernels.py`` can compare them directly; the unsuffixed names are
the ones the rest of the package calls.

Hypercube points are packed into uint64 words: bit ``i`` set means coordinate
``i`` equals -1.  A character mask uses the same layout, so
``chi_S(x) = (-1) ** popcount(S & x)``.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("MITIGATE_NUMBA", "1") != "0"

_U = np.uint64
_GOLDEN = _U(0x9E3779B97F4A7C15)
_MIX1 = _U(0xBF58476D1CE4E5B9)
_MIX2 = _U(0x94D049BB133111EB)


# ---------------------------------------------------------------- numpy path


def parity_numpy(v):
    """Parity (popcount mod 2) of each uint64 entry, as uint64 0/1."""
    v = np.asarray(v, dtype=np.uint64).copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> _U(shift)
    return v & _U(1)


def spectrum_eval_numpy(bits, masks, coeffs):
    bits = np.asarray(bits, dtype=np.uint64)
    out = np.zeros(bits.shape[0])
    for mask, c in zip(masks, coeffs):
        out += c * (1.0 - 2.0 * parity_numpy(bits & _U(mask)))
    return out


def character_means_numpy(bits, values, masks):
    """``mean(values * chi_S(bits))`` for every mask ``S``."""
    bits = np.asarray(bits, dtype=np.uint64)
    values = np.asarray(values, dtype=np.float64)
    out = np.empty(len(masks))
    for k, mask in enumerate(masks):
        signs = 1.0 - 2.0 * parity_numpy(bits & _U(mask))
        out[k] = np.mean(values * signs)
    return out


def fwht_numpy(table):
    """Normalized Walsh-Hadamard transform of a length-2^n table."""
    a = np.array(table, dtype=np.float64)
    size = a.shape[0]
    h = 1
    while h < size:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(size) / size


def splitmix_numpy(z):
    z = np.asarray(z, dtype=np.uint64) + _GOLDEN
    z = (z ^ (z >> _U(30))) * _MIX1
    z = (z ^ (z >> _U(27))) * _MIX2
    return z ^ (z >> _U(31))


def hash_rows_numpy(keys, seed):
    """Map each row of a 2-D uint64 key array to a uniform float in [0, 1)."""
    keys = np.atleast_2d(np.asarray(keys, dtype=np.uint64))
    h = np.full(keys.shape[0], _U(seed), dtype=np.uint64)
    for j in range(keys.shape[1]):
        h = splitmix_numpy(h ^ keys[:, j])
    return (h >> _U(11)).astype(np.float64) * 2.0**-53


def bjorck_pereyra_numpy(nodes, values):
    """Monomial coefficients of the interpolants, one system per row.

    ``nodes`` and ``values`` have shape ``(batch, k)``; row ``b`` of the result
    holds ``a`` with ``sum_j a[j] * nodes[b, i] ** j == values[b, i]``.
    """
    x = np.asarray(nodes, dtype=np.float64)
    c = np.array(values, dtype=np.float64)
    k = x.shape[1]
    for j in range(k - 1):
        c[:, j + 1 :] = (c[:, j + 1 :] - c[:, j:-1]) / (x[:, j + 1 :] - x[:, : k - j - 1])
    for j in range(k - 2, -1, -1):
        for i in range(j, k - 1):
            c[:, i] -= x[:, j] * c[:, i + 1]
    return c


# ---------------------------------------------------------------- numba path


def _parity_scalar(v):
    v ^= v >> np.uint64(32)
    v ^= v >> np.uint64(16)
    v ^= v >> np.uint64(8)
    v ^= v >> np.uint64(4)
    v ^= v >> np.uint64(2)
    v ^= v >> np.uint64(1)
    return v & np.uint64(1)


def _spectrum_eval_loop(bits, masks, coeffs):
    out = np.zeros(bits.shape[0])
    for i in range(bits.shape[0]):
        acc = 0.0
        b = bits[i]
        for k in range(masks.shape[0]):
            if parity_scalar(b & masks[k]):
                acc -= coeffs[k]
            else:
                acc += coeffs[k]
        out[i] = acc
    return out


def _character_means_loop(bits, values, masks):
    out = np.zeros(masks.shape[0])
    for k in range(masks.shape[0]):
        m = masks[k]
        acc = 0.0
        for i in range(bits.shape[0]):
            if parity_scalar(bits[i] & m):
                acc -= values[i]
            else:
                acc += values[i]
        out[k] = acc / bits.shape[0]
    return out


def _fwht_loop(table):
    a = table.copy()
    size = a.shape[0]
    h = 1
    while h < size:
        for start in range(0, size, 2 * h):
            for i in range(start, start + h):
                u = a[i]
                v = a[i + h]
                a[i] = u + v
                a[i + h] = u - v
        h *= 2
    return a / size


def _hash_rows_loop(keys, seed):
    out = np.empty(keys.shape[0])
    for i in range(keys.shape[0]):
        h = seed
        for j in range(keys.shape[1]):
            z = (h ^ keys[i, j]) + np.uint64(0x9E3779B97F4A7C15)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            h = z ^ (z >> np.uint64(31))
        out[i] = (h >> np.uint64(11)) * (2.0**-53)
    return out


def _bjorck_pereyra_loop(nodes, values):
    batch, k = nodes.shape
    out = values.copy()
    for b in range(batch):
        x = nodes[b]
        c = out[b]
        for j in range(k - 1):
            for i in range(k - 1, j, -1):
                c[i] = (c[i] - c[i - 1]) / (x[i] - x[i - j - 1])
        for j in range(k - 2, -1, -1):
            for i in range(j, k - 1):
                c[i] -= x[j] * c[i + 1]
    return out


if HAVE_NUMBA:
    parity_scalar = njit(cache=True, inline="always")(_parity_scalar)
    _spectrum_eval_jit = njit(cache=True)(_spectrum_eval_loop)
    _character_means_jit = njit(cache=True)(_character_means_loop)
    fwht_jit = njit(cache=True)(_fwht_loop)
    _hash_rows_jit = njit(cache=True)(_hash_rows_loop)
    _bjorck_pereyra_jit = njit(cache=True)(_bjorck_pereyra_loop)

    def spectrum_eval_jit(bits, masks, coeffs):
        return _spectrum_eval_jit(
            np.ascontiguousarray(bits, dtype=np.uint64),
            np.asarray(masks, dtype=np.uint64),
            np.asarray(coeffs, dtype=np.float64),
        )

    def character_means_jit(bits, values, masks):
        return _character_means_jit(
            np.ascontiguousarray(bits, dtype=np.uint64),
            np.ascontiguousarray(values, dtype=np.float64),
            np.asarray(masks, dtype=np.uint64),
        )

    def hash_rows_jit(keys, seed):
        keys = np.atleast_2d(np.asarray(keys, dtype=np.uint64))
        return _hash_rows_jit(np.ascontiguousarray(keys), np.uint64(seed))

    def bjorck_pereyra_jit(nodes, values):
        return _bjorck_pereyra_jit(
            np.ascontiguousarray(nodes, dtype=np.float64),
            np.ascontiguousarray(values, dtype=np.float64),
        )
else:  # pragma: no cover
    parity_scalar = _parity_scalar
    spectrum_eval_jit = character_means_jit = fwht_jit = None
    hash_rows_jit = bjorck_pereyra_jit = None


def _fwht_dispatch(table):
    return fwht_jit(np.ascontiguousarray(table, dtype=np.float64))


if USE_NUMBA:
    spectrum_eval = spectrum_eval_jit
    character_means = character_means_jit
    fwht = _fwht_dispatch
    hash_rows = hash_rows_jit
    bjorck_pereyra = bjorck_pereyra_jit
else:
    spectrum_eval = spectrum_eval_numpy
    character_means = character_means_numpy
    fwht = fwht_numpy
    hash_rows = hash_rows_numpy
    bjorck_pereyra = bjorck_pereyra_numpy

parity = parity_numpy


def backend():
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
