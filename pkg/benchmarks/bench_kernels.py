"""Time the numba kernels against their numpy fallbacks.

Run: python3 benchmarks/bench_kernels.py --repeats 5
"""

import argparse
import time

import numpy as np

from mitigate import _kernels


def best_of(fn, args, repeats):
    fn(*args)  # warm up (and compile)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    n, m = 16, 200_000
    bits = rng.integers(0, 1 << n, size=m, dtype=np.uint64)
    masks = rng.integers(0, 1 << n, size=32, dtype=np.uint64)
    coeffs = rng.normal(size=32)
    y = rng.normal(size=m)
    table = rng.normal(size=1 << n)
    keys = rng.integers(0, 2**63, size=(m, 4), dtype=np.uint64)
    nodes = np.sort(rng.random((20_000, 4)), axis=1)
    vals = rng.normal(size=(20_000, 4))
    return [
        ("spectrum_eval", _kernels.spectrum_eval_numpy, _kernels.spectrum_eval_jit, (bits, masks, coeffs)),
        ("character_means", _kernels.character_means_numpy, _kernels.character_means_jit, (bits, y, masks)),
        ("fwht", _kernels.fwht_numpy, _kernels._fwht_dispatch, (table,)),
        ("hash_rows", _kernels.hash_rows_numpy, _kernels.hash_rows_jit, (keys, 7)),
        ("bjorck_pereyra", _kernels.bjorck_pereyra_numpy, _kernels.bjorck_pereyra_jit, (nodes, vals)),
    ]


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not importable; nothing to compare")
        return
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}  agree")
    for name, slow, fast, a in cases(rng):
        agree = np.allclose(slow(*a), fast(*a), rtol=1e-9, atol=1e-9)
        t_np = best_of(slow, a, args.repeats)
        t_nb = best_of(fast, a, args.repeats)
        print(f"{name:<18}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
