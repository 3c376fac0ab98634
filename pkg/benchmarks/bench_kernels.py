"""Time the numba kernels against their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each row
reports the best wall time of both versions, the speedup and the largest
absolute difference between their outputs. The first numba call is made
before timing so compilation is excluded.
"""
import argparse
import time

import numpy as np

from expenergy import kernels
from expenergy._accel import HAVE_NUMBA


def best_of(fn, args, repeat):
    out = fn(*args)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    box = 80
    t = np.array([[np.cos(0.4), -np.exp(-0.3j) * np.sin(0.4)], [np.exp(0.3j) * np.sin(0.4), np.cos(0.4)]])
    sect = kernels.beamsplitter_sectors_numpy(t[0, 0], t[0, 1], t[1, 0], t[1, 1], 60)
    psi = rng.normal(size=(61, 61, 1)) + 1j * rng.normal(size=(61, 61, 1))

    m = 3
    X = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    A = 0.3 * (X + X.T) / np.linalg.norm(X + X.T, 2)
    b = 0.4 * (rng.normal(size=m) + 1j * rng.normal(size=m))

    T, r, G = 64, 1, 8
    Y = rng.normal(size=(T, r, r)) + 1j * rng.normal(size=(T, r, r))
    Ar = 0.3 * (Y + np.swapaxes(Y, 1, 2)) / np.abs(Y).max()
    br = 0.3 * (rng.normal(size=(G, T, r)) + 1j * rng.normal(size=(G, T, r)))
    cr = 0.1 * (rng.normal(size=(G, T)) + 1j * rng.normal(size=(G, T)))
    coefs = rng.normal(size=T) + 1j * rng.normal(size=T)
    rows = np.arange(T, dtype=np.int64)

    return [
        ("squeezing_matrix", kernels.squeezing_matrix_loops, kernels.squeezing_matrix_numpy, (0.3, box)),
        ("displacement_matrix", kernels.displacement_matrix_loops, kernels.displacement_matrix_numpy, (0.5 + 0.2j, box)),
        ("beamsplitter_sectors", kernels.beamsplitter_sectors_loops, kernels.beamsplitter_sectors_numpy,
         (t[0, 0], t[0, 1], t[1, 0], t[1, 1], 60)),
        ("apply_sectors", kernels.apply_sectors_loops, kernels.apply_sectors_numpy, (psi, sect, 60)),
        ("gaussian_fock", kernels.gaussian_fock_loops, kernels.gaussian_fock_numpy, (A, b, 0j, 20)),
        ("pair_sum", kernels.pair_sum_loops, kernels.pair_sum_numpy, (coefs, Ar, br, cr, rows)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba disabled: both columns time the same fallback")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max |diff|':>13}")
    for name, fast, slow, a in cases(rng):
        tf, of = best_of(fast, a, args.repeat)
        ts, os_ = best_of(slow, a, args.repeat)
        diff = float(np.max(np.abs(np.asarray(of) - np.asarray(os_))))
        print(f"{name:<22}{tf * 1e3:>12.3f}{ts * 1e3:>12.3f}{ts / tf:>10.2f}{diff:>13.2e}")


if __name__ == "__main__":
    main()
