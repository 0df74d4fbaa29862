"""Compare the compiled and numpy kernel backends on representative workloads.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints best-of-``repeat`` wall times per backend and the speed-up, and
checks that both backends agree on each workload.
"""
import argparse
import math
import time

import numpy as np

from cspencer import bnb, kernels


def _cells(family, per_angle):
    return bnb.initial_cells(family, per_angle=per_angle)


def workloads():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    norm_fam = bnb.FormFamily.phases(A)
    rows = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rows /= np.abs(rows).max()
    disc_fam = bnb.FormFamily.phases(np.conj(rows))
    c_norm, h_norm = _cells(norm_fam, 256)
    c_disc, h_disc = _cells(disc_fam, 256)
    mats = rng.normal(size=(500, 3, 3)) + 1j * rng.normal(size=(500, 3, 3))
    bs = np.linspace(0.0, 1.0, 200)
    half = np.linspace(0.5, 1.0, 100)
    rs = np.concatenate([-half[::-1], half])
    gammas = 2.0 * math.pi * np.arange(400) / 400

    return {
        "cell_bounds sum-max (65536 cells)":
            lambda impl: kernels.cell_bounds(norm_fam.coef, norm_fam.kinds, c_norm, h_norm,
                                             kernels.MODE_SUM_MAX, impl=impl)[1],
        "cell_bounds max-min (65536 cells)":
            lambda impl: kernels.cell_bounds(disc_fam.coef, disc_fam.kinds, c_disc, h_disc,
                                             kernels.MODE_MAX_MIN, impl=impl)[1],
        "inf1_estimate_batch (500 x 3x3)":
            lambda impl: kernels.inf1_estimate_batch(mats, grid=24, iters=30, starts=4, impl=impl)[0],
        "trig_sweep (200 x 200 x 400)":
            lambda impl: np.array(kernels.trig_sweep(bs, rs, gammas, 1e-9, impl=impl)[:2], dtype=float),
    }


def best_time(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    py = kernels.backend("python")
    try:
        cy = kernels.backend("cython")
    except ImportError:
        cy = None
        print("compiled extension not available; timing the numpy backend only")
    print(f"{'workload':38s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speed-up':>9s} {'max diff':>10s}")
    for name, fn in workloads().items():
        tp, out_p = best_time(lambda: fn(py), args.repeat)
        if cy is None:
            print(f"{name:38s} {tp:10.4f}")
            continue
        tc, out_c = best_time(lambda: fn(cy), args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_p) - np.asarray(out_c))))
        print(f"{name:38s} {tp:10.4f} {tc:11.4f} {tp / tc:8.1f}x {diff:10.2e}")


if __name__ == "__main__":
    main()
