"""Timing comparison of the compiled and pure-python stepping kernels.

Both backends integrate the same initial profile over the same interval;
the runs are checked to take identical step counts and to agree on the
final profile before any timing is reported.

Usage:
    python3 benchmarks/bench_kernels.py [--cells 64 128 256 512] \
        [--t-end 0.1] [--repeats 5] [--alpha 1.0]
"""

import argparse
import time

import numpy as np

from coneflow import _kernels
from coneflow.flow import initial_profile
from coneflow.grid import build_grid
from coneflow.weight import eval_weight, weight_from_config

THETA_MAX = np.pi / 3


def time_backend(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, nargs="+",
                    default=[64, 128, 256, 512])
    ap.add_argument("--t-end", type=float, default=0.1)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--cfl", type=float, default=0.25)
    args = ap.parse_args()

    if not _kernels.HAVE_COMPILED:
        raise SystemExit("compiled backend not built; nothing to compare")

    w = weight_from_config({"kind": "power", "alpha": args.alpha,
                            "c1": args.alpha, "c2": args.alpha,
                            "c5": 0.5 ** args.alpha, "c6": 2.0 ** args.alpha})
    f_of_u = lambda u: eval_weight(w, u)

    print(f"alpha={args.alpha}  t_end={args.t_end}  cfl={args.cfl}  "
          f"best of {args.repeats}")
    print(f"{'cells':>6} {'steps':>8} {'compiled [s]':>13} "
          f"{'pure [s]':>10} {'speedup':>8}")
    for cells in args.cells:
        grid = build_grid(2, THETA_MAX, cells)
        phi0 = initial_profile(grid, {"kind": "cosine", "r0": 1.0,
                                      "eps": 0.05})
        common = (0.0, args.t_end, grid.n, grid.dtheta, grid.cot_theta,
                  args.cfl, 1e-6)

        def run_compiled():
            phi = phi0.copy()
            return phi, _kernels.compiled.advance(
                phi, *common, 0, args.alpha, 10 ** 8)

        def run_pure():
            phi = phi0.copy()
            return phi, _kernels.pure.advance(phi, *common, f_of_u, 10 ** 8)

        tc, (phi_c, res_c) = time_backend(run_compiled, args.repeats)
        tp, (phi_p, res_p) = time_backend(run_pure, args.repeats)
        assert res_c[3] == res_p[3] == 0, "backend hit the denominator floor"
        assert res_c[1] == res_p[1], "backends took different step counts"
        np.testing.assert_allclose(phi_c, phi_p, atol=1e-12)
        print(f"{cells:>6} {res_c[1]:>8} {tc:>13.4f} {tp:>10.4f} "
              f"{tp / tc:>8.2f}")


if __name__ == "__main__":
    main()
