"""Time the float K4-weight sweep: numba kernel against the pure-numpy fallback.

    python3 benchmarks/bench_sweep.py [--n 33] [--repeat 3] [--graph complete-minus-matching]

The numba timing excludes the first (compiling) call; both backends must agree
to within 1e-12 on every weight or the script exits nonzero.
"""

import argparse
import sys
import time

import numpy as np

from k4frac import _accel
from k4frac.generators import complete_minus_matching, random_min_degree
from k4frac.kernels import k4_weight_sweep


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=33)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--graph", choices=("complete-minus-matching", "random-min-degree"),
                    default="complete-minus-matching")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    if args.graph == "complete-minus-matching":
        g = complete_minus_matching(args.n)
    else:
        g = random_min_degree(args.n, args.n - 2, args.seed)
    print(f"graph: {args.graph} n={g.n} edges={g.num_edges}")

    k4s, ref = k4_weight_sweep(g, backend="numpy")
    t_numpy = best_of(lambda: k4_weight_sweep(g, backend="numpy"), args.repeat)
    print(f"K4s: {len(k4s)}  min weight {ref.min():.6g}")
    print(f"numpy  best of {args.repeat}: {t_numpy:8.3f} s")

    if not _accel.HAS_NUMBA:
        print("numba  unavailable (not installed or K4FRAC_DISABLE_NUMBA set)")
        return 0
    t = time.perf_counter()
    _, first = k4_weight_sweep(g, backend="numba")
    print(f"numba  first call (includes compile or cache load): {time.perf_counter() - t:8.3f} s")
    t_numba = best_of(lambda: k4_weight_sweep(g, backend="numba"), args.repeat)
    print(f"numba  best of {args.repeat}: {t_numba:8.3f} s   speedup x{t_numpy / t_numba:.2f}")
    gap = float(np.max(np.abs(first - ref)))
    print(f"max |numba - numpy| = {gap:.3e}")
    return 0 if gap <= 1e-12 else 1


if __name__ == "__main__":
    sys.exit(main())
