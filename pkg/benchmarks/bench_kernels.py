"""Time the compiled and pure-Python kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--paths 8] [--steps 200000] [--states 2 10] [--trials 200000]
"""

import argparse
import time

import numpy as np

from semimarkov_lob import kernels


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=8)
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--states", type=int, nargs="+", default=[2, 10])
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    if len(backends) == 1:
        print("compiled extension not built; timing the Python fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<34}{'backend':<9}{'seconds':>10}{'speedup':>10}")
    for n in args.states:
        P = rng.random((n, n))
        P /= P.sum(axis=1, keepdims=True)
        x0 = np.zeros(args.paths, dtype=np.int64)
        for rows in (1, args.paths):
            u = rng.random((rows, args.steps))
            ref = None
            base = None
            for b in backends:
                out = kernels.sample_chains(P, x0[:rows], u, backend=b)
                if ref is None:
                    ref = out
                elif not np.array_equal(ref, out):
                    raise SystemExit(f"backends disagree for n={n}")
                t = _best_of(lambda: kernels.sample_chains(P, x0[:rows], u, backend=b), args.repeat)
                base = base or t
                label = f"sample_chains n={n} {rows}x{args.steps}"
                print(f"{label:<34}{b:<9}{t:>10.4f}{base / t:>9.1f}x")
    for n, p in ((1, 5), (5, 5)):
        base = None
        for b in backends:
            t = _best_of(lambda: kernels.race_up_counts(n, p, args.trials, 1, backend=b), args.repeat)
            base = base or t
            label = f"race_up_counts ({n},{p}) {args.trials}"
            print(f"{label:<34}{b:<9}{t:>10.4f}{base / t:>9.1f}x")


if __name__ == "__main__":
    main()
