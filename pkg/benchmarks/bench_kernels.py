"""Compare the compiled chain kernel with the pure-Python engine.

    python benchmarks/bench_kernels.py [--iterations N]

Both backends run the same seeded chain, so the script also reports the
largest difference between their recorded states.
"""

import argparse
import time

import numpy as np

from scalemix import GIG, ChainConfig, Gamma, InvertedGamma, RegressionData, run_chain
from scalemix import _backend


def problem(n, p, d, seed=0):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))])
    y = X @ rng.normal(size=(p, d)) + rng.standard_t(4, size=(n, d))
    return RegressionData(y, X, (d + 1) / 2)


def timed(cfg, backend):
    t0 = time.perf_counter()
    out = run_chain(cfg, backend=backend)
    return time.perf_counter() - t0, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--iterations", type=int, default=5000)
    args = parser.parse_args()
    if _backend.kernels is None:
        print("compiled kernel unavailable; only the Python engine would run")
        return
    cases = [
        ("n=10 p=2 d=2", problem(10, 2, 2)),
        ("n=50 p=3 d=3", problem(50, 3, 3)),
        ("n=200 p=5 d=2", problem(200, 5, 2)),
    ]
    families = [Gamma(3.0, 3.0), InvertedGamma(3.0, 1.0), GIG(1.0, 1.0, 1.0)]
    print(f"{'problem':>15} {'family':>15} {'algo':>5} {'python s':>9} "
          f"{'compiled s':>10} {'speedup':>8} {'max diff':>9}")
    for label, data in cases:
        for h in families:
            for algo in ("da", "pxda"):
                cfg = ChainConfig(data, h, args.iterations, seed=1, algo=algo)
                tp, a = timed(cfg, "python")
                tc, b = timed(cfg, "compiled")
                diff = float(np.max(np.abs(a.flat() - b.flat())))
                print(f"{label:>15} {h.family:>15} {algo:>5} {tp:9.3f} {tc:10.4f} "
                      f"{tp / tc:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
