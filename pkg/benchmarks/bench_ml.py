"""Compare the compiled and pure-python Mittag-Leffler kernels.

Run:  python3 benchmarks/bench_ml.py [--repeats N]

Times ml_neg on batches that exercise all three evaluation regimes
(series, spectral-integral, asymptotic) and reports ns/point per lane
plus the worst relative disagreement between them.
"""

import argparse
import time

import numpy as np

from backflow import mittag
from backflow import _mlpure

try:
    from backflow import _mlcore
except ImportError:
    _mlcore = None


def run_case(kern, alpha, x, repeats):
    mittag._kern = kern
    mittag.ml_neg(alpha, x)
    t0 = time.perf_counter()
    for _ in range(repeats):
        vals = mittag.ml_neg(alpha, x)
    return (time.perf_counter() - t0) / repeats / x.size, vals


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--size", type=int, default=20000)
    args = ap.parse_args()

    if _mlcore is None:
        print("compiled kernels unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    cases = [
        ("series", 0.7, rng.uniform(0.0, 4.9, args.size)),
        ("integral", 0.7, rng.uniform(5.1, 14.9, args.size)),
        ("asymptotic", 0.7, 10.0 ** rng.uniform(1.3, 4.0, args.size)),
        ("mixed", 0.5, 10.0 ** rng.uniform(-2.0, 3.0, args.size)),
        ("mixed", 0.95, 10.0 ** rng.uniform(-2.0, 3.0, args.size)),
    ]
    saved = mittag._kern
    print(f"{'case':<12} {'alpha':<6} {'pure':>10} {'compiled':>10} "
          f"{'speedup':>8} {'mismatch':>10}")
    try:
        for name, alpha, x in cases:
            x = np.sort(x)
            tp, vp = run_case(_mlpure, alpha, x, args.repeats)
            tc, vc = run_case(_mlcore, alpha, x, args.repeats)
            rel = np.max(np.abs(vc - vp) / np.maximum(np.abs(vp), 1e-300))
            print(f"{name:<12} {alpha:<6} {tp*1e9:>8.0f}ns {tc*1e9:>8.0f}ns "
                  f"{tp/tc:>7.2f}x {rel:>10.2e}")
    finally:
        mittag._kern = saved


if __name__ == "__main__":
    main()
