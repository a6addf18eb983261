"""Time the compiled decode kernels against the numpy fallback.

Both implementations ship with the package; import picks the compiled one
when it exists.  This script loads the two modules side by side, checks they
agree bit for bit on every input it times, and prints per-size medians plus
the speedup.  Decoding dominates prediction time (training spends its time
in the autodiff graph instead), so these two kernels are the only ones with
a compiled variant.

Usage: python bench/bench_kernels.py [--repeats 200] [--seed 0]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sylparse.kernels import pure

try:
    from sylparse.kernels import _speedups
except ImportError:
    _speedups = None


def median_runtime(fn, args, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def bench_case(name: str, args, repeats: int) -> tuple[str, float, float]:
    fast = getattr(_speedups, name)
    slow = getattr(pure, name)
    if not np.array_equal(fast(*args), slow(*args)):
        raise AssertionError(f"{name}: backends disagree on a benchmarked input")
    return median_runtime(slow, args, repeats), median_runtime(fast, args, repeats)


def viterbi_args(rng, n: int, num_tags: int):
    return (
        np.ascontiguousarray(rng.normal(size=(n, num_tags))),
        np.ascontiguousarray(rng.normal(size=num_tags)),
        np.ascontiguousarray(rng.normal(size=(num_tags, num_tags))),
        np.ascontiguousarray(rng.normal(size=num_tags)),
    )


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=200, help="timed runs per case (median reported)")
    ap.add_argument("--seed", type=int, default=0)
    opts = ap.parse_args()

    if _speedups is None:
        print("compiled kernels are not built; nothing to compare")
        return 1

    rng = np.random.default_rng(opts.seed)
    rows = []
    for n, num_tags in ((10, 3), (40, 3), (40, 30), (160, 30)):
        case = viterbi_args(rng, n, num_tags)
        rows.append((f"viterbi  n={n:<4} T={num_tags}", *bench_case("viterbi_decode", case, opts.repeats)))
    for n in (5, 20, 40, 80):
        scores = (np.ascontiguousarray(rng.normal(size=(n + 1, n + 1))),)
        rows.append((f"eisner   n={n}", *bench_case("eisner_decode", scores, opts.repeats)))

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'pure':>10}  {'compiled':>10}  {'speedup':>8}")
    for label, slow, fast in rows:
        print(f"{label:<{width}}  {slow * 1e6:>8.1f}us  {fast * 1e6:>8.1f}us  {slow / fast:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
