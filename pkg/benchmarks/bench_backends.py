"""Time the compiled kernels against the numpy fallback on the same batches.

    python3 benchmarks/bench_backends.py --trials 2000
"""

import argparse
import time

import numpy as np

from brdsim import _fallback

try:
    from brdsim import _kernels
except ImportError:  # extension not built
    _kernels = None

CASES = [
    ("brd_batch", 10, 10, 0.0),
    ("brd_batch", 100, 100, 0.0),
    ("brd_batch", 400, 400, 0.05),
    ("brd_batch", 100, 100, 1.0),
    ("pne_count_batch", 10, 10, 0.5),
    ("pne_count_batch", 64, 64, 0.5),
]


def timed(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; nothing to compare")
        return 1
    seeds = _fallback.derive_seeds(args.seed, 0, 0, args.trials)
    print(f"{'kernel':<16} {'k_a':>5} {'k_b':>5} {'p':>5} {'cython s':>10} {'python s':>10} {'speedup':>8}")
    for name, k_a, k_b, p in CASES:
        t_c, out_c = timed(getattr(_kernels, name), seeds, k_a, k_b, p)
        t_p, out_p = timed(getattr(_fallback, name), seeds, k_a, k_b, p, repeat=1)
        same = all(np.array_equal(a, b) for a, b in zip(np.atleast_2d(out_c), np.atleast_2d(out_p)))
        if not same:
            raise SystemExit(f"{name} results differ between backends")
        print(f"{name:<16} {k_a:>5} {k_b:>5} {p:>5} {t_c:>10.4f} {t_p:>10.4f} {t_p / t_c:>7.0f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
