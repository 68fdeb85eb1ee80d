"""Compare the compiled and pure-Python event kernels.

Runs both backends on the same seeds, checks that the event arrays agree and
reports the best-of-``repeat`` wall time per outbreak.

    python3 benchmarks/bench_kernels.py --n 2000 20000 --reps 20
"""
import argparse
import time

import numpy as np

from epistoch import _kernels_py
from epistoch._rng import make_rng

try:
    from epistoch import _kernels
except ImportError:
    _kernels = None


def _gse(mod, n, seed):
    return mod.gse_events(make_rng(seed), n, 2.0, 1.0, 0.0, False)


def _household(mod, n, seed):
    sizes = np.full(n // 4, 4, dtype=np.int64)
    return mod.household_events(make_rng(seed), sizes, 1.0, 1.5, 1.0, -1)


def _time(fn, mod, n, reps, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for k in range(reps):
            fn(mod, n, (n, k))
        best = min(best, time.perf_counter() - t0)
    return best / reps


def _same(fn, n):
    a, b = fn(_kernels, n, (n, 0)), fn(_kernels_py, n, (n, 0))
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[1000, 10000])
    ap.add_argument("--reps", type=int, default=10, help="outbreaks per timing run")
    ap.add_argument("--repeat", type=int, default=3, help="timing runs; the best is kept")
    args = ap.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    print(f"{'kernel':<10} {'n':>8} {'cython ms':>10} {'python ms':>10} {'speedup':>8} same")
    for name, fn in (("gse", _gse), ("household", _household)):
        for n in args.n:
            fast = _time(fn, _kernels, n, args.reps, args.repeat)
            slow = _time(fn, _kernels_py, n, args.reps, args.repeat)
            print(f"{name:<10} {n:>8} {1e3 * fast:>10.3f} {1e3 * slow:>10.3f} {slow / fast:>8.1f} {_same(fn, n)}")


if __name__ == "__main__":
    main()
