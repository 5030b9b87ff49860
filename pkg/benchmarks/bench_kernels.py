"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import sys
import time

import numpy as np

from talanov_nls import _pykernels

try:
    from talanov_nls import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    reduced = _pykernels.REDUCED
    full = _pykernels.FULL
    # (label, args for dopri_integrate)
    yield ("reduced, blow-up a0=-1", (reduced, np.array([-1.0, -1.0, 1.0]), 0.0, 1.0, 1e-9,
                                      1e-3, -1.0, 1e8, 10**7))
    yield ("reduced, relax a0=4 t=50", (reduced, np.array([-1.0, 4.0, 1.0]), 0.0, 50.0, 1e-12,
                                        1e-3, -1.0, 1e8, 10**7))
    yield ("full, t=1", (full, np.array([-1.0, 0.5, 0.3, 1.0, -0.2]), 0.0, 1.0, 1e-12, 1e-3,
                         -1.0, 1e8, 10**7))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1

    print(f"{'kernel':34s} {'steps':>7s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, a in cases():
        steps = _ckernels.dopri_integrate(*a)[3]
        tp = best_of(lambda: _pykernels.dopri_integrate(*a), args.repeat)
        tc = best_of(lambda: _ckernels.dopri_integrate(*a), args.repeat)
        print(f"{label:34s} {steps:7d} {1e3 * tp:12.2f} {1e3 * tc:12.2f} {tp / tc:8.1f}")

    rng = np.random.default_rng(0)
    n = 2**17
    phase = np.angle(np.exp(1j * np.cumsum(rng.uniform(-2, 2, n))))
    valid = rng.uniform(size=n) > 0.001
    tp = best_of(lambda: _pykernels.unwrap_segments(phase, valid), args.repeat)
    tc = best_of(lambda: _ckernels.unwrap_segments(phase, valid), args.repeat)
    label = f"unwrap_segments, {n} pts"
    print(f"{label:34s} {'':>7s} {1e3 * tp:12.2f} {1e3 * tc:12.2f} {tp / tc:8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
