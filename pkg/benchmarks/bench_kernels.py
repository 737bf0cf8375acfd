"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from randbasis._kernels import _numba as nbk
from randbasis._kernels import _numpy as npk

KEY = np.uint64(0x1234_5678_9ABC_DEF0)


def best_of(fn, repeat):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    out = np.empty(90_000)
    images = npk.shuffle(KEY, 0, 10_000)[0]
    return {
        "gaussians n=300 matrix (9e4)": lambda k: k.polar_fill(KEY, 0, out),
        "uniforms 9e4": lambda k: k.uniform_fill(KEY, 0, out),
        "shuffle n=1e4": lambda k: k.shuffle(KEY, 0, 10_000),
        "shuffle n=300": lambda k: k.shuffle(KEY, 0, 300),
        "cycle_count n=1e4": lambda k: k.cycle_count(images),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':32s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, fn in cases().items():
        t_np = best_of(lambda: fn(npk), args.repeat)
        t_nb = best_of(lambda: fn(nbk), args.repeat)
        print(f"{name:32s} {1e3 * t_np:10.3f} {1e3 * t_nb:10.3f} {t_np / t_nb:8.1f}")


if __name__ == "__main__":
    main()
