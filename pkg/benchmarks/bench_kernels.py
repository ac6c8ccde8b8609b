"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--size 20000]

The first numba call (compilation or cache load) is excluded from timing.
"""

import argparse
import timeit

import numpy as np

from ngramfd._kernels import jit_impl, numpy_impl


def cases(size, k, rng):
    sizes = rng.integers(1, k + 1, size=size)
    mask = np.arange(k)[None, :] < sizes[:, None]
    W = rng.gamma(1.0, size=(size, k)) * mask
    W /= W.sum(axis=1, keepdims=True)
    F = rng.integers(0, 1000, size=(size, k)).astype(np.float64) * mask
    P = rng.integers(0, 50, size=(size - 1, k, k)).astype(np.float64)
    D = numpy_impl.hull_delta1(W, F, sizes)
    ids = rng.integers(0, 5000, size=size * 20)
    offsets = np.arange(0, ids.size + 1, 20)
    return {
        "window_codes": lambda m: m.window_codes(ids, offsets, 3, 5000),
        "hull_delta1": lambda m: m.hull_delta1(W, F, sizes),
        "hull_delta2": lambda m: m.hull_delta2(W, P, sizes),
        "hull_update": lambda m: m.hull_update(W, D, sizes, 10.0),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=20000, help="positions per call")
    ap.add_argument("--k", type=int, default=16, help="candidates per position")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    impls = {"numpy": numpy_impl}
    if jit_impl is not None:
        impls["numba"] = jit_impl
    print(f"{'kernel':<14}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for name, fn in cases(args.size, args.k, rng).items():
        times = {}
        for label, mod in impls.items():
            ref = fn(mod)  # warm-up / compile
            times[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
            if label == "numba":
                assert np.allclose(ref, fn(numpy_impl), atol=1e-9), name
        speed = f"{times['numpy'] / times['numba']:.1f}x" if "numba" in times else "-"
        print(f"{name:<14}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values()) + f"{speed:>10}")


if __name__ == "__main__":
    main()
