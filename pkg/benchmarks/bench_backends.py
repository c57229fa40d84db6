"""Compare the numba and numpy backends on kernels and the full pipeline.

    python3 benchmarks/bench_backends.py --n 200000 --iters 5
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from latentpack import CompressorConfig, NumberKind, compress_array, decompress_array
from latentpack._accel import BACKENDS, kernels, use_backend
from latentpack.delta import NoDelta
from latentpack.modes import Classic


def _median_seconds(fn, iters):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(iters):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _datasets(n, seed):
    rng = np.random.default_rng(seed)
    return {
        "geometric_u64": (rng.geometric(0.001, n).astype(np.uint64), NumberKind.U64),
        "walk_i64": (np.cumsum(rng.integers(-50, 51, n)).astype(np.int64), NumberKind.I64),
        "prices_f64": (np.round(rng.lognormal(3, 1, n), 2), NumberKind.F64),
    }


def bench_kernels(n, iters, seed):
    x = np.random.default_rng(seed).geometric(0.001, n).astype(np.uint64)
    y = np.tile(np.random.default_rng(seed).integers(0, 2 ** 40, 64, dtype=np.uint64), n // 64 + 1)[:n]
    mib = x.nbytes / float(1 << 20)
    rows = []
    for name in BACKENDS:
        with use_backend(name):
            k = kernels()
            hist = _median_seconds(lambda: k.histogram(x.copy(), 256), iters)
            look = _median_seconds(lambda: k.choose_lookbacks(y, 256), max(1, iters // 2))
            rows.append((name, "histogram", mib / hist))
            rows.append((name, "lookback", mib / look))
    return rows


def bench_pipeline(n, iters, seed, fixed_modes):
    rows = []
    for label, (data, kind) in _datasets(n, seed).items():
        mib = data.nbytes / float(1 << 20)
        config = CompressorConfig(mode=Classic(), delta=NoDelta()) if fixed_modes else CompressorConfig()
        for name in BACKENDS:
            with use_backend(name):
                blob = compress_array(data, kind, config)
                c = _median_seconds(lambda: compress_array(data, kind, config), iters)
                d = _median_seconds(lambda: decompress_array(blob), iters)
            rows.append((name, label, mib / c, mib / d, data.nbytes / len(blob)))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--iters", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixed-modes", action="store_true", help="skip mode and delta detection")
    args = p.parse_args(argv)

    print(f"{'backend':8} {'kernel':12} {'MiB/s':>10}")
    for name, kernel, rate in bench_kernels(args.n, args.iters, args.seed):
        print(f"{name:8} {kernel:12} {rate:10.1f}")
    print()
    print(f"{'backend':8} {'dataset':14} {'comp MiB/s':>11} {'decomp MiB/s':>13} {'ratio':>7}")
    for name, label, c, d, ratio in bench_pipeline(args.n, args.iters, args.seed, args.fixed_modes):
        print(f"{name:8} {label:14} {c:11.1f} {d:13.1f} {ratio:7.3f}")


if __name__ == "__main__":
    main()
