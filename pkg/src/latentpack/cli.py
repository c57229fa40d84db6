"""Command-line interface: compress, decompress, inspect, bench, synth."""
from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import delta as _delta
from . import format as fmt
from . import modes as _modes
from . import theory
from .errors import CorruptLatents, CorruptMetadata, CorruptPage, CorruptState, InvalidConfig, LatentpackError, UnsupportedVersion
from .kinds import NumberKind
from .pipeline import CompressorConfig, compress_array, decompress_array, inspect_chunk

EXIT_USAGE = 1
EXIT_CORRUPT = 2
_CORRUPT = (CorruptMetadata, CorruptPage, CorruptLatents, CorruptState, UnsupportedVersion)
_MIB = float(1 << 20)


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as f:
        return f.read()


def _write(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as f:
            f.write(data)


def _load_raw(path: str, kind: NumberKind) -> np.ndarray:
    raw = _read(path)
    width = kind.bits // 8
    if len(raw) == 0:
        raise InvalidConfig("input is empty")
    if len(raw) % width:
        raise InvalidConfig(f"input length {len(raw)} is not a multiple of {width} bytes for {kind.name.lower()}")
    return np.frombuffer(raw, dtype=kind.dtype)


def _config(args) -> CompressorConfig:
    return CompressorConfig(
        level=args.level,
        mode=_modes.parse_mode(args.mode) if args.mode else None,
        delta=_delta.parse_delta(args.delta) if args.delta else None,
        page_size=args.page_size,
        seed=args.seed,
    )


def cmd_compress(args) -> int:
    kind = NumberKind.parse(args.kind)
    numbers = _load_raw(args.input, kind)
    config = _config(args)
    start = time.perf_counter()
    blob = compress_array(numbers, kind, config)
    elapsed = time.perf_counter() - start
    _write(args.output, blob)
    summary = (f"ratio={numbers.nbytes / len(blob):.4f} "
               f"bits_per_num={8.0 * len(blob) / len(numbers):.4f} seconds={elapsed:.4f}")
    print(summary, file=sys.stderr if args.output == "-" else sys.stdout)
    return 0


def cmd_decompress(args) -> int:
    numbers, _ = decompress_array(_read(args.input))
    _write(args.output, numbers.tobytes())
    return 0


def cmd_inspect(args) -> int:
    _, chunks = fmt.read_container(_read(args.input))
    report = {
        "chunks": [dict(inspect_chunk(c.meta), pages=[count for count, _ in c.pages]) for c in chunks],
    }
    print(json.dumps(report, indent=2))
    return 0


def _bench_once(numbers, kind, config):
    t0 = time.perf_counter()
    blob = compress_array(numbers, kind, config)
    t1 = time.perf_counter()
    out, _ = decompress_array(blob)
    t2 = time.perf_counter()
    if out.tobytes() != numbers.tobytes():
        raise CorruptState("benchmark round trip mismatch")
    return t1 - t0, t2 - t1, len(blob)


def cmd_bench(args) -> int:
    if args.iters < 3:
        raise InvalidConfig("bench needs at least 3 iterations")
    if args.threads < 1:
        raise InvalidConfig("threads must be at least 1")
    kind = NumberKind.parse(args.kind)
    numbers = _load_raw(args.input, kind)
    config = _config(args)
    _bench_once(numbers, kind, config)  # warm-up, also triggers JIT compilation
    mib = numbers.nbytes / _MIB

    def stream(_):
        return [_bench_once(numbers, kind, config) for _ in range(args.iters)]

    if args.threads == 1:
        results = [stream(0)]
    else:
        with ThreadPoolExecutor(args.threads) as pool:
            results = list(pool.map(stream, range(args.threads)))
    for t, runs in enumerate(results):
        c_med = statistics.median(r[0] for r in runs)
        d_med = statistics.median(r[1] for r in runs)
        print(f"thread={t} compress_mib_s={mib / c_med:.2f} decompress_mib_s={mib / d_med:.2f} "
              f"ratio={numbers.nbytes / runs[0][2]:.4f} iters={args.iters}")
    return 0


def cmd_synth(args) -> int:
    dist = theory.parse_dist(args.dist)
    numbers = theory.generate(dist, args.n, args.seed)
    if args.convergence:
        levels = [int(v) for v in args.levels.split(",")]
        csv_text = theory.report_csv(theory.convergence_report(numbers, levels, s=args.s))
        if args.output == "-":
            sys.stdout.write(csv_text)
        else:
            _write(args.output, csv_text.encode())
    else:
        _write(args.output, numbers.astype("<u8").tobytes())
    return 0


def _add_codec_flags(p, kind_required=True):
    p.add_argument("--kind", required=kind_required, choices=[k.name.lower() for k in NumberKind])
    p.add_argument("--level", type=int, default=8)
    p.add_argument("--mode", help="classic, intmult:M, floatmult:BASE or floatquant:K")
    p.add_argument("--delta", help="none, consecutive:ORDER or lookback[:WINDOW]")
    p.add_argument("--page-size", type=int, default=1 << 18)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latentpack", description="Lossless numerical compression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress a raw little-endian array")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_codec_flags(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="restore the raw array from a container")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("inspect", help="print chunk metadata as JSON")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("bench", help="median compress/decompress throughput")
    p.add_argument("--input", required=True)
    p.add_argument("--iters", type=int, default=5)
    p.add_argument("--threads", type=int, default=1)
    _add_codec_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="generate synthetic u64 data or a convergence report")
    p.add_argument("--dist", required=True, help="geometric:P, lomax[:SHAPE[:SCALE]], uniform:LO:HI, mix:...")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="-")
    p.add_argument("--convergence", action="store_true", help="emit a CSV convergence report instead of data")
    p.add_argument("--levels", default="4,6,8")
    p.add_argument("--s", type=int, default=1, help="monotone piece count used for the bound")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CORRUPT as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CORRUPT
    except (LatentpackError, ValueError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
