"""Chunk/page compression and decompression.

Compression: choose mode, split into latent variables, delta-encode the
primary per page, bin every variable chunk-wide, then tANS-code bin indices
and write offsets batch by batch. Decompression runs the same steps in
reverse, one page at a time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from . import _accel
from . import delta as _delta
from . import format as fmt
from . import modes as _modes
from .binning import DEFAULT_LEVEL, assign_arrays, histogram_arrays, max_bins_for, optimize_arrays
from .entropy import AnsTables, ans_encode_reverse, build_ans, bytes_to_words, default_size_log, normalize_weights
from .errors import CorruptMetadata, CorruptPage, InvalidConfig
from .kinds import NumberKind

BATCH_SIZE = fmt.BATCH_SIZE
DEFAULT_PAGE_SIZE = 1 << 18
MAX_LEVEL = 12
MAX_CHUNK_NUMBERS = (1 << 32) - 1


@dataclass(frozen=True)
class CompressorConfig:
    level: int = DEFAULT_LEVEL
    mode: Optional[_modes.Mode] = None
    delta: Optional[_delta.DeltaEncoding] = None
    page_size: int = DEFAULT_PAGE_SIZE
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.level <= MAX_LEVEL:
            raise InvalidConfig(f"level must be in [0, {MAX_LEVEL}], got {self.level}")
        if not 1 <= self.page_size <= fmt.MAX_PAGE_NUMBERS:
            raise InvalidConfig(f"page_size must be in [1, {fmt.MAX_PAGE_NUMBERS}], got {self.page_size}")
        if not 0 <= self.seed < (1 << 64):
            raise InvalidConfig("seed must be a 64-bit unsigned value")

    def max_bins(self, n: int) -> int:
        return max_bins_for(self.level, n)


class Page(NamedTuple):
    count: int
    data: bytes


class CompressedChunk(NamedTuple):
    meta: bytes
    pages: List[Page]


def page_counts(n: int, page_size: int) -> List[int]:
    return [min(page_size, n - start) for start in range(0, n, page_size)]


def _bias(dtype):
    return dtype.type(1 << (dtype.itemsize * 8 - 1))


def _page_variables(primary, secondary, encoding, kind):
    """Delta-encode one page's primary; return (state, [variables]) with every
    variable padded to the page length."""
    n = len(primary)
    ldt = kind.latent_dtype
    state, transformed, extra = _delta.delta_encode(primary, encoding)
    pad = n - len(transformed)
    if pad:
        transformed = np.concatenate([transformed, np.full(pad, _bias(ldt), ldt)])
    variables = [transformed]
    if secondary is not None:
        variables.append(secondary)
    if extra is not None:
        variables.append(np.concatenate([extra, np.ones(n - len(extra), ldt)]))
    return state, variables


def _build_var_meta(values: np.ndarray, kind: NumberKind, max_bins: int) -> fmt.VarMeta:
    lowers, uppers, counts = histogram_arrays(values, max_bins)
    # the table size follows from the unoptimized bin count, so the per-bin
    # metadata cost used while merging is exact
    size_log = default_size_log(len(counts))
    meta_bits = fmt.bin_record_bits(kind.bits, size_log)
    lowers, offset_bits, counts = optimize_arrays(lowers, uppers, counts, meta_bits)
    weights = normalize_weights(counts, size_log)
    return fmt.VarMeta(size_log, lowers.astype(kind.latent_dtype), offset_bits.astype(np.uint8), weights)


def compress_chunk(numbers, kind: NumberKind, config: CompressorConfig = CompressorConfig()) -> CompressedChunk:
    """Compress ``numbers`` into chunk metadata plus independently decodable pages."""
    kind = NumberKind(kind)
    numbers = np.ascontiguousarray(numbers, dtype=kind.dtype)
    n = len(numbers)
    if n == 0:
        raise InvalidConfig("a chunk needs at least one number")
    if n > MAX_CHUNK_NUMBERS:
        raise InvalidConfig(f"a chunk holds at most {MAX_CHUNK_NUMBERS} numbers")
    counts = page_counts(n, config.page_size)
    if len(counts) > 0xFFFF:
        raise InvalidConfig("too many pages for one chunk; raise page_size")

    if config.mode is not None:
        mode = config.mode
        _modes.validate_mode(mode, kind)
    else:
        from .mode_detect import choose_mode

        mode = choose_mode(numbers, kind, config.seed)
    if config.delta is not None:
        encoding = config.delta
    else:
        encoding = _delta.choose_delta_encoding(numbers, mode, kind, config.seed, level=config.level)

    latents = _modes.split(numbers, mode, kind)
    page_states, page_vars = [], []
    start = 0
    for count in counts:
        end = start + count
        secondary = None if latents.secondary is None else latents.secondary[start:end]
        state, variables = _page_variables(latents.primary[start:end], secondary, encoding, kind)
        page_states.append(state)
        page_vars.append(variables)
        start = end

    n_vars = len(page_vars[0])
    max_bins = config.max_bins(n)
    var_metas = []
    for v in range(n_vars):
        values = np.concatenate([pv[v] for pv in page_vars]) if len(page_vars) > 1 else page_vars[0][v]
        var_metas.append(_build_var_meta(values, kind, max_bins))
    chunk = fmt.ChunkMeta(kind, mode, encoding, var_metas)
    tables = [build_ans(vm.weights, vm.size_log, normalized=True) for vm in var_metas]

    pages = []
    for count, state, variables in zip(counts, page_states, page_vars):
        payload, states = _encode_page_payload(variables, var_metas, tables)
        page_meta = fmt.PageMeta(states, state, fmt.n_batches_for(count))
        pages.append(Page(count, fmt.write_page(chunk, page_meta, payload)))
    return CompressedChunk(fmt.write_chunk_meta(chunk), pages)


def _encode_page_payload(variables, var_metas, tables):
    nv = len(variables)
    n = len(variables[0])
    codes = np.empty((nv, n), np.uint64)
    code_bits = np.empty((nv, n), np.uint8)
    offsets = np.empty((nv, n), np.uint64)
    offset_bits = np.empty((nv, n), np.uint8)
    states = np.empty((nv, fmt.N_LANES), np.int64)
    for v, (values, vm, tab) in enumerate(zip(variables, var_metas, tables)):
        idx, offs = assign_arrays(values, vm.lowers, vm.offset_bits)
        codes[v], code_bits[v], states[v] = ans_encode_reverse(idx, tab)
        offsets[v] = offs
        offset_bits[v] = vm.offset_bits[idx]
    words, total = _accel.kernels().write_payload(codes, code_bits, offsets, offset_bits, BATCH_SIZE)
    return words.view(np.uint8)[: (total + 7) // 8].tobytes(), states


class DecoderChunk:
    """Parsed chunk metadata plus the decode tables every page shares."""

    def __init__(self, meta: fmt.ChunkMeta):
        self.meta = meta

    @classmethod
    def from_bytes(cls, data: bytes) -> "DecoderChunk":
        return cls(fmt.parse_chunk_meta(data))

    @cached_property
    def tables(self) -> List[AnsTables]:
        return [build_ans(vm.weights, vm.size_log, normalized=True) for vm in self.meta.vars]

    @cached_property
    def _stacked(self):
        nv = len(self.meta.vars)
        table_size = max(1 << vm.size_log for vm in self.meta.vars)
        k_max = max(vm.n_bins for vm in self.meta.vars)
        dec_symbol = np.zeros((nv, table_size), np.int64)
        dec_bits = np.zeros((nv, table_size), np.uint8)
        dec_next = np.zeros((nv, table_size), np.int64)
        lowers = np.zeros((nv, k_max), np.uint64)
        offset_bits = np.zeros((nv, k_max), np.uint8)
        for v, (vm, tab) in enumerate(zip(self.meta.vars, self.tables)):
            size = tab.table_size
            dec_symbol[v, :size] = tab.dec_symbol
            dec_bits[v, :size] = tab.dec_bits
            dec_next[v, :size] = tab.dec_next
            lowers[v, :vm.n_bins] = vm.lowers
            offset_bits[v, :vm.n_bins] = vm.offset_bits
        size_logs = np.array([vm.size_log for vm in self.meta.vars], np.int64)
        return size_logs, dec_symbol, dec_bits, dec_next, lowers, offset_bits

    def decompress_page(self, data: bytes, count: int) -> np.ndarray:
        meta = self.meta
        kind = meta.kind
        page, payload = fmt.parse_page(meta, data, count)
        size_logs, dec_symbol, dec_bits, dec_next, lowers, offset_bits = self._stacked
        words = bytes_to_words(payload)
        out = np.zeros((len(meta.vars), count), np.uint64)
        states = page.states.copy()
        status = _accel.kernels().decode_payload(
            words, len(payload) * 8, count, BATCH_SIZE, states, size_logs,
            dec_symbol, dec_bits, dec_next, lowers, offset_bits, out)
        if status == 1:
            raise CorruptPage("page payload ended before all numbers were decoded")
        if status == 2:
            raise CorruptPage("tANS final states do not match; page is corrupt")
        out = out.astype(kind.latent_dtype)

        encoding = meta.delta
        n_trans = max(count - _delta.n_lost(encoding), 0)
        extra = out[-1, :n_trans] if isinstance(encoding, _delta.Lookback) else None
        primary = _delta.delta_decode(page.delta_state, out[0, :n_trans], extra, encoding, n=count)
        if len(primary) != count:
            raise CorruptPage("delta decoding produced the wrong number of latents")
        secondary = out[1] if meta.mode.n_latent_vars == 2 else None
        return _modes.join(_modes.LatentVars(primary, secondary), meta.mode, kind)


def decompress_page(chunk_meta, page_bytes: bytes, count: int) -> np.ndarray:
    """Decode one page given its chunk's metadata (bytes or a :class:`DecoderChunk`)."""
    if not isinstance(chunk_meta, DecoderChunk):
        chunk_meta = DecoderChunk.from_bytes(chunk_meta)
    return chunk_meta.decompress_page(page_bytes, count)


def decompress_chunk(meta: bytes, pages: Sequence) -> np.ndarray:
    """Decode every page of a chunk; ``pages`` holds ``(count, bytes)`` pairs."""
    chunk = DecoderChunk.from_bytes(meta)
    parts = [chunk.decompress_page(data, count) for count, data in pages]
    if not parts:
        return np.zeros(0, chunk.meta.kind.dtype)
    return np.concatenate(parts)


def inspect_chunk(meta: bytes) -> dict:
    """JSON-serializable description of a chunk's metadata."""
    chunk = fmt.parse_chunk_meta(meta)
    kind = chunk.kind
    names = ["primary"]
    if chunk.mode.n_latent_vars == 2:
        names.append("secondary")
    if isinstance(chunk.delta, _delta.Lookback):
        names.append("lookback")
    variables = []
    total = 0.0
    for name, vm in zip(names, chunk.vars):
        table_size = 1 << vm.size_log
        p = vm.weights / table_size
        est = float(np.sum(p * (-np.log2(p) + vm.offset_bits)))
        total += est
        variables.append({
            "name": name,
            "ans_size_log": vm.size_log,
            "bin_count": vm.n_bins,
            "estimated_bits_per_number": est,
            "bins": [{"lower": int(lo), "offset_bits": int(ob), "weight": int(w)}
                     for lo, ob, w in zip(vm.lowers.tolist(), vm.offset_bits.tolist(), vm.weights.tolist())],
        })
    mode = {"name": type(chunk.mode).__name__, "text": str(chunk.mode)}
    if isinstance(chunk.mode, _modes.IntMult):
        mode["m"] = chunk.mode.m
    elif isinstance(chunk.mode, _modes.FloatMult):
        mode["base"] = chunk.mode.base
    elif isinstance(chunk.mode, _modes.FloatQuant):
        mode["k"] = chunk.mode.k
    return {
        "kind": kind.name.lower(),
        "mode": mode,
        "delta": str(chunk.delta),
        "meta_bytes": len(meta),
        "estimated_bits_per_number": total,
        "variables": variables,
    }


# ---------------------------------------------------------------- whole arrays

def chunk_spans(n: int, config: CompressorConfig, chunk_size: Optional[int] = None):
    limit = min(0xFFFF * config.page_size, MAX_CHUNK_NUMBERS)
    size = limit if chunk_size is None else max(1, min(chunk_size, limit))
    return [(start, min(n, start + size)) for start in range(0, n, size)]


def compress_array(numbers, kind: NumberKind, config: CompressorConfig = CompressorConfig(),
                   chunk_size: Optional[int] = None) -> bytes:
    """Compress a whole array into a standalone container."""
    kind = NumberKind(kind)
    numbers = np.ascontiguousarray(numbers, dtype=kind.dtype)
    if len(numbers) == 0:
        raise InvalidConfig("nothing to compress: input is empty")
    chunks = []
    for start, end in chunk_spans(len(numbers), config, chunk_size):
        result = compress_chunk(numbers[start:end], kind, config)
        chunks.append(fmt.ContainerChunk(result.meta, [(p.count, p.data) for p in result.pages]))
    return fmt.write_container(chunks)


def decompress_array(data: bytes):
    """Inverse of :func:`compress_array`. Returns ``(numbers, kind)``."""
    _, chunks = fmt.read_container(data)
    if not chunks:
        raise CorruptMetadata("container holds no chunks")
    parts = []
    kind = None
    for chunk in chunks:
        decoder = DecoderChunk.from_bytes(chunk.meta)
        if kind is None:
            kind = decoder.meta.kind
        elif decoder.meta.kind != kind:
            raise CorruptMetadata("chunks disagree on number kind")
        if not chunk.pages:
            raise CorruptPage("chunk holds no pages")
        for count, page in chunk.pages:
            parts.append(decoder.decompress_page(page, count))
    return np.concatenate(parts), kind


def compressed_bits_per_number(data: bytes, n: int) -> float:
    return 8.0 * len(data) / n if n else math.nan
