"""Bit-exact serialization: header, chunk metadata, page metadata, container.

All bit-packed components are LSB-first within bytes and zero padded to a
whole byte. Container framing fields are little-endian byte-aligned
integers::

    header(1 byte) | chunk_count u32 |
      per chunk: meta_len u32 | meta | page_count u16 |
        per page: page_len u32 | number_count u32 | page
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from . import delta as _delta
from . import modes as _modes
from .entropy import MAX_SIZE_LOG, MIN_SIZE_LOG, N_LANES
from .errors import CorruptMetadata, CorruptPage, UnsupportedVersion
from .kinds import NumberKind

FORMAT_VERSION = 1
BATCH_SIZE = 256
MAX_BATCHES = (1 << 16) - 1
MAX_PAGE_NUMBERS = MAX_BATCHES * BATCH_SIZE

_MODE_TAGS = {_modes.Classic: 0, _modes.IntMult: 1, _modes.FloatMult: 2, _modes.FloatQuant: 3}
_DELTA_TAGS = {_delta.NoDelta: 0, _delta.Consecutive: 1, _delta.Lookback: 2}


class BitWriter:
    def __init__(self):
        self._acc = 0
        self.bit_len = 0

    def write(self, value: int, nbits: int) -> None:
        if nbits == 0:
            return
        value = int(value)
        if value < 0 or value >> nbits:
            raise ValueError(f"value {value} does not fit in {nbits} bits")
        self._acc |= value << self.bit_len
        self.bit_len += nbits

    def to_bytes(self) -> bytes:
        return self._acc.to_bytes((self.bit_len + 7) // 8, "little")


class BitReader:
    def __init__(self, data: bytes, error=CorruptMetadata):
        self._acc = int.from_bytes(data, "little")
        self.total_bits = len(data) * 8
        self.pos = 0
        self._error = error

    def read(self, nbits: int) -> int:
        if self.pos + nbits > self.total_bits:
            raise self._error(f"unexpected end of data reading {nbits} bits at bit {self.pos}")
        value = (self._acc >> self.pos) & ((1 << nbits) - 1)
        self.pos += nbits
        return value

    def byte_pos(self) -> int:
        return (self.pos + 7) // 8


def offset_bits_width(latent_bits: int) -> int:
    """Width of the per-bin offset-bit-count field: ceil(log2(B + 1))."""
    return latent_bits.bit_length()


def bin_record_bits(latent_bits: int, size_log: int) -> int:
    """Exact serialized size of one bin record."""
    return latent_bits + offset_bits_width(latent_bits) + size_log


# ---------------------------------------------------------------- header

def write_header(version: int = FORMAT_VERSION) -> bytes:
    return bytes([version])


def parse_header(data: bytes, supported: int = FORMAT_VERSION) -> int:
    if len(data) < 1:
        raise CorruptMetadata("missing header")
    version = data[0]
    if version > supported:
        raise UnsupportedVersion(f"format version {version} is newer than supported version {supported}")
    return version


# ---------------------------------------------------------------- chunk meta

@dataclass
class VarMeta:
    size_log: int
    lowers: np.ndarray
    offset_bits: np.ndarray
    weights: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.lowers)

    def __eq__(self, other):
        return (isinstance(other, VarMeta) and self.size_log == other.size_log
                and np.array_equal(self.lowers, other.lowers)
                and np.array_equal(self.offset_bits, other.offset_bits)
                and np.array_equal(self.weights, other.weights))


@dataclass
class ChunkMeta:
    kind: NumberKind
    mode: _modes.Mode
    delta: _delta.DeltaEncoding
    vars: List[VarMeta] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return n_latent_vars(self.mode, self.delta)


def n_latent_vars(mode, delta_encoding) -> int:
    return mode.n_latent_vars + (1 if isinstance(delta_encoding, _delta.Lookback) else 0)


def _float_bits(value: float, kind: NumberKind) -> int:
    return int(np.array([value], dtype=kind.dtype).view(kind.latent_dtype)[0])


def _bits_float(bits: int, kind: NumberKind) -> float:
    return float(np.array([bits], dtype=kind.latent_dtype).view(kind.dtype)[0])


def write_chunk_meta(meta: ChunkMeta) -> bytes:
    kind = meta.kind
    b = kind.bits
    w = BitWriter()
    w.write(int(kind), 3)
    w.write(_MODE_TAGS[type(meta.mode)], 3)
    if isinstance(meta.mode, _modes.IntMult):
        w.write(meta.mode.m, b)
    elif isinstance(meta.mode, _modes.FloatMult):
        w.write(_float_bits(meta.mode.base, kind), b)
    elif isinstance(meta.mode, _modes.FloatQuant):
        w.write(meta.mode.k, 8)
    w.write(_DELTA_TAGS[type(meta.delta)], 2)
    if isinstance(meta.delta, _delta.Consecutive):
        w.write(meta.delta.order, 3)
    elif isinstance(meta.delta, _delta.Lookback):
        w.write(meta.delta.window - 1, 8)
    if len(meta.vars) != meta.n_vars:
        raise ValueError(f"expected {meta.n_vars} latent variables, got {len(meta.vars)}")
    ob_width = offset_bits_width(b)
    for var in meta.vars:
        w.write(var.size_log, 4)
        w.write(var.n_bins, 16)
        for lower, ob, weight in zip(var.lowers.tolist(), var.offset_bits.tolist(), var.weights.tolist()):
            w.write(lower, b)
            w.write(ob, ob_width)
            w.write(weight - 1, var.size_log)
    return w.to_bytes()


def parse_chunk_meta(data: bytes) -> ChunkMeta:
    r = BitReader(data, CorruptMetadata)
    kind_tag = r.read(3)
    if kind_tag > max(NumberKind):
        raise CorruptMetadata(f"unknown number kind tag {kind_tag}")
    kind = NumberKind(kind_tag)
    b = kind.bits
    mode_tag = r.read(3)
    try:
        if mode_tag == 0:
            mode = _modes.Classic()
        elif mode_tag == 1:
            mode = _modes.IntMult(r.read(b))
        elif mode_tag == 2:
            mode = _modes.FloatMult(_bits_float(r.read(b), kind))
        elif mode_tag == 3:
            mode = _modes.FloatQuant(r.read(8))
        else:
            raise CorruptMetadata(f"unknown mode tag {mode_tag}")
        _modes.validate_mode(mode, kind)
    except CorruptMetadata:
        raise
    except ValueError as e:
        raise CorruptMetadata(f"invalid mode: {e}") from None
    delta_tag = r.read(2)
    try:
        if delta_tag == 0:
            delta_encoding = _delta.NoDelta()
        elif delta_tag == 1:
            delta_encoding = _delta.Consecutive(r.read(3))
        elif delta_tag == 2:
            delta_encoding = _delta.Lookback(r.read(8) + 1)
        else:
            raise CorruptMetadata(f"unknown delta tag {delta_tag}")
    except CorruptMetadata:
        raise
    except ValueError as e:
        raise CorruptMetadata(f"invalid delta encoding: {e}") from None
    ob_width = offset_bits_width(b)
    variables = []
    for _ in range(n_latent_vars(mode, delta_encoding)):
        size_log = r.read(4)
        if not MIN_SIZE_LOG <= size_log <= MAX_SIZE_LOG:
            raise CorruptMetadata(f"ANS size log {size_log} out of range")
        n_bins = r.read(16)
        if not 1 <= n_bins <= (1 << size_log):
            raise CorruptMetadata(f"bin count {n_bins} invalid for table size {1 << size_log}")
        lowers, obs, weights = [], [], []
        for _ in range(n_bins):
            lowers.append(r.read(b))
            obs.append(r.read(ob_width))
            weights.append(r.read(size_log) + 1)
        if any(ob > b for ob in obs):
            raise CorruptMetadata("offset bit count exceeds latent width")
        if any(x >= y for x, y in zip(lowers, lowers[1:])):
            raise CorruptMetadata("bin lower bounds are not strictly increasing")
        if sum(weights) != 1 << size_log:
            raise CorruptMetadata("ANS weights do not sum to the table size")
        variables.append(VarMeta(size_log, np.array(lowers, dtype=kind.latent_dtype),
                                 np.array(obs, dtype=np.uint8), np.array(weights, dtype=np.int64)))
    return ChunkMeta(kind, mode, delta_encoding, variables)


# ---------------------------------------------------------------- page

@dataclass
class PageMeta:
    states: np.ndarray  # (n_vars, 4) absolute ANS states
    delta_state: np.ndarray
    n_batches: int

    def __eq__(self, other):
        return (isinstance(other, PageMeta) and np.array_equal(self.states, other.states)
                and np.array_equal(self.delta_state, other.delta_state)
                and self.n_batches == other.n_batches)


def n_batches_for(count: int) -> int:
    return -(-count // BATCH_SIZE)


def write_page(chunk: ChunkMeta, page: PageMeta, payload: bytes) -> bytes:
    """Page = page meta (padded to a byte) followed by the batch payload."""
    w = BitWriter()
    for var, states in zip(chunk.vars, page.states):
        table_size = 1 << var.size_log
        for s in states.tolist():
            w.write(s - table_size, var.size_log)
    for v in page.delta_state.tolist():
        w.write(v, chunk.kind.bits)
    w.write(page.n_batches, 16)
    return w.to_bytes() + payload


def parse_page(chunk: ChunkMeta, data: bytes, count: int) -> Tuple[PageMeta, bytes]:
    """Split a page into its metadata and batch payload."""
    if count < 1:
        raise CorruptPage("page must hold at least one number")
    if count > MAX_PAGE_NUMBERS:
        raise CorruptPage(f"page claims {count} numbers, more than the format allows")
    r = BitReader(data, CorruptPage)
    states = np.zeros((len(chunk.vars), N_LANES), np.int64)
    for i, var in enumerate(chunk.vars):
        table_size = 1 << var.size_log
        for lane in range(N_LANES):
            states[i, lane] = r.read(var.size_log) + table_size
    n_delta = _delta.n_state_values(chunk.delta)
    delta_state = np.array([r.read(chunk.kind.bits) for _ in range(n_delta)], dtype=chunk.kind.latent_dtype)
    n_batches = r.read(16)
    if n_batches != n_batches_for(count):
        raise CorruptPage(f"page has {n_batches} batches but {count} numbers")
    start = r.byte_pos()
    return PageMeta(states, delta_state, n_batches), data[start:]


# ---------------------------------------------------------------- container

@dataclass
class ContainerChunk:
    meta: bytes
    pages: List[Tuple[int, bytes]]  # (number_count, page bytes)


def write_container(chunks: List[ContainerChunk], version: int = FORMAT_VERSION) -> bytes:
    out = [write_header(version), struct.pack("<I", len(chunks))]
    for chunk in chunks:
        out.append(struct.pack("<I", len(chunk.meta)))
        out.append(chunk.meta)
        out.append(struct.pack("<H", len(chunk.pages)))
        for count, page in chunk.pages:
            out.append(struct.pack("<II", len(page), count))
            out.append(page)
    return b"".join(out)


def read_container(data: bytes) -> Tuple[int, List[ContainerChunk]]:
    version = parse_header(data)
    pos = 1

    def take(n, error):
        nonlocal pos
        if pos + n > len(data):
            raise error(f"container truncated at byte {pos}")
        piece = data[pos:pos + n]
        pos += n
        return piece

    (n_chunks,) = struct.unpack("<I", take(4, CorruptMetadata))
    chunks = []
    for _ in range(n_chunks):
        (meta_len,) = struct.unpack("<I", take(4, CorruptMetadata))
        meta = take(meta_len, CorruptMetadata)
        (n_pages,) = struct.unpack("<H", take(2, CorruptPage))
        pages = []
        for _ in range(n_pages):
            page_len, count = struct.unpack("<II", take(8, CorruptPage))
            pages.append((count, take(page_len, CorruptPage)))
        chunks.append(ContainerChunk(meta, pages))
    if pos != len(data):
        raise CorruptPage(f"{len(data) - pos} trailing bytes after last chunk")
    return version, chunks
