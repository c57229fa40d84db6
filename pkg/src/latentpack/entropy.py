"""Table-based ANS (tANS) for bin indices.

Symbols are encoded last-to-first so the decoder runs forward. Four lanes
are interleaved: symbol ``i`` uses lane ``i % 4``. The encoder starts every
lane at state ``table_size``; its final states are what the decoder needs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import CorruptPage, InvalidConfig

N_LANES = 4
MIN_SIZE_LOG = 1
MAX_SIZE_LOG = 14


def default_size_log(n_bins: int) -> int:
    """Table size for a bin count: ~4 slots per bin, within [2^4, 2^12]."""
    need = max(int(n_bins) - 1, 0).bit_length()  # ceil(log2(n_bins))
    return min(max(need + 2, 4), 12)


def normalize_weights(counts, size_log: int) -> np.ndarray:
    """Scale positive counts to integers >= 1 summing to ``2**size_log``.

    Largest-remainder apportionment; when the floor of 1 overshoots, weight is
    taken back from whichever symbol loses the fewest expected bits.
    """
    counts = np.asarray(counts, dtype=np.float64)
    table_size = 1 << size_log
    if len(counts) == 0 or np.any(counts <= 0):
        raise InvalidConfig("every symbol needs a positive count")
    if len(counts) > table_size:
        raise InvalidConfig(f"{len(counts)} symbols do not fit a table of size {table_size}")
    ideal = counts * (table_size / counts.sum())
    weights = np.maximum(np.floor(ideal).astype(np.int64), 1)
    diff = table_size - int(weights.sum())
    if diff > 0:
        order = np.lexsort((np.arange(len(ideal)), -(ideal - np.floor(ideal))))
        weights[order[:diff]] += 1
    while diff < 0:
        loss = np.where(weights > 1, counts * np.log2(weights / np.maximum(weights - 1, 1)), np.inf)
        j = int(np.argmin(loss))
        weights[j] -= 1
        diff += 1
    top = int(np.argmax(counts))
    if weights[top] != weights.max():
        # keep the heaviest symbol heaviest
        other = int(np.argmax(weights))
        weights[top], weights[other] = weights[other], weights[top]
    return weights


def spread_step(size_log: int) -> int:
    table_size = 1 << size_log
    return ((table_size * 5) >> 3) + 3 | 1  # odd, hence coprime to the table size


@dataclass(frozen=True)
class AnsTables:
    size_log: int
    weights: np.ndarray
    # decode side, indexed by slot (state - table_size)
    dec_symbol: np.ndarray
    dec_bits: np.ndarray
    dec_next: np.ndarray
    # encode side: slot for x in [w_s, 2 w_s) at enc_slots[enc_start[s] + x - w_s]
    enc_start: np.ndarray
    enc_slots: np.ndarray

    @property
    def table_size(self) -> int:
        return 1 << self.size_log

    @property
    def n_symbols(self) -> int:
        return len(self.weights)


def build_ans(weights, size_log: int, normalized: bool = False) -> AnsTables:
    """Build coding tables. ``weights`` are raw counts unless ``normalized``."""
    if not MIN_SIZE_LOG <= size_log <= MAX_SIZE_LOG:
        raise InvalidConfig(f"size_log {size_log} outside [{MIN_SIZE_LOG}, {MAX_SIZE_LOG}]")
    table_size = 1 << size_log
    if normalized:
        weights = np.asarray(weights, dtype=np.int64)
        if len(weights) == 0 or weights.min() < 1 or int(weights.sum()) != table_size:
            raise InvalidConfig("normalized weights must be >= 1 and sum to the table size")
    else:
        weights = normalize_weights(weights, size_log)

    step = spread_step(size_log)
    mask = table_size - 1
    dec_symbol = np.empty(table_size, np.int64)
    pos = 0
    for s, w in enumerate(weights.tolist()):
        for _ in range(w):
            dec_symbol[pos] = s
            pos = (pos + step) & mask

    enc_start = np.concatenate([[0], np.cumsum(weights)[:-1]]).astype(np.int64)
    enc_slots = np.empty(table_size, np.int64)
    dec_bits = np.empty(table_size, np.int64)
    dec_next = np.empty(table_size, np.int64)
    next_x = weights.copy()
    for slot in range(table_size):
        s = dec_symbol[slot]
        x = int(next_x[s])
        next_x[s] += 1
        nb = size_log - (x.bit_length() - 1)
        dec_bits[slot] = nb
        dec_next[slot] = x << nb
        enc_slots[enc_start[s] + x - weights[s]] = slot
    return AnsTables(size_log, weights, dec_symbol, dec_bits.astype(np.uint8), dec_next,
                     enc_start, enc_slots)


def ans_encode_reverse(symbols, tables: AnsTables):
    """Returns (codes, code_bits, states): per-symbol code values and widths in
    forward order, and the four decoder initial states."""
    symbols = np.asarray(symbols, dtype=np.int64)
    if len(symbols) and (symbols.min() < 0 or symbols.max() >= tables.n_symbols):
        raise InvalidConfig("symbol outside the table")
    return _accel.kernels().ans_encode(symbols, tables.weights, tables.enc_start,
                                       tables.enc_slots, tables.size_log)


def ans_encode(symbols, tables: AnsTables):
    """Standalone bitstream of tANS codes only: (payload bytes, states)."""
    codes, code_bits, states = ans_encode_reverse(symbols, tables)
    n = len(codes)
    zeros64 = np.zeros((1, n), np.uint64)
    words, total = _accel.kernels().write_payload(codes[None, :], code_bits[None, :], zeros64,
                                                  np.zeros((1, n), np.uint8), max(n, 1))
    return words.view(np.uint8)[: (total + 7) // 8].tobytes(), states


def ans_decode(payload: bytes, states, count: int, tables: AnsTables) -> np.ndarray:
    """Decode ``count`` symbols from a payload produced by :func:`ans_encode`."""
    words = bytes_to_words(payload)
    st = np.array(states, dtype=np.int64).reshape(1, N_LANES)
    if np.any((st < tables.table_size) | (st >= 2 * tables.table_size)):
        raise CorruptPage("tANS state out of range")
    out = np.zeros((1, count), np.uint64)
    lowers = np.arange(tables.n_symbols, dtype=np.uint64)[None, :]
    status = _accel.kernels().decode_payload(
        words, len(payload) * 8, count, max(count, 1), st, np.array([tables.size_log]),
        tables.dec_symbol[None, :], tables.dec_bits[None, :], tables.dec_next[None, :],
        lowers, np.zeros((1, tables.n_symbols), np.uint8), out)
    if status == 1:
        raise CorruptPage("tANS bitstream exhausted")
    if status == 2:
        raise CorruptPage("tANS final states do not match")
    return out[0].astype(np.int64)


def bytes_to_words(data: bytes) -> np.ndarray:
    """Little-endian uint64 view of ``data`` with two words of zero padding."""
    n_words = len(data) // 8 + 3
    buf = np.zeros(n_words * 8, np.uint8)
    buf[: len(data)] = np.frombuffer(data, np.uint8)
    return buf.view("<u8").astype(np.uint64)
