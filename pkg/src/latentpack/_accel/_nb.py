"""numba kernels. Signatures and results mirror ``_np`` exactly."""
import numpy as np
from numba import njit

NAME = "numba"

_U64_1 = np.uint64(1)
_MASK32 = np.uint64(0xFFFFFFFF)
_HASH_MULT = np.uint64(0x9E3779B97F4A7C15)
HASH_LOG = 12

# decode status codes
OK = 0
EXHAUSTED = 1
BAD_FINAL_STATE = 2


@njit(nogil=True, cache=True, inline="always")
def _bitlen(x):
    x = np.uint64(x)
    n = 0
    if x >> np.uint64(32):
        x >>= np.uint64(32)
        n += 32
    if x >> np.uint64(16):
        x >>= np.uint64(16)
        n += 16
    if x >> np.uint64(8):
        x >>= np.uint64(8)
        n += 8
    if x >> np.uint64(4):
        x >>= np.uint64(4)
        n += 4
    if x >> np.uint64(2):
        x >>= np.uint64(2)
        n += 2
    if x >> np.uint64(1):
        x >>= np.uint64(1)
        n += 1
    return n + (1 if x else 0)


# ---------------------------------------------------------------- histogram

@njit(nogil=True, cache=True)
def _sorted_bins(x, k):
    n = len(x)
    lowers = np.empty(k, x.dtype)
    uppers = np.empty(k, x.dtype)
    counts = np.empty(k, np.int64)
    nb = 0
    pos = 0
    for i in range(1, k + 1):
        end = (i * n + k - 1) // k
        if end <= pos:
            continue
        v = x[end - 1]
        end = np.searchsorted(x, v, side="right")
        lowers[nb] = x[pos]
        uppers[nb] = v
        counts[nb] = end - pos
        nb += 1
        pos = end
    return lowers[:nb], uppers[:nb], counts[:nb]


def histogram(x, max_bins):
    """Equal-rank bins over ``x`` (sorted in place); runs of equal values
    never straddle a boundary. Returns (lowers, uppers, counts).

    numpy's vectorized sort beats a jitted one, so only the scan is compiled.
    """
    x.sort()
    return _sorted_bins(x, min(max_bins, len(x)))


# ---------------------------------------------------------------- bins

@njit(nogil=True, cache=True)
def assign_bins(x, lowers, batch_size):
    """Bin index per latent via a branchless binary tree walked depth-major
    across each batch."""
    n = len(x)
    k = len(lowers)
    idx = np.zeros(n, np.int64)
    offsets = np.empty(n, np.uint64)
    top = 1
    while top * 2 <= k:
        top *= 2
    for start in range(0, n, batch_size):
        end = min(n, start + batch_size)
        step = top
        while step >= 1:
            for i in range(start, end):
                c = idx[i] + step
                if c < k and x[i] >= lowers[c]:
                    idx[i] = c
            step >>= 1
        for i in range(start, end):
            offsets[i] = np.uint64(x[i] - lowers[idx[i]])
    return idx, offsets


# ---------------------------------------------------------------- lookback

@njit(nogil=True, cache=True, inline="always")
def _hash(v):
    return np.int64((np.uint64(v) * _HASH_MULT) >> np.uint64(64 - HASH_LOG))


@njit(nogil=True, cache=True, inline="always")
def _delta_cost(a, b, half, mask):
    d = (np.uint64(a) - np.uint64(b)) & mask
    if d >= half:
        d = mask - d
    return _bitlen(d)


@njit(nogil=True, cache=True)
def choose_lookbacks(y, window):
    """Per position i >= 1, the lookback among {1, last exact match, last
    match on the top 3/4 of the bits} whose delta has the fewest significant
    bits; ties go to the shorter lookback."""
    n = len(y)
    out = np.ones(max(n - 1, 0), np.int64)
    size = 1 << HASH_LOG
    exact = np.full(size, -1, np.int64)
    bucket = np.full(size, -1, np.int64)
    width = y.itemsize * 8
    shift = np.uint64(width // 4)
    half = _U64_1 << np.uint64(width - 1)
    mask = half | (half - _U64_1)
    if n == 0:
        return out
    exact[_hash(y[0])] = 0
    bucket[_hash(np.uint64(y[0]) >> shift)] = 0
    for i in range(1, n):
        v = y[i]
        top = np.uint64(v) >> shift
        best_l = 1
        best_cost = _delta_cost(v, y[i - 1], half, mask)
        he = _hash(v)
        hb = _hash(top)
        j = exact[he]
        if j >= 0 and i - j <= window and y[j] == v:
            cost = _delta_cost(v, y[j], half, mask)
            l = i - j
            if cost < best_cost or (cost == best_cost and l < best_l):
                best_cost = cost
                best_l = l
        j = bucket[hb]
        if j >= 0 and i - j <= window and (np.uint64(y[j]) >> shift) == top:
            cost = _delta_cost(v, y[j], half, mask)
            l = i - j
            if cost < best_cost or (cost == best_cost and l < best_l):
                best_cost = cost
                best_l = l
        out[i - 1] = best_l
        exact[he] = i
        bucket[hb] = i
    return out


@njit(nogil=True, cache=True)
def undo_lookbacks(out, deltas, lookbacks):
    for i in range(1, len(out)):
        l = lookbacks[i - 1]
        if l < 1 or l > i:
            return False
        out[i] = out[i - l] + deltas[i - 1]
    return True


# ---------------------------------------------------------------- tANS

@njit(nogil=True, cache=True)
def ans_encode(symbols, weights, enc_start, enc_slots, size_log):
    """Encode in reverse with four interleaved lanes (lane = i % 4).

    Returns per-symbol code values and bit counts in forward order plus the
    final encoder states, which are the decoder's initial states.
    """
    n = len(symbols)
    table_size = np.int64(1) << size_log
    codes = np.empty(n, np.uint64)
    code_bits = np.empty(n, np.uint8)
    states = np.full(4, table_size, np.int64)
    for i in range(n - 1, -1, -1):
        s = symbols[i]
        w = weights[s]
        lane = i & 3
        x = states[lane]
        nb = size_log - (_bitlen(w) - 1)
        if (x >> nb) < w:
            nb -= 1
        codes[i] = np.uint64(x & ((np.int64(1) << nb) - 1))
        code_bits[i] = nb
        states[lane] = table_size + enc_slots[enc_start[s] + (x >> nb) - w]
    return codes, code_bits, states


# ---------------------------------------------------------------- bit io

@njit(nogil=True, cache=True, inline="always")
def _write(words, pos, value, nbits):
    if nbits == 0:
        return pos
    w = pos >> 6
    s = np.uint64(pos & 63)
    v = np.uint64(value)
    words[w] |= v << s
    if s + np.uint64(nbits) > np.uint64(64):
        words[w + 1] |= v >> (np.uint64(64) - s)
    return pos + nbits


@njit(nogil=True, cache=True)
def write_payload(codes, code_bits, offsets, offset_bits, batch_size):
    """Pack batches: for each latent variable, the batch's tANS codes, then
    its offsets. Returns (little-endian words, bit length)."""
    nv, n = codes.shape
    total = 0
    for v in range(nv):
        for i in range(n):
            total += np.int64(code_bits[v, i]) + np.int64(offset_bits[v, i])
    words = np.zeros(total // 64 + 2, np.uint64)
    pos = 0
    for start in range(0, n, batch_size):
        end = min(n, start + batch_size)
        for v in range(nv):
            for i in range(start, end):
                pos = _write(words, pos, codes[v, i], np.int64(code_bits[v, i]))
            for i in range(start, end):
                nb = np.int64(offset_bits[v, i])
                val = offsets[v, i]
                if nb > 32:
                    pos = _write(words, pos, val & _MASK32, 32)
                    pos = _write(words, pos, val >> np.uint64(32), nb - 32)
                else:
                    pos = _write(words, pos, val, nb)
    return words, pos


@njit(nogil=True, cache=True, inline="always")
def _window(words, pos):
    """The 64 bits starting at bit ``pos``; needs one word of slack after it."""
    sh = pos & 63
    w = pos >> 6
    # two-step shift keeps the sh == 0 case defined
    return (words[w] >> np.uint64(sh)) | ((words[w + 1] << np.uint64(63 - sh)) << _U64_1)


@njit(nogil=True, cache=True, inline="always")
def _low_mask(nbits):
    if nbits >= 64:
        return ~np.uint64(0)
    return (_U64_1 << np.uint64(nbits)) - _U64_1


@njit(nogil=True, cache=True)
def decode_payload(words, total_bits, n, batch_size, states, size_logs,
                   dec_symbol, dec_bits, dec_next, lowers, offset_bits, out):
    """Inverse of ``write_payload`` fused with tANS decoding and offset
    addition. ``out`` (nv x n, latent dtype) is filled in place.

    ``words`` must carry at least two words of zero padding. Exhaustion is
    checked once per batch section; reads in between stay inside the padding
    via the ``limit`` guard.
    """
    nv = out.shape[0]
    bins = np.empty(batch_size, np.int64)
    pos = 0
    limit = (words.shape[0] - 2) * 64
    for start in range(0, n, batch_size):
        end = min(n, start + batch_size)
        for v in range(nv):
            table_size = np.int64(1) << size_logs[v]
            sym, bits, nxt, st = dec_symbol[v], dec_bits[v], dec_next[v], states[v]
            low, obits, o = lowers[v], offset_bits[v], out[v]
            for i in range(start, end):
                lane = i & 3
                slot = st[lane] - table_size
                nb = np.int64(bits[slot])
                st[lane] = nxt[slot] + np.int64(_window(words, pos) & _low_mask(nb))
                pos += nb
                bins[i - start] = sym[slot]
                if pos > limit:
                    return EXHAUSTED
            for i in range(start, end):
                b = bins[i - start]
                nb = np.int64(obits[b])
                o[i] = low[b] + (_window(words, pos) & _low_mask(nb))
                pos += nb
                if pos > limit:
                    return EXHAUSTED
            if pos > total_bits:
                return EXHAUSTED
    for v in range(nv):
        table_size = np.int64(1) << size_logs[v]
        for lane in range(4):
            if states[v, lane] != table_size:
                return BAD_FINAL_STATE
    return OK
