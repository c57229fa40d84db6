"""Pure numpy/Python kernels; slow where the algorithm is sequential but
bit-identical to the numba backend."""
import numpy as np

NAME = "numpy"

HASH_LOG = 12
_HASH_MULT = 0x9E3779B97F4A7C15
_M64 = (1 << 64) - 1

OK = 0
EXHAUSTED = 1
BAD_FINAL_STATE = 2


def histogram(x, max_bins):
    n = len(x)
    k = min(max_bins, n)
    x.sort()
    lowers, uppers, counts = [], [], []
    pos = 0
    for i in range(1, k + 1):
        end = (i * n + k - 1) // k
        if end <= pos:
            continue
        v = x[end - 1]
        end = int(np.searchsorted(x, v, side="right"))
        lowers.append(x[pos])
        uppers.append(v)
        counts.append(end - pos)
        pos = end
    return (np.array(lowers, dtype=x.dtype), np.array(uppers, dtype=x.dtype),
            np.array(counts, dtype=np.int64))


def assign_bins(x, lowers, batch_size):
    idx = np.searchsorted(lowers, x, side="right").astype(np.int64) - 1
    offsets = (x - lowers[idx]).astype(np.uint64)
    return idx, offsets


def _hash(v):
    return ((v * _HASH_MULT) & _M64) >> (64 - HASH_LOG)


def choose_lookbacks(y, window):
    n = len(y)
    out = np.ones(max(n - 1, 0), np.int64)
    if n == 0:
        return out
    width = y.dtype.itemsize * 8
    shift = width // 4
    half = 1 << (width - 1)
    mask = (1 << width) - 1
    vals = y.tolist()
    size = 1 << HASH_LOG
    exact = [-1] * size
    bucket = [-1] * size

    def cost(a, b):
        d = (a - b) & mask
        if d >= half:
            d = mask - d
        return d.bit_length()

    exact[_hash(vals[0])] = 0
    bucket[_hash(vals[0] >> shift)] = 0
    for i in range(1, n):
        v = vals[i]
        top = v >> shift
        best_l = 1
        best_cost = cost(v, vals[i - 1])
        he = _hash(v)
        hb = _hash(top)
        j = exact[he]
        if j >= 0 and i - j <= window and vals[j] == v:
            c = cost(v, vals[j])
            if c < best_cost or (c == best_cost and i - j < best_l):
                best_cost, best_l = c, i - j
        j = bucket[hb]
        if j >= 0 and i - j <= window and (vals[j] >> shift) == top:
            c = cost(v, vals[j])
            if c < best_cost or (c == best_cost and i - j < best_l):
                best_cost, best_l = c, i - j
        out[i - 1] = best_l
        exact[he] = i
        bucket[hb] = i
    return out


def undo_lookbacks(out, deltas, lookbacks):
    dtype = out.dtype
    mask = (1 << (dtype.itemsize * 8)) - 1
    vals = [int(out[0])]
    d = deltas.tolist()
    for i, l in enumerate(lookbacks.tolist(), start=1):
        if l < 1 or l > i:
            return False
        vals.append((vals[i - l] + d[i - 1]) & mask)
    out[:] = np.array(vals, dtype=dtype)
    return True


def ans_encode(symbols, weights, enc_start, enc_slots, size_log):
    n = len(symbols)
    table_size = 1 << size_log
    codes = np.empty(n, np.uint64)
    code_bits = np.empty(n, np.uint8)
    states = [table_size] * 4
    syms = symbols.tolist()
    w_list = weights.tolist()
    starts = enc_start.tolist()
    slots = enc_slots.tolist()
    base_bits = [size_log - (w.bit_length() - 1) for w in w_list]
    code_list = [0] * n
    bit_list = [0] * n
    for i in range(n - 1, -1, -1):
        s = syms[i]
        w = w_list[s]
        lane = i & 3
        x = states[lane]
        nb = base_bits[s]
        if (x >> nb) < w:
            nb -= 1
        code_list[i] = x & ((1 << nb) - 1)
        bit_list[i] = nb
        states[lane] = table_size + slots[starts[s] + (x >> nb) - w]
    codes[:] = code_list
    code_bits[:] = bit_list
    return codes, code_bits, np.array(states, dtype=np.int64)


def _stream_order(n, nv, batch_size):
    """Index pairs (variable, position, is_offset) in payload order."""
    starts = np.arange(0, n, batch_size)
    pieces_v, pieces_i, pieces_o = [], [], []
    for start in starts:
        end = min(n, start + batch_size)
        r = np.arange(start, end)
        for v in range(nv):
            for is_off in (0, 1):
                pieces_v.append(np.full(len(r), v))
                pieces_i.append(r)
                pieces_o.append(np.full(len(r), is_off, dtype=bool))
    if not pieces_v:
        empty = np.zeros(0, np.int64)
        return empty, empty, np.zeros(0, bool)
    return np.concatenate(pieces_v), np.concatenate(pieces_i), np.concatenate(pieces_o)


def write_payload(codes, code_bits, offsets, offset_bits, batch_size):
    nv, n = codes.shape
    v, i, is_off = _stream_order(n, nv, batch_size)
    values = np.where(is_off, offsets[v, i], codes[v, i]).astype(np.uint64)
    nbits = np.where(is_off, offset_bits[v, i], code_bits[v, i]).astype(np.int64)
    # split values wider than 32 bits into two pieces so each piece touches
    # at most two words
    wide = nbits > 32
    lo_bits = np.where(wide, 32, nbits)
    hi_bits = np.where(wide, nbits - 32, 0)
    lo_vals = np.where(wide, values & np.uint64(0xFFFFFFFF), values)
    hi_vals = np.where(wide, values >> np.uint64(32), np.uint64(0))
    piece_vals = np.stack([lo_vals, hi_vals], axis=1).ravel()
    piece_bits = np.stack([lo_bits, hi_bits], axis=1).ravel()
    total = int(piece_bits.sum())
    pos = np.concatenate([[0], np.cumsum(piece_bits)[:-1]]).astype(np.int64)
    words = np.zeros(total // 64 + 2, np.uint64)
    keep = piece_bits > 0
    piece_vals, pos, piece_bits = piece_vals[keep], pos[keep], piece_bits[keep]
    w = pos >> 6
    s = (pos & 63).astype(np.uint64)
    np.bitwise_or.at(words, w, piece_vals << s)
    spill = (s + piece_bits.astype(np.uint64)) > np.uint64(64)
    np.bitwise_or.at(words, w[spill] + 1, piece_vals[spill] >> (np.uint64(64) - s[spill]))
    return words, total


def decode_payload(words, total_bits, n, batch_size, states, size_logs,
                   dec_symbol, dec_bits, dec_next, lowers, offset_bits, out):
    nv = out.shape[0]
    dtype = out.dtype
    mask = (1 << (dtype.itemsize * 8)) - 1
    wl = words.tolist() + [0, 0]

    def read(pos, nb):
        w = pos >> 6
        return ((wl[w] | (wl[w + 1] << 64)) >> (pos & 63)) & ((1 << nb) - 1)

    pos = 0
    sym_t = [row.tolist() for row in dec_symbol]
    bits_t = [row.tolist() for row in dec_bits]
    next_t = [row.tolist() for row in dec_next]
    low_t = [row.tolist() for row in lowers]
    ob_t = [row.tolist() for row in offset_bits]
    st = [row.tolist() for row in states]
    result = [[0] * n for _ in range(nv)]
    for start in range(0, n, batch_size):
        end = min(n, start + batch_size)
        for v in range(nv):
            table_size = 1 << int(size_logs[v])
            sv, bv, nxv, lane_states = sym_t[v], bits_t[v], next_t[v], st[v]
            bins = []
            for i in range(start, end):
                lane = i & 3
                slot = lane_states[lane] - table_size
                nb = bv[slot]
                if pos + nb > total_bits:
                    return EXHAUSTED
                lane_states[lane] = nxv[slot] + read(pos, nb)
                pos += nb
                bins.append(sv[slot])
            lo, ob, res = low_t[v], ob_t[v], result[v]
            for i, b in zip(range(start, end), bins):
                nb = ob[b]
                if pos + nb > total_bits:
                    return EXHAUSTED
                res[i] = (lo[b] + read(pos, nb)) & mask
                pos += nb
    for v in range(nv):
        out[v, :] = np.array(result[v], dtype=dtype)
        states[v, :] = st[v]
        table_size = 1 << int(size_logs[v])
        if any(s != table_size for s in st[v]):
            return BAD_FINAL_STATE
    return OK
