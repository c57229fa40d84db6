"""Histogram binning of latents and cost-optimal merging of adjacent bins."""
from __future__ import annotations

import math
from typing import List, NamedTuple, Sequence

import numpy as np

from . import _accel
from .errors import CorruptState

BATCH_SIZE = 256
DEFAULT_LEVEL = 8


class Bin(NamedTuple):
    lower: int
    upper: int
    count: int


class OptimizedBin(NamedTuple):
    lower: int
    offset_bits: int
    weight: int


class BinCostParams(NamedTuple):
    meta_bits: float  # M, bits to store one bin record
    n: int  # total latent count


def max_bins_for(level: int, n: int) -> int:
    return max(1, min(1 << level, -(-n // 16)))


def bit_length(x) -> np.ndarray:
    """Vectorized ``int.bit_length`` for unsigned arrays (exact up to 64 bits)."""
    x = np.array(x, dtype=np.uint64, copy=True, ndmin=1)
    out = np.zeros(x.shape, np.int64)
    for s in (32, 16, 8, 4, 2, 1):
        hit = (x >> np.uint64(s)) != 0
        out[hit] += s
        x[hit] >>= np.uint64(s)
    out += (x != 0)
    return out


def histogram_arrays(latents: np.ndarray, max_bins: int):
    """(lowers, uppers, counts) of tight, exclusive, roughly equal-count bins."""
    if len(latents) == 0:
        raise ValueError("cannot bin an empty latent sequence")
    if max_bins < 1:
        raise ValueError("max_bins must be at least 1")
    scratch = np.array(latents, copy=True)
    return _accel.kernels().histogram(scratch, int(max_bins))


def build_histogram(latents, max_bins: int) -> List[Bin]:
    lowers, uppers, counts = histogram_arrays(np.asarray(latents), max_bins)
    return [Bin(int(a), int(b), int(c)) for a, b, c in zip(lowers, uppers, counts)]


def bin_cost(bins: Sequence[Bin], i: int, j: int, params: BinCostParams) -> float:
    """Bit cost of merging bins ``i..j`` (inclusive) into one."""
    count = sum(b.count for b in bins[i:j + 1])
    alpha = math.log2(params.n / count)
    beta = (bins[j].upper - bins[i].lower).bit_length()
    return params.meta_bits + count * (alpha + beta)


def _optimal_partition(lowers, uppers, counts, meta_bits: float, n: int):
    """Suffix DP over contiguous partitions. Returns the class start indices.

    Ties prefer fewer classes, then the shorter leading class, which yields
    the lexicographically earliest cut positions.
    """
    k = len(counts)
    cum = np.concatenate([[0], np.cumsum(counts)]).astype(np.float64)
    best = np.zeros(k + 1)
    n_classes = np.zeros(k + 1, np.int64)
    next_cut = np.full(k, k, np.int64)
    uppers = np.asarray(uppers, dtype=np.uint64)
    lowers = np.asarray(lowers, dtype=np.uint64)
    for i in range(k - 1, -1, -1):
        js = np.arange(i, k)
        cnt = cum[js + 1] - cum[i]
        beta = bit_length(uppers[i:] - lowers[i])
        cost = meta_bits + cnt * (np.log2(n / cnt) + beta) + best[js + 1]
        classes = 1 + n_classes[js + 1]
        lo = cost.min()
        tied = cost <= lo + 1e-9 * max(1.0, abs(lo))
        fewest = classes[tied].min()
        choice = np.flatnonzero(tied & (classes == fewest))[0]
        best[i] = cost[choice]
        n_classes[i] = classes[choice]
        next_cut[i] = i + choice + 1
    starts = []
    i = 0
    while i < k:
        starts.append(i)
        i = int(next_cut[i])
    return np.array(starts, dtype=np.int64), float(best[0])


def partition_cost(bins: Sequence[Bin], starts: Sequence[int], params: BinCostParams) -> float:
    ends = list(starts[1:]) + [len(bins)]
    return sum(bin_cost(bins, s, e - 1, params) for s, e in zip(starts, ends))


def optimize_arrays(lowers, uppers, counts, meta_bits: float):
    """Merge adjacent bins to minimize total bit cost.

    Returns (lowers, offset_bits, weights) of the optimized bins.
    """
    counts = np.asarray(counts, dtype=np.int64)
    n = int(counts.sum())
    starts, _ = _optimal_partition(lowers, uppers, counts, meta_bits, n)
    ends = np.append(starts[1:], len(counts)) - 1
    new_lowers = np.asarray(lowers)[starts]
    offset_bits = bit_length(np.asarray(uppers, dtype=np.uint64)[ends] - new_lowers.astype(np.uint64))
    weights = np.add.reduceat(counts, starts)
    return new_lowers, offset_bits, weights


def optimize_bins(bins: Sequence[Bin], params: BinCostParams) -> List[OptimizedBin]:
    lowers = np.array([b.lower for b in bins], dtype=np.uint64)
    uppers = np.array([b.upper for b in bins], dtype=np.uint64)
    counts = np.array([b.count for b in bins], dtype=np.int64)
    if params.n != counts.sum():
        raise ValueError("params.n must equal the total bin count")
    lo, ob, w = optimize_arrays(lowers, uppers, counts, params.meta_bits)
    return [OptimizedBin(int(a), int(b), int(c)) for a, b, c in zip(lo, ob, w)]


def optimal_cost(bins: Sequence[Bin], params: BinCostParams) -> float:
    lowers = [b.lower for b in bins]
    uppers = [b.upper for b in bins]
    counts = [b.count for b in bins]
    return _optimal_partition(lowers, uppers, np.array(counts), params.meta_bits, params.n)[1]


def assign_arrays(latents: np.ndarray, lowers: np.ndarray, offset_bits: np.ndarray, check: bool = True):
    """(bin index, offset) per latent."""
    lowers = np.asarray(lowers, dtype=latents.dtype)
    if len(latents) == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.uint64)
    if check and latents.min() < lowers[0]:
        raise CorruptState("latent below the first bin")
    idx, offsets = _accel.kernels().assign_bins(latents, lowers, BATCH_SIZE)
    if check:
        ob = np.asarray(offset_bits, dtype=np.uint64)[idx]
        wide = ob >= 64
        limit = np.where(wide, np.uint64(0), np.uint64(1) << np.where(wide, np.uint64(0), ob))
        if np.any(~wide & (offsets >= limit)):
            raise CorruptState("latent falls in a gap between bins")
    return idx, offsets


def assign_bins(latents, optimized_bins: Sequence[OptimizedBin]):
    """Pairs of (bin index, offset) for each latent."""
    latents = np.asarray(latents)
    lowers = np.array([b.lower for b in optimized_bins], dtype=latents.dtype)
    ob = np.array([b.offset_bits for b in optimized_bins], dtype=np.int64)
    idx, offsets = assign_arrays(latents, lowers, ob)
    return list(zip(idx.tolist(), offsets.tolist()))
