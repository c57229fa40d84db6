"""Delta encodings over a single latent sequence.

Differences are taken with wrapping unsigned arithmetic and re-centred by
adding half the latent range, so small signed deltas cluster around the
midpoint instead of splitting between 0 and the top of the domain.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _accel
from .errors import CorruptPage, InvalidConfig

MAX_ORDER = 7
MAX_WINDOW = 256


@dataclass(frozen=True)
class NoDelta:
    def __str__(self):
        return "none"


@dataclass(frozen=True)
class Consecutive:
    order: int

    def __post_init__(self):
        if not 1 <= self.order <= MAX_ORDER:
            raise InvalidConfig(f"consecutive delta order must be in [1, {MAX_ORDER}], got {self.order}")

    def __str__(self):
        return f"consecutive:{self.order}"


@dataclass(frozen=True)
class Lookback:
    window: int = MAX_WINDOW

    def __post_init__(self):
        if not 2 <= self.window <= MAX_WINDOW:
            raise InvalidConfig(f"lookback window must be in [2, {MAX_WINDOW}], got {self.window}")

    def __str__(self):
        return f"lookback:{self.window}"


DeltaEncoding = Union[NoDelta, Consecutive, Lookback]


def parse_delta(text: str) -> DeltaEncoding:
    name, _, arg = text.strip().lower().partition(":")
    try:
        if name == "none" and not arg:
            return NoDelta()
        if name == "consecutive":
            return Consecutive(int(arg) if arg else 1)
        if name == "lookback":
            return Lookback(int(arg) if arg else MAX_WINDOW)
    except ValueError as e:
        raise InvalidConfig(f"cannot parse delta encoding {text!r}: {e}") from None
    raise InvalidConfig(f"cannot parse delta encoding {text!r}")


def n_state_values(encoding: DeltaEncoding) -> int:
    """Number of latents the page metadata stores to resume decoding."""
    if isinstance(encoding, Consecutive):
        return encoding.order
    if isinstance(encoding, Lookback):
        return 1
    return 0


def n_lost(encoding: DeltaEncoding) -> int:
    """How many fewer transformed latents than inputs the encoding yields."""
    return n_state_values(encoding)


def _bias(dtype):
    return dtype.type(1 << (dtype.itemsize * 8 - 1))


def delta_encode(latents: np.ndarray, encoding: DeltaEncoding):
    """Returns ``(state, transformed, extra)``.

    ``extra`` is the per-latent lookback sequence for Lookback, else None.
    ``transformed`` has ``len(latents) - n_lost(encoding)`` entries (never
    negative); state always holds ``n_state_values(encoding)`` values, zero
    filled when the input is shorter than the order.
    """
    latents = np.asarray(latents)
    dtype = latents.dtype
    if isinstance(encoding, NoDelta):
        return np.zeros(0, dtype), latents.copy(), None
    if isinstance(encoding, Consecutive):
        state = np.zeros(encoding.order, dtype)
        cur = latents
        for i in range(encoding.order):
            if len(cur) == 0:
                break
            state[i] = cur[0]
            cur = np.diff(cur)
        return state, cur + _bias(dtype), None
    if isinstance(encoding, Lookback):
        state = np.zeros(1, dtype)
        if len(latents) == 0:
            return state, np.zeros(0, dtype), np.zeros(0, dtype)
        state[0] = latents[0]
        lookbacks = _accel.kernels().choose_lookbacks(latents, encoding.window)
        idx = np.arange(1, len(latents))
        transformed = latents[1:] - latents[idx - lookbacks] + _bias(dtype)
        return state, transformed, lookbacks.astype(dtype)
    raise InvalidConfig(f"unknown delta encoding {encoding!r}")


def delta_decode(state, transformed, extra, encoding: DeltaEncoding, n: Optional[int] = None) -> np.ndarray:
    """Inverse of :func:`delta_encode`; ``n`` truncates the reconstruction."""
    transformed = np.asarray(transformed)
    dtype = transformed.dtype
    if isinstance(encoding, NoDelta):
        out = transformed.copy()
    elif isinstance(encoding, Consecutive):
        state = np.asarray(state, dtype=dtype)
        if len(state) != encoding.order:
            raise CorruptPage("delta state length does not match order")
        cur = transformed - _bias(dtype)
        for moment in state[::-1]:
            nxt = np.empty(len(cur) + 1, dtype)
            nxt[0] = moment
            np.cumsum(cur, dtype=dtype, out=nxt[1:])
            nxt[1:] += moment
            cur = nxt
        out = cur
    elif isinstance(encoding, Lookback):
        state = np.asarray(state, dtype=dtype)
        if len(state) != 1:
            raise CorruptPage("lookback delta state must hold one latent")
        extra = np.asarray(extra, dtype=dtype)
        if len(extra) != len(transformed):
            raise CorruptPage("lookback sequence length mismatch")
        if len(extra) and (extra.max() > encoding.window or extra.min() < 1):
            raise CorruptPage("lookback out of window")
        out = np.empty(len(transformed) + 1, dtype)
        out[0] = state[0]
        if not _accel.kernels().undo_lookbacks(out, transformed - _bias(dtype), extra.astype(np.int64)):
            raise CorruptPage("lookback reaches before start of page")
    else:
        raise InvalidConfig(f"unknown delta encoding {encoding!r}")
    return out if n is None else out[:n]


DETECT_RUN = 100
DETECT_RUNS = 10


def detection_sample(numbers: np.ndarray, seed: int, run: int = DETECT_RUN, runs: int = DETECT_RUNS):
    """Several runs of consecutive numbers, so local correlation survives."""
    n = len(numbers)
    n_blocks = n // run
    if n_blocks <= runs:
        return numbers[: run * runs]
    rng = np.random.Generator(np.random.Philox(seed))
    blocks = np.sort(rng.choice(n_blocks, runs, replace=False))
    return np.concatenate([numbers[b * run:(b + 1) * run] for b in blocks])


def choose_delta_encoding(numbers, mode, kind, seed: int = 0, level: int = 8) -> DeltaEncoding:
    """Pick the delta encoding that compresses a sample of runs smallest.

    Candidates are None, then Consecutive orders 1, 2, ... (stopping at the
    first order that does worse than its predecessor), then Lookback. Each
    run of the sample is compressed as its own page.
    """
    from .pipeline import CompressorConfig, compress_chunk

    sample = detection_sample(np.asarray(numbers), seed)
    if len(sample) < 2:
        return NoDelta()

    def size(encoding):
        config = CompressorConfig(level=level, mode=mode, delta=encoding, page_size=DETECT_RUN, seed=seed)
        chunk = compress_chunk(sample, kind, config)
        return len(chunk.meta) + sum(len(p.data) for p in chunk.pages)

    best, best_size = NoDelta(), size(NoDelta())
    prev = best_size
    for order in range(1, MAX_ORDER + 1):
        s = size(Consecutive(order))
        if s < best_size:
            best, best_size = Consecutive(order), s
        if s > prev:
            break
        prev = s
    lookback = Lookback()
    if size(lookback) < best_size:
        best = lookback
    return best
