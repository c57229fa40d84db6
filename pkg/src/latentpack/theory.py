"""Convergence bound, synthetic distributions and entropy estimation.

The binned bit cost of i.i.d. data whose PMF splits into ``s`` monotone
pieces over a domain of size ``T`` exceeds the entropy by at most
``3 s log2(T) / (k - 2s) * T / (T - 1)`` bits per number with ``k`` bins.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidConfig

# largest double below 2^64, so the cast to uint64 cannot overflow
_U64_CEIL = float(np.nextafter(2.0 ** 64, 0))


def theorem_bound(s: int, k: int, T: float = 2.0 ** 64) -> float:
    """Slack term of the convergence bound, in bits per number."""
    if s < 1:
        raise InvalidConfig("s must be at least 1")
    if k <= 2 * s:
        raise InvalidConfig(f"bound needs k > 2s, got k={k}, s={s}")
    if T < 2:
        raise InvalidConfig("domain size T must be at least 2")
    return 3 * s * math.log2(T) / (k - 2 * s) * T / (T - 1)


@dataclass(frozen=True)
class Geometric:
    p: float

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise InvalidConfig("geometric p must be in (0, 1]")


@dataclass(frozen=True)
class Lomax:
    shape: float = 1.5
    scale: float = 1000.0

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise InvalidConfig("lomax shape and scale must be positive")


@dataclass(frozen=True)
class UniformRange:
    lo: int
    hi: int  # inclusive

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi < 2 ** 64:
            raise InvalidConfig("uniform range needs 0 <= lo <= hi < 2^64")


@dataclass(frozen=True)
class Mixture:
    components: Tuple[Tuple[float, "Dist"], ...]

    def __post_init__(self):
        if not self.components or any(w <= 0 for w, _ in self.components):
            raise InvalidConfig("mixture needs positive component weights")


Dist = Union[Geometric, Lomax, UniformRange, Mixture]


def parse_dist(text: str) -> Dist:
    """``geometric:P``, ``lomax[:SHAPE[:SCALE]]``, ``uniform:LO:HI`` or
    ``mix:W*DIST+W*DIST`` (e.g. ``mix:0.5*geometric:0.1+0.5*uniform:0:99``)."""
    text = text.strip().lower()
    try:
        if text.startswith("mix:"):
            parts = []
            for piece in text[4:].split("+"):
                w, _, sub = piece.partition("*")
                parts.append((float(w), parse_dist(sub)))
            return Mixture(tuple(parts))
        name, *args = text.split(":")
        if name == "geometric" and len(args) == 1:
            return Geometric(float(args[0]))
        if name == "lomax" and len(args) <= 2:
            return Lomax(*[float(a) for a in args])
        if name == "uniform" and len(args) == 2:
            return UniformRange(int(args[0]), int(args[1]))
    except ValueError as e:
        raise InvalidConfig(f"bad distribution {text!r}: {e}") from None
    raise InvalidConfig(f"unknown distribution {text!r}")


def _draw(dist: Dist, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(dist, Geometric):
        return rng.geometric(dist.p, n).astype(np.uint64)
    if isinstance(dist, Lomax):
        u = rng.random(n)
        x = dist.scale * ((1 - u) ** (-1 / dist.shape) - 1)
        return np.floor(np.minimum(x, _U64_CEIL)).astype(np.uint64)
    if isinstance(dist, UniformRange):
        return rng.integers(dist.lo, dist.hi, n, dtype=np.uint64, endpoint=True)
    if isinstance(dist, Mixture):
        w = np.array([c[0] for c in dist.components], float)
        which = rng.choice(len(w), n, p=w / w.sum())
        out = np.empty(n, np.uint64)
        for i, (_, sub) in enumerate(dist.components):
            sel = which == i
            out[sel] = _draw(sub, int(sel.sum()), rng)
        return out
    raise InvalidConfig(f"unknown distribution {dist!r}")


def generate(dist: Dist, n: int, seed: int = 0) -> np.ndarray:
    """``n`` seeded u64 draws."""
    if n < 1:
        raise InvalidConfig("n must be at least 1")
    return _draw(dist, n, np.random.Generator(np.random.Philox(seed)))


def empirical_entropy(numbers) -> float:
    """Plug-in entropy (bits/number) of the observed value frequencies."""
    _, counts = np.unique(np.asarray(numbers), return_counts=True)
    p = counts / counts.sum()
    return float(-np.sum(p * np.log2(p)))


class ReportRow(NamedTuple):
    k: int
    bits_per_number: float
    entropy_bits: float
    bound_bits: float


def convergence_report(numbers, levels: Sequence[int], s: int = 1) -> List[ReportRow]:
    """Compress u64 data at each level (Classic, no delta) and compare the
    measured size with entropy and the convergence bound."""
    from .kinds import NumberKind
    from .delta import NoDelta
    from .modes import Classic
    from .pipeline import CompressorConfig, compress_array

    numbers = np.asarray(numbers, dtype=np.uint64)
    h = empirical_entropy(numbers)
    rows = []
    for level in levels:
        k = 1 << level
        config = CompressorConfig(level=level, mode=Classic(), delta=NoDelta(),
                                  page_size=min(max(len(numbers), 1), 0xFFFF * 256))
        size = len(compress_array(numbers, NumberKind.U64, config))
        rows.append(ReportRow(k, 8.0 * size / len(numbers), h, h + theorem_bound(s, k)))
    return rows


def report_csv(rows: Sequence[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "bits_per_number", "entropy_bits", "bound_bits"])
    for r in rows:
        w.writerow([r.k, f"{r.bits_per_number:.6f}", f"{r.entropy_bits:.6f}", f"{r.bound_bits:.6f}"])
    return buf.getvalue()
