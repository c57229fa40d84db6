"""Mode detection from a deterministic sample.

Each candidate mode gets an estimated bit cost relative to Classic (which is
0 by definition); the cheapest wins. Integer multipliers come from a GCD
census over triples of sampled latents, float bases from an approximate
float GCD over the same triples, and quantization depth from trailing-zero
counts of the mantissa.
"""
from __future__ import annotations

import math
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from . import modes as _modes
from .kinds import NumberKind

ZETA2 = math.pi ** 2 / 6
MIN_SAMPLE = 100
MAX_SAMPLE = 10_000
SAMPLE_DIVISOR = 20
MAX_CANDIDATES = 8
# c_m is shrunk by this many standard deviations before use; on structureless
# data c_m/c sits right at the uniform boundary and raw counts would pick a
# spurious multiplier about half the time
CENSUS_Z = 4.0
FLOAT_ULP_TOLERANCE = 2 ** 8
FLOAT_CONFORMING_FRACTION = 0.8
FALSE_POSITION_TOL = 1e-9
GCD_ERROR_ULPS = 8


class Sample(NamedTuple):
    values: np.ndarray  # classic latents of the sampled numbers
    numbers: np.ndarray
    n_sample: int
    seed: int


class GcdCensus(NamedTuple):
    counts: Dict[int, int]
    c: int


class BitCostEstimate(NamedTuple):
    mode: _modes.Mode
    relative_cost_bits: float


def sample_size(n: int) -> int:
    return min(max(n // SAMPLE_DIVISOR, min(n, MIN_SAMPLE)), MAX_SAMPLE)


def draw_sample(numbers, kind: NumberKind, seed: int = 0) -> Sample:
    """Uniform sample without replacement, in a seeded pseudorandom order."""
    numbers = np.asarray(numbers, dtype=kind.dtype)
    n = len(numbers)
    size = sample_size(n)
    rng = np.random.Generator(np.random.Philox(seed))
    idx = rng.choice(n, size, replace=False) if size < n else rng.permutation(n)
    picked = numbers[idx]
    return Sample(_modes.classic_to_latent(picked, kind), picked, size, seed)


def _triples(values: np.ndarray):
    c = len(values) // 3
    return values[0:3 * c:3], values[1:3 * c:3], values[2:3 * c:3]


def _absdiff(a, b):
    return np.where(a >= b, a - b, b - a)


def census_gcds(sample: Sample, latent_bits: Optional[int] = None) -> GcdCensus:
    """GCD of the two differences of each consecutive triple of the sample."""
    values = np.asarray(sample.values)
    if latent_bits is None:
        latent_bits = values.dtype.itemsize * 8
    x1, x2, x3 = _triples(values.astype(np.uint64))
    c = len(x1)
    g = np.gcd(_absdiff(x2, x1), _absdiff(x3, x1))
    g = g[(g >= 2) & (g <= np.uint64(1 << (latent_bits // 2)))]
    ms, counts = np.unique(g, return_counts=True)
    return GcdCensus({int(m): int(k) for m, k in zip(ms, counts)}, c)


def _n_infrequent(keys: np.ndarray, n_sample: int) -> int:
    _, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    return int(np.count_nonzero(counts[inverse] <= n_sample / 256))


def estimate_quotient_saving(sample: Sample, m: int) -> float:
    q = np.asarray(sample.values, dtype=np.uint64) // np.uint64(m)
    return -_n_infrequent(q, len(q)) * math.log2(m)


def _cubic(p: float, m: int) -> float:
    return p ** 3 + (1 - p) ** 3 / (m - 1) ** 2


def remainder_probability(m: int, c: int, c_m: float) -> float:
    """Dominant-residue probability p solving p^3 + (1-p)^3/(m-1)^2 = t."""
    t = min(ZETA2 * c_m / c, 1.0)
    lo, hi = 1.0 / m, 1.0
    f_lo, f_hi = _cubic(lo, m) - t, _cubic(hi, m) - t
    if f_lo >= 0:
        return lo
    if f_hi <= 0:
        return hi
    # Illinois variant of false position: halve the stale end's value so the
    # bracket shrinks from both sides
    side = 0
    p = lo
    for _ in range(200):
        p = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        f = _cubic(p, m) - t
        if f == 0 or hi - lo < FALSE_POSITION_TOL:
            break
        if f < 0:
            lo, f_lo = p, f
            if side == -1:
                f_hi /= 2
            side = -1
        else:
            hi, f_hi = p, f
            if side == 1:
                f_lo /= 2
            side = 1
    return p


def estimate_remainder_cost(m: int, c: int, c_m: float) -> float:
    """Entropy in bits per number of the remainder distribution implied by c_m/c."""
    p = remainder_probability(m, c, c_m)
    if p >= 1.0:
        return 0.0
    rest = (1 - p) / (m - 1)
    return -p * math.log2(p) - (1 - p) * math.log2(rest)


def _plugin_entropy(values: np.ndarray) -> float:
    if len(values) == 0:
        return 0.0
    _, counts = np.unique(values, return_counts=True)
    p = counts / len(values)
    return float(-np.sum(p * np.log2(p)))


# ---------------------------------------------------------------- candidates

def int_mult_estimates(sample: Sample, kind: NumberKind) -> List[BitCostEstimate]:
    if sample.n_sample < 3:
        return []
    census = census_gcds(sample, kind.bits)
    floor = max(3, census.c / 100)
    ranked = sorted(census.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    out = []
    for m, c_m in ranked[:MAX_CANDIDATES]:
        if c_m < floor:
            continue
        shrunk = c_m - CENSUS_Z * math.sqrt(c_m)
        if shrunk <= 0:
            continue
        cost = estimate_quotient_saving(sample, m) + sample.n_sample * estimate_remainder_cost(m, census.c, shrunk)
        out.append(BitCostEstimate(_modes.IntMult(m), cost))
    return out


def _ulp(x: np.ndarray, dtype) -> np.ndarray:
    x = np.abs(x.astype(dtype))
    return np.spacing(x).astype(np.float64)


def _float_gcd(a: np.ndarray, b: np.ndarray, err: np.ndarray) -> np.ndarray:
    """Approximate GCD of inexact floats by Euclid.

    Each remainder is an integer combination of the inputs, so its error is
    about ``err`` times the combination's coefficient size. Stop once the
    remainder is within that error; the previous remainder is the GCD, then
    refined against the larger input. With ``err == 0`` this is exact Euclid
    (``fmod`` is exact), which suits exactly representable multiples.
    """
    a, b = np.maximum(a, b), np.minimum(a, b)
    a0 = a.copy()
    ca, cb = np.ones_like(a), np.ones_like(a)
    live = b > err
    g = np.where(live, b, a)
    for _ in range(100):
        if not live.any():
            break
        with np.errstate(all="ignore"):
            safe_b = np.where(live, b, 1.0)
            q = np.floor(a / safe_b)
            r = np.fmod(a, safe_b)
        cr = ca + q * cb
        a, ca = np.where(live, b, a), np.where(live, cb, ca)
        b, cb = np.where(live, r, b), np.where(live, cr, cb)
        g = np.where(live, a, g)
        live &= b > err * cb
    with np.errstate(all="ignore"):
        mult = np.maximum(np.rint(a0 / g), 1.0)
    return a0 / mult


def _snap_base(g: float) -> float:
    if g >= 1:
        r = round(g)
        if abs(g - r) <= 1e-6 * g:
            return float(r)
        return g
    inv = 1.0 / g
    r = round(inv)
    if r >= 1 and abs(inv - r) <= 1e-6 * inv:
        return 1.0 / r
    return g


def float_mult_candidates(sample: Sample, kind: NumberKind) -> List[float]:
    x = sample.numbers.astype(np.float64)
    x1, x2, x3 = _triples(x)
    c = len(x1)
    if c == 0:
        return []
    finite = np.isfinite(x1) & np.isfinite(x2) & np.isfinite(x3)
    d1, d2 = np.abs(x2 - x1)[finite], np.abs(x3 - x1)[finite]
    scale = np.maximum.reduce([np.abs(x1[finite]), np.abs(x2[finite]), np.abs(x3[finite])])
    ulp = _ulp(scale, kind.dtype)
    # inputs and their differences each carry up to about one ULP of error
    err = ulp * GCD_ERROR_ULPS
    keep = (d1 > err) & (d2 > err)
    if not keep.any():
        return []
    d1, d2, ulp, err = d1[keep], d2[keep], ulp[keep], err[keep]
    exact = _float_gcd(d1, d2, np.zeros_like(err))
    noisy = _float_gcd(d1, d2, err)
    g = np.concatenate([exact[exact > 2 * ulp], noisy])
    g = g[np.isfinite(g) & (g > 0)]
    snapped = np.array([_snap_base(float(v)) for v in g])
    # the base is stored at the kind's precision, so group candidates there
    snapped = snapped.astype(kind.dtype).astype(np.float64)
    bases, counts = np.unique(snapped, return_counts=True)
    floor = max(3, c / 100)
    order = np.lexsort((bases, -counts))
    return [float(bases[i]) for i in order[:MAX_CANDIDATES] if counts[i] >= floor]


def float_mult_estimate(sample: Sample, kind: NumberKind, base: float) -> Optional[BitCostEstimate]:
    mode = _modes.FloatMult(base)
    try:
        _modes.validate_mode(mode, kind)
    except ValueError:
        return None
    x = sample.numbers
    xf = x.astype(np.float64)
    finite = np.isfinite(xf)
    with np.errstate(all="ignore"):
        mult = np.rint(xf / base)
        err = np.abs(xf - mult * base)
    ulp = _ulp(xf, kind.dtype)
    conforming = finite & (err <= FLOAT_ULP_TOLERANCE * ulp)
    if conforming.sum() < FLOAT_CONFORMING_FRACTION * len(x):
        return None
    primary, secondary = _modes.split(x, mode, kind)
    infrequent = np.zeros(len(x), bool)
    _, inverse, counts = np.unique(primary, return_inverse=True, return_counts=True)
    infrequent = counts[inverse] <= len(x) / 256
    with np.errstate(all="ignore"):
        gain = np.log2(base / ulp)
    gain = np.clip(np.nan_to_num(gain, nan=0.0, posinf=0.0, neginf=0.0), 0, kind.mantissa_bits + 1)
    saving = float(np.sum(gain[infrequent & conforming]))
    cost = -saving + len(x) * _plugin_entropy(secondary)
    return BitCostEstimate(mode, cost)


def float_quant_estimate(sample: Sample, kind: NumberKind) -> Optional[BitCostEstimate]:
    mant = kind.mantissa_bits
    raw = sample.numbers.view(kind.latent_dtype).astype(np.uint64) & np.uint64((1 << mant) - 1)
    tz = np.full(len(raw), mant, np.int64)
    nz = raw != 0
    low = raw[nz] & (~raw[nz] + np.uint64(1))  # lowest set bit
    tz[nz] = np.round(np.log2(low.astype(np.float64))).astype(np.int64)
    hist = np.bincount(tz, minlength=mant + 1)
    at_least = np.cumsum(hist[::-1])[::-1]
    best_k, best_saving = 0, 0.0
    for k in range(1, mant):
        hits = at_least[k] - CENSUS_Z * math.sqrt(at_least[k])
        saving = k * hits - k * (len(raw) - hits)
        if saving > best_saving:
            best_k, best_saving = k, float(saving)
    if best_k == 0:
        return None
    return BitCostEstimate(_modes.FloatQuant(best_k), -best_saving)


def mode_estimates(numbers, kind: NumberKind, seed: int = 0) -> List[BitCostEstimate]:
    """Classic plus every candidate mode, with relative bit-cost estimates."""
    kind = NumberKind(kind)
    sample = draw_sample(numbers, kind, seed)
    estimates = [BitCostEstimate(_modes.Classic(), 0.0)]
    if sample.n_sample == 0:
        return estimates
    if kind.is_float:
        for base in float_mult_candidates(sample, kind):
            est = float_mult_estimate(sample, kind, base)
            if est is not None:
                estimates.append(est)
        est = float_quant_estimate(sample, kind)
        if est is not None:
            estimates.append(est)
    else:
        estimates.extend(int_mult_estimates(sample, kind))
    return estimates


def choose_mode(numbers, kind: NumberKind, seed: int = 0, override: Optional[_modes.Mode] = None) -> _modes.Mode:
    """Mode with the lowest estimated bit cost; Classic unless a candidate
    is clearly cheaper."""
    kind = NumberKind(kind)
    if override is not None:
        _modes.validate_mode(override, kind)
        return override
    estimates = mode_estimates(numbers, kind, seed)
    n_sample = sample_size(len(numbers))
    best = estimates[0]
    for est in estimates[1:]:
        if est.relative_cost_bits < best.relative_cost_bits and est.relative_cost_bits < -1e-6 * n_sample:
            best = est
    return best.mode
