"""Modes: bijective maps between numbers and one or two unsigned latent variables.

Classic is an order-preserving reinterpretation of the bits. The other modes
split each number into a primary and a secondary latent:

* IntMult(m):     classic latent u -> (u // m, u % m)
* FloatQuant(k):  classic latent u -> (u >> k, low k mantissa bits)
* FloatMult(base): x -> (rounded multiplier of base, ULP adjustment)
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .errors import CorruptLatents, InvalidConfig, InvalidModeForData
from .kinds import NumberKind


@dataclass(frozen=True)
class Classic:
    n_latent_vars = 1

    def __str__(self):
        return "classic"


@dataclass(frozen=True)
class IntMult:
    m: int
    n_latent_vars = 2

    def __str__(self):
        return f"intmult:{self.m}"


@dataclass(frozen=True)
class FloatMult:
    base: float
    n_latent_vars = 2

    def __str__(self):
        return f"floatmult:{self.base!r}"


@dataclass(frozen=True)
class FloatQuant:
    k: int
    n_latent_vars = 2

    def __str__(self):
        return f"floatquant:{self.k}"


Mode = Union[Classic, IntMult, FloatMult, FloatQuant]


class LatentVars(NamedTuple):
    primary: np.ndarray
    secondary: Optional[np.ndarray] = None


def parse_mode(text: str) -> Mode:
    """Parse ``classic``, ``intmult:101``, ``floatmult:0.01`` or ``floatquant:13``."""
    name, _, arg = text.strip().lower().partition(":")
    try:
        if name == "classic" and not arg:
            return Classic()
        if name == "intmult":
            return IntMult(int(arg))
        if name == "floatmult":
            return FloatMult(float(arg))
        if name == "floatquant":
            return FloatQuant(int(arg))
    except ValueError:
        pass
    raise InvalidConfig(f"cannot parse mode {text!r}")


def validate_mode(mode: Mode, kind: NumberKind) -> None:
    if isinstance(mode, Classic):
        return
    if isinstance(mode, IntMult):
        if kind.is_float:
            raise InvalidConfig("IntMult requires an integer kind")
        if not 2 <= mode.m < (1 << kind.bits):
            raise InvalidConfig(f"IntMult multiplier {mode.m} out of range")
        return
    if not kind.is_float:
        raise InvalidConfig(f"{type(mode).__name__} requires a float kind")
    if isinstance(mode, FloatMult):
        base = kind.dtype.type(mode.base)
        if not np.isfinite(base) or base == 0:
            raise InvalidConfig(f"FloatMult base {mode.base} must be finite and nonzero")
        return
    if isinstance(mode, FloatQuant):
        if not 1 <= mode.k < kind.mantissa_bits:
            raise InvalidConfig(f"FloatQuant k={mode.k} out of range for {kind.name}")
        return
    raise InvalidConfig(f"unknown mode {mode!r}")


def _uint(kind):
    return kind.latent_dtype.type


def classic_to_latent(x, kind: NumberKind) -> np.ndarray:
    """Order-preserving map from numbers (any bit pattern) to unsigned latents."""
    x = np.asarray(x, dtype=kind.dtype)
    bits = x.view(kind.latent_dtype)
    u = _uint(kind)
    sign = u(1 << (kind.bits - 1))
    if kind.is_float:
        negative = (bits & sign) != 0
        return np.where(negative, ~bits, bits | sign)
    if kind.is_signed:
        return bits ^ sign
    return bits.copy()


def latent_to_classic(latents, kind: NumberKind) -> np.ndarray:
    latents = np.asarray(latents, dtype=kind.latent_dtype)
    u = _uint(kind)
    sign = u(1 << (kind.bits - 1))
    if kind.is_float:
        positive = (latents & sign) != 0
        bits = np.where(positive, latents ^ sign, ~latents)
    elif kind.is_signed:
        bits = latents ^ sign
    else:
        bits = latents.copy()
    return bits.view(kind.dtype)


def _float_mult_product(multiplier: np.ndarray, base, kind: NumberKind) -> np.ndarray:
    with np.errstate(all="ignore"):
        return (multiplier.astype(kind.dtype) * kind.dtype.type(base)).astype(kind.dtype)


def split(numbers, mode: Mode, kind: NumberKind) -> LatentVars:
    validate_mode(mode, kind)
    numbers = np.asarray(numbers, dtype=kind.dtype)
    u = classic_to_latent(numbers, kind)
    if isinstance(mode, Classic):
        return LatentVars(u)
    ldt = kind.latent_dtype
    if isinstance(mode, IntMult):
        m = ldt.type(mode.m)
        return LatentVars(u // m, u % m)
    if isinstance(mode, FloatQuant):
        k = ldt.type(mode.k)
        mask = ldt.type((1 << mode.k) - 1)
        # Low bits are taken from the raw IEEE pattern so quantized values of
        # either sign leave a zero secondary.
        raw = numbers.view(ldt)
        return LatentVars(u >> k, raw & mask)
    if isinstance(mode, FloatMult):
        return _split_float_mult(numbers, u, mode.base, kind)
    raise InvalidModeForData(f"unsupported mode {mode!r}")


def _split_float_mult(numbers, u, base, kind):
    ldt = kind.latent_dtype
    sdt = np.dtype(np.int32 if kind.bits == 32 else np.int64)
    limit = float(1 << (kind.bits - 2))
    with np.errstate(all="ignore"):
        mult = np.rint(numbers / kind.dtype.type(base))
        usable = np.isfinite(mult) & (np.abs(mult) <= limit)
        mult = np.where(usable, mult, 0).astype(sdt)
    bias = ldt.type(1 << (kind.bits - 1))
    primary = mult.view(ldt) ^ bias
    approx = classic_to_latent(_float_mult_product(mult, base, kind), kind)
    secondary = u - approx + bias
    return LatentVars(primary, secondary)


def join(latents: LatentVars, mode: Mode, kind: NumberKind) -> np.ndarray:
    ldt = kind.latent_dtype
    primary = np.asarray(latents.primary, dtype=ldt)
    if isinstance(mode, Classic):
        return latent_to_classic(primary, kind)
    if latents.secondary is None or len(latents.secondary) != len(primary):
        raise CorruptLatents("secondary latent length does not match primary")
    secondary = np.asarray(latents.secondary, dtype=ldt)
    if isinstance(mode, IntMult):
        return latent_to_classic(primary * ldt.type(mode.m) + secondary, kind)
    if isinstance(mode, FloatQuant):
        k = ldt.type(mode.k)
        mask = ldt.type((1 << mode.k) - 1)
        sign = ldt.type(1 << (kind.bits - 1))
        high = primary << k
        positive = (high & sign) != 0
        low = np.where(positive, secondary, ~secondary) & mask
        return latent_to_classic(high | low, kind)
    if isinstance(mode, FloatMult):
        bias = ldt.type(1 << (kind.bits - 1))
        sdt = np.dtype(np.int32 if kind.bits == 32 else np.int64)
        mult = (primary ^ bias).view(sdt)
        approx = classic_to_latent(_float_mult_product(mult, mode.base, kind), kind)
        return latent_to_classic(approx + secondary - bias, kind)
    raise CorruptLatents(f"unsupported mode {mode!r}")
