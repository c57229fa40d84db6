"""Number kinds and their latent dtypes."""
from __future__ import annotations

import enum

import numpy as np


class NumberKind(enum.IntEnum):
    U32 = 0
    U64 = 1
    I32 = 2
    I64 = 3
    F32 = 4
    F64 = 5

    @property
    def bits(self) -> int:
        return 32 if self in (NumberKind.U32, NumberKind.I32, NumberKind.F32) else 64

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(_DTYPES[self])

    @property
    def latent_dtype(self) -> np.dtype:
        return np.dtype(np.uint32 if self.bits == 32 else np.uint64)

    @property
    def is_float(self) -> bool:
        return self in (NumberKind.F32, NumberKind.F64)

    @property
    def is_signed(self) -> bool:
        return self in (NumberKind.I32, NumberKind.I64)

    @property
    def mantissa_bits(self) -> int:
        if not self.is_float:
            raise ValueError(f"{self.name} has no mantissa")
        return 23 if self.bits == 32 else 52

    @classmethod
    def parse(cls, name: str) -> "NumberKind":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown number kind {name!r}") from None

    @classmethod
    def from_dtype(cls, dtype) -> "NumberKind":
        dtype = np.dtype(dtype)
        for kind, name in _DTYPES.items():
            if np.dtype(name) == dtype:
                return kind
        raise ValueError(f"unsupported dtype {dtype}")


_DTYPES = {
    NumberKind.U32: "<u4",
    NumberKind.U64: "<u8",
    NumberKind.I32: "<i4",
    NumberKind.I64: "<i8",
    NumberKind.F32: "<f4",
    NumberKind.F64: "<f8",
}
