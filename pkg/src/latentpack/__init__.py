"""Lossless compression of numerical sequences via modes, delta encodings,
binning and tANS."""
from .delta import Consecutive, Lookback, NoDelta, choose_delta_encoding
from .errors import (CorruptLatents, CorruptMetadata, CorruptPage, CorruptState, InvalidConfig,
                     InvalidModeForData, LatentpackError, UnsupportedVersion)
from .kinds import NumberKind
from .mode_detect import choose_mode
from .modes import Classic, FloatMult, FloatQuant, IntMult
from .pipeline import (CompressorConfig, compress_array, compress_chunk, decompress_array,
                       decompress_chunk, decompress_page, inspect_chunk)

__version__ = "0.1.0"

__all__ = [
    "Classic", "IntMult", "FloatMult", "FloatQuant",
    "NoDelta", "Consecutive", "Lookback",
    "NumberKind", "CompressorConfig",
    "compress_chunk", "decompress_page", "decompress_chunk", "inspect_chunk",
    "compress_array", "decompress_array", "choose_mode", "choose_delta_encoding",
    "LatentpackError", "InvalidConfig", "InvalidModeForData", "CorruptLatents", "CorruptState",
    "CorruptMetadata", "CorruptPage", "UnsupportedVersion",
]
