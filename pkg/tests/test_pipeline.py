import json

import numpy as np
import pytest

from latentpack import (Classic, CompressorConfig, Consecutive, FloatMult, IntMult, Lookback, NoDelta, NumberKind,
                        compress_array, compress_chunk, decompress_array, decompress_chunk, decompress_page,
                        inspect_chunk)
from latentpack.errors import CorruptMetadata, CorruptPage, InvalidConfig, LatentpackError
from latentpack.pipeline import DecoderChunk, page_counts


def _roundtrip(x, kind, **cfg):
    blob = compress_array(x, kind, CompressorConfig(**cfg))
    y, k = decompress_array(blob)
    assert k == kind and y.tobytes() == np.asarray(x, kind.dtype).tobytes()
    return blob


def test_constant_data_is_tiny():
    chunk = compress_chunk(np.full(1000, 7, np.uint64), NumberKind.U64)
    assert len(chunk.meta) + sum(len(p.data) for p in chunk.pages) < 100
    info = inspect_chunk(chunk.meta)
    assert info["variables"][0]["bin_count"] == 1
    assert info["variables"][0]["bins"][0]["offset_bits"] == 0


def test_page_partition():
    chunk = compress_chunk(np.arange(600, dtype=np.uint32), NumberKind.U32, CompressorConfig(page_size=256))
    assert [p.count for p in chunk.pages] == [256, 256, 88]
    assert page_counts(600, 256) == [256, 256, 88]


def test_incompressible_data_stays_near_raw_size():
    x = np.random.default_rng(0).integers(0, np.iinfo(np.uint64).max, 100_000, dtype=np.uint64, endpoint=True)
    blob = _roundtrip(x, NumberKind.U64)
    assert len(blob) >= 8 * len(x) * 0.99
    assert len(blob) <= 8 * len(x) * 1.01 + 4096


def test_pages_decode_independently():
    rng = np.random.default_rng(1)
    x = np.cumsum(rng.integers(-5, 6, 5000)).astype(np.int64)
    chunk = compress_chunk(x, NumberKind.I64, CompressorConfig(page_size=1000, delta=Consecutive(1)))
    decoder = DecoderChunk.from_bytes(chunk.meta)
    for i in (3, 1, 4, 0, 2):
        page = chunk.pages[i]
        assert np.array_equal(decoder.decompress_page(page.data, page.count), x[i * 1000:(i + 1) * 1000])
    assert np.array_equal(decompress_page(chunk.meta, chunk.pages[2].data, 1000), x[2000:3000])
    assert np.array_equal(decompress_chunk(chunk.meta, chunk.pages), x)


@pytest.mark.parametrize("kind", list(NumberKind))
def test_auto_detection_round_trips(kind):
    rng = np.random.default_rng(kind.value)
    if kind.is_float:
        x = np.round(rng.normal(0, 100, 3000), 2).astype(kind.dtype)
    else:
        x = (rng.integers(0, 1000, 3000) * 13).astype(kind.dtype)
    _roundtrip(x, kind)


def test_deterministic_output():
    x = np.random.default_rng(2).normal(size=5000)
    a = compress_array(x, NumberKind.F64, CompressorConfig(seed=5))
    b = compress_array(x, NumberKind.F64, CompressorConfig(seed=5))
    assert a == b


def test_overrides_honored():
    x = np.arange(0, 50_000, 7, dtype=np.uint64)
    chunk = compress_chunk(x, NumberKind.U64, CompressorConfig(mode=IntMult(101), delta=Lookback(16)))
    info = inspect_chunk(chunk.meta)
    assert info["mode"]["m"] == 101 and info["delta"] == "lookback:16"
    assert [v["name"] for v in info["variables"]] == ["primary", "secondary", "lookback"]
    json.dumps(info)


def test_inapplicable_override_rejected():
    with pytest.raises(InvalidConfig):
        compress_chunk(np.ones(10), NumberKind.F64, CompressorConfig(mode=IntMult(3)))
    with pytest.raises(InvalidConfig):
        compress_chunk(np.zeros(0, np.uint32), NumberKind.U32)
    with pytest.raises(InvalidConfig):
        CompressorConfig(level=13)


def test_float_mult_detected_and_compact():
    rng = np.random.default_rng(3)
    x = (rng.integers(0, 1 << 20, 50_000) / 2).astype(np.float32)
    chunk = compress_chunk(x, NumberKind.F32)
    assert inspect_chunk(chunk.meta)["mode"]["name"] == "FloatMult"
    assert inspect_chunk(chunk.meta)["mode"]["base"] == 0.5


def test_estimate_matches_payload():
    rng = np.random.default_rng(4)
    x = rng.geometric(0.001, 200_000).astype(np.uint64)
    chunk = compress_chunk(x, NumberKind.U64, CompressorConfig(mode=Classic(), delta=NoDelta()))
    est = inspect_chunk(chunk.meta)["estimated_bits_per_number"]
    actual = 8 * sum(len(p.data) for p in chunk.pages) / len(x)
    assert abs(est - actual) / actual < 0.01


def test_multiple_chunks():
    x = np.arange(10_000, dtype=np.int32) % 97
    blob = compress_array(x, NumberKind.I32, CompressorConfig(page_size=500), chunk_size=3000)
    y, _ = decompress_array(blob)
    assert np.array_equal(x, y)


def test_corrupt_page_payload_is_typed_or_sized():
    x = np.random.default_rng(5).integers(0, 1000, 2000).astype(np.uint32)
    chunk = compress_chunk(x, NumberKind.U32, CompressorConfig(mode=Classic(), delta=NoDelta()))
    page = bytearray(chunk.pages[0].data)
    page[20] ^= 0xFF
    try:
        out = decompress_page(chunk.meta, bytes(page), chunk.pages[0].count)
        assert len(out) == chunk.pages[0].count
    except LatentpackError:
        pass
    with pytest.raises(CorruptPage):
        decompress_page(chunk.meta, chunk.pages[0].data[:-10], chunk.pages[0].count)
    with pytest.raises(CorruptMetadata):
        decompress_page(chunk.meta[:3], chunk.pages[0].data, chunk.pages[0].count)


@pytest.mark.parametrize("delta", [NoDelta(), Consecutive(2), Lookback(64)])
def test_backends_produce_identical_bytes(delta):
    from latentpack import _accel

    rng = np.random.default_rng(6)
    x = np.cumsum(rng.integers(-1000, 1000, 20_000)).astype(np.int64)
    config = CompressorConfig(mode=IntMult(3), delta=delta, page_size=4096)
    blobs = {}
    for name in _accel.BACKENDS:
        with _accel.use_backend(name):
            blobs[name] = compress_array(x, NumberKind.I64, config)
            y, _ = decompress_array(blobs["numba"])
            assert np.array_equal(x, y)
    assert blobs["numba"] == blobs["numpy"]


def test_nan_payloads_and_signed_zero():
    bits = np.array([0x7FF0000000000001, 0xFFF8000000000123, 0x8000000000000000, 0, 0x7FF0000000000000],
                    np.uint64)
    x = np.tile(bits, 100).view(np.float64)
    for mode in (Classic(), FloatMult(0.1)):
        _roundtrip(x, NumberKind.F64, mode=mode)
