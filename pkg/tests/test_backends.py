"""The numba and numpy kernels must agree bit for bit."""
import numpy as np
import pytest

from latentpack._accel import _nb, _np, backend_name, use_backend


@pytest.mark.parametrize("dtype", [np.uint32, np.uint64])
@pytest.mark.parametrize("max_bins", [1, 5, 256])
def test_histogram(dtype, max_bins):
    rng = np.random.default_rng(max_bins)
    x = np.concatenate([rng.geometric(0.02, 5000), rng.integers(0, 2 ** 31, 300), np.full(900, 3)]).astype(dtype)
    a = _nb.histogram(x.copy(), max_bins)
    b = _np.histogram(x.copy(), max_bins)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


def test_assign():
    rng = np.random.default_rng(1)
    x = rng.integers(0, 2 ** 40, 3000, dtype=np.uint64)
    lowers = np.unique(np.append(rng.choice(x, 50), x.min()))
    for u, v in zip(_nb.assign_bins(x, lowers, 256), _np.assign_bins(x, lowers, 256)):
        assert np.array_equal(u, v)


@pytest.mark.parametrize("dtype", [np.uint32, np.uint64])
def test_lookbacks(dtype):
    rng = np.random.default_rng(2)
    x = np.concatenate([np.tile(rng.integers(0, 2 ** 31, 5), 100), rng.integers(0, 2 ** 20, 500)]).astype(dtype)
    assert np.array_equal(_nb.choose_lookbacks(x, 64), _np.choose_lookbacks(x, 64))


def test_payload_and_decode():
    rng = np.random.default_rng(3)
    nv, n = 2, 1000
    codes = rng.integers(0, 2 ** 10, (nv, n)).astype(np.uint64)
    code_bits = np.full((nv, n), 10, np.uint8)
    offset_bits = rng.integers(0, 65, (nv, n)).astype(np.uint8)
    offsets = rng.integers(0, np.iinfo(np.uint64).max, (nv, n), dtype=np.uint64, endpoint=True)
    offsets &= np.where(offset_bits == 64, np.uint64(2 ** 64 - 1),
                        (np.uint64(1) << offset_bits.astype(np.uint64)) - np.uint64(1))
    a = _nb.write_payload(codes, code_bits, offsets, offset_bits, 256)
    b = _np.write_payload(codes, code_bits, offsets, offset_bits, 256)
    assert a[1] == b[1] and np.array_equal(a[0][: a[1] // 64 + 1], b[0][: b[1] // 64 + 1])


def test_backend_switch():
    with use_backend("numpy"):
        assert backend_name() == "numpy"
    with use_backend("numba"):
        assert backend_name() == "numba"
    with pytest.raises(ValueError):
        with use_backend("cuda"):
            pass


def _decode_inputs(seed):
    from latentpack import CompressorConfig, IntMult, NoDelta, NumberKind, compress_chunk
    from latentpack import format as fmt
    from latentpack.pipeline import DecoderChunk

    rng = np.random.default_rng(seed)
    x = (rng.geometric(0.01, 3000) * 7 + rng.integers(0, 7, 3000)).astype(np.uint64)
    x[::97] = rng.integers(0, 2 ** 64 - 1, len(x[::97]), dtype=np.uint64)
    chunk = compress_chunk(x, NumberKind.U64, CompressorConfig(mode=IntMult(7), delta=NoDelta()))
    decoder = DecoderChunk.from_bytes(chunk.meta)
    page, payload = fmt.parse_page(decoder.meta, chunk.pages[0].data, chunk.pages[0].count)
    return decoder, page, payload, chunk.pages[0].count


@pytest.mark.parametrize("damage", ["intact", "trunc1", "trunc100", "zeros"])
def test_decode_status_agrees(damage):
    from latentpack.entropy import bytes_to_words

    decoder, page, payload, count = _decode_inputs(5)
    payload = {"intact": payload, "trunc1": payload[:-1], "trunc100": payload[:-100],
               "zeros": bytes(len(payload))}[damage]
    results = []
    for mod in (_nb, _np):
        out = np.zeros((2, count), np.uint64)
        status = mod.decode_payload(bytes_to_words(payload), len(payload) * 8, count, 256,
                                    page.states.copy(), *decoder._stacked, out)
        results.append((status, out))
    assert results[0][0] == results[1][0]
    assert (results[0][0] == 0) == (damage == "intact")
    if damage == "intact":
        assert np.array_equal(results[0][1], results[1][1])
