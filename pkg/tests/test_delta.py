import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latentpack import _accel
from latentpack.delta import (Consecutive, Lookback, NoDelta, choose_delta_encoding, delta_decode, delta_encode,
                              detection_sample, parse_delta)
from latentpack.errors import CorruptPage, InvalidConfig
from latentpack.kinds import NumberKind
from latentpack.modes import Classic

BIAS64 = np.uint64(1 << 63)


def test_consecutive_first_order_example():
    state, t, extra = delta_encode(np.array([10, 12, 11], np.uint64), Consecutive(1))
    assert state.tolist() == [10]
    assert (t.astype(object) - (1 << 63)).tolist() == [2, -1]
    assert extra is None


@pytest.mark.parametrize("order", range(1, 8))
def test_consecutive_annihilates_low_degree_polynomials(order):
    i = np.arange(500, dtype=np.int64)
    poly = sum((i ** d) * (d + 3) for d in range(order))  # degree order - 1
    _, t, _ = delta_encode(poly.astype(np.uint64), Consecutive(order))
    assert (t == BIAS64).all()


def _lookback_oracle(y, window):
    """Exhaustive search over the window for the smallest delta bit length,
    smaller lookback on ties."""
    mask = (1 << 64) - 1
    out = []
    for i in range(1, len(y)):
        def cost(l):
            d = (int(y[i]) - int(y[i - l])) & mask
            d = min(d, mask - d + 1 - 1) if d >= 1 << 63 else d
            return d.bit_length()
        out.append(min(range(1, min(i, window) + 1), key=lambda l: (cost(l), l)))
    return out


def test_lookback_period_two_example():
    y = np.array([5, 9, 5, 9, 5], np.uint64)
    state, t, extra = delta_encode(y, Lookback(8))
    assert state.tolist() == [5]
    assert extra.tolist()[1:] == [2, 2, 2]
    assert (t[1:] == BIAS64).all()
    assert _lookback_oracle(y, 8)[1:] == [2, 2, 2]


def test_lookback_finds_exact_repeats_like_exhaustive_search(backend):
    rng = np.random.default_rng(4)
    pattern = rng.integers(0, 1 << 60, 7, dtype=np.uint64)
    y = np.tile(pattern, 40)
    _, t, extra = delta_encode(y, Lookback(64))
    oracle = _lookback_oracle(y, 64)
    # after the first period every position has an exact match 7 back
    assert extra[6:].tolist() == oracle[6:]
    assert (t[6:] == BIAS64).all()


def test_lookback_never_worse_than_previous_element(backend):
    rng = np.random.default_rng(5)
    y = rng.integers(0, 1 << 20, 3000, dtype=np.uint64)
    _, t, extra = delta_encode(y, Lookback(256))
    assert ((extra >= 1) & (extra <= 256)).all()
    mask = (1 << 64) - 1

    def bits(d):
        d = int(d) & mask
        return (mask - d if d >= 1 << 63 else d).bit_length()

    for i in range(1, len(y)):
        chosen = bits(int(t[i - 1]) - (1 << 63))
        assert chosen <= bits(int(y[i]) - int(y[i - 1]))


@pytest.mark.parametrize("encoding", [NoDelta(), Consecutive(1), Consecutive(3), Consecutive(7), Lookback(2),
                                      Lookback(256)])
@pytest.mark.parametrize("dtype", [np.uint32, np.uint64])
def test_round_trip_with_wraparound(encoding, dtype, backend):
    rng = np.random.default_rng(9)
    top = np.iinfo(dtype).max
    y = np.concatenate([rng.integers(0, top, 20_000, dtype=dtype, endpoint=True),
                        np.array([0, top, 0, top, 1, top - 1], dtype)])
    state, t, extra = delta_encode(y, encoding)
    assert np.array_equal(delta_decode(state, t, extra, encoding), y)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 6])
def test_short_inputs_round_trip(n):
    y = np.arange(n, dtype=np.uint64) * 1000 + 17
    for enc in (Consecutive(1), Consecutive(4), Consecutive(7), Lookback(4)):
        state, t, extra = delta_encode(y, enc)
        assert np.array_equal(delta_decode(state, t, extra, enc, n=n), y)


def test_lookback_out_of_history_is_corrupt():
    with pytest.raises(CorruptPage):
        delta_decode(np.array([1], np.uint64), np.array([BIAS64, BIAS64], np.uint64),
                     np.array([1, 3], np.uint64), Lookback(8))
    with pytest.raises(CorruptPage):
        delta_decode(np.array([1], np.uint64), np.array([BIAS64], np.uint64), np.array([9], np.uint64),
                     Lookback(8))


@pytest.mark.parametrize("bad", [lambda: Consecutive(0), lambda: Consecutive(8), lambda: Lookback(1),
                                 lambda: Lookback(257)])
def test_parameter_bounds(bad):
    with pytest.raises(InvalidConfig):
        bad()


def test_parse_delta():
    assert parse_delta("none") == NoDelta()
    assert parse_delta("consecutive:2") == Consecutive(2)
    assert parse_delta("lookback") == Lookback(256)
    with pytest.raises(InvalidConfig):
        parse_delta("consecutive:9")


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 2 ** 64 - 1), max_size=60),
       st.one_of(st.integers(1, 7).map(Consecutive), st.integers(2, 256).map(Lookback), st.just(NoDelta())))
def test_delta_round_trip_property(values, encoding):
    y = np.array(values, np.uint64)
    state, t, extra = delta_encode(y, encoding)
    assert np.array_equal(delta_decode(state, t, extra, encoding, n=len(y)), y)


def test_detection_sample_is_runs_of_consecutive_numbers():
    x = np.arange(100_000)
    s = detection_sample(x, seed=3)
    assert len(s) == 1000
    runs = s.reshape(10, 100)
    assert (np.diff(runs, axis=1) == 1).all()
    assert np.array_equal(s, detection_sample(x, seed=3))


def test_periodic_noisy_data_prefers_lookback():
    rng = np.random.default_rng(0)
    # three interleaved random walks far apart: only a lag-3 reference is close
    walks = np.cumsum(rng.integers(-50, 51, (20_000, 3)), axis=0) + rng.integers(0, 1 << 40, 3)
    x = walks.ravel().astype(np.int64)
    assert choose_delta_encoding(x, Classic(), NumberKind.I64, seed=1) == Lookback()


def test_early_stop_evaluation_order(monkeypatch):
    import latentpack.pipeline as pipeline

    seen = []
    real = pipeline.compress_chunk

    def spy(numbers, kind, config):
        seen.append(config.delta)
        return real(numbers, kind, config)

    monkeypatch.setattr(pipeline, "compress_chunk", spy)
    rng = np.random.default_rng(1)
    walk = np.cumsum(rng.integers(-100, 101, 5000))
    assert choose_delta_encoding(walk, Classic(), NumberKind.I64, seed=0) == Consecutive(1)
    # None, order 1, order 2 (worse than 1, so stop), then Lookback
    assert seen == [NoDelta(), Consecutive(1), Consecutive(2), Lookback()]
