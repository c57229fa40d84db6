import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latentpack.errors import CorruptLatents, InvalidConfig
from latentpack.kinds import NumberKind
from latentpack.modes import (Classic, FloatMult, FloatQuant, IntMult, LatentVars, classic_to_latent, join,
                              latent_to_classic, parse_mode, split, validate_mode)

F32, F64, U64, I32 = NumberKind.F32, NumberKind.F64, NumberKind.U64, NumberKind.I32


def test_float_latents_match_bit_table():
    assert classic_to_latent(np.float32(2.0), F32)[()] == 0b11 << 30
    assert classic_to_latent(np.float32(-2.0), F32)[()] == (1 << 30) - 1
    assert latent_to_classic(np.uint32(1 << 31), F32)[()] == 0.0
    assert not np.signbit(latent_to_classic(np.uint32(1 << 31), F32)[()])


def test_integer_latents():
    assert classic_to_latent(np.int32(-1), I32)[()] == 0x7FFF_FFFF
    assert classic_to_latent(np.uint64(12345), U64)[()] == 12345
    assert latent_to_classic(np.uint64(0), U64)[()] == 0


@pytest.mark.parametrize("kind", list(NumberKind))
def test_classic_round_trip_random_bit_patterns(kind):
    rng = np.random.default_rng(kind.value)
    bits = rng.integers(0, np.iinfo(np.uint64).max, 1_000_000, dtype=np.uint64, endpoint=True)
    x = bits.astype(kind.latent_dtype).view(kind.dtype)
    back = latent_to_classic(classic_to_latent(x, kind), kind)
    assert back.tobytes() == x.tobytes()


@pytest.mark.parametrize("kind", list(NumberKind))
def test_classic_latents_preserve_order(kind):
    rng = np.random.default_rng(1)
    if kind.is_float:
        x = np.concatenate([rng.normal(0, 1e6, 10_000), [0.0, -0.0, np.inf, -np.inf]]).astype(kind.dtype)
        order_x = np.lexsort((~np.signbit(x), x))  # -0.0 sorts before +0.0
    else:
        info = np.iinfo(kind.dtype)
        x = rng.integers(info.min, info.max, 10_000, dtype=kind.dtype, endpoint=True)
        order_x = np.argsort(x, kind="stable")
    lat = classic_to_latent(x, kind)
    assert np.array_equal(lat[np.argsort(lat, kind="stable")], lat[order_x])


def test_nan_latents_sit_at_the_ends():
    x = np.array([np.nan, -np.nan, 1.0, -1.0, np.inf, -np.inf], np.float64)
    lat = classic_to_latent(x, F64)
    assert lat[0] > lat[4] > lat[2]
    assert lat[1] < lat[5] < lat[3]


def test_int_mult_examples():
    lv = split(np.array([108, 707], np.uint64), IntMult(101), U64)
    assert lv.primary.tolist() == [1, 7]
    assert lv.secondary.tolist() == [7, 0]
    assert join(LatentVars(np.array([1], np.uint64), np.array([7], np.uint64)), IntMult(101), U64).tolist() == [108]


def test_float_quant_zero_low_bits_give_zero_secondary():
    x = np.array([1.5, -3.25, 65504.0, -0.0, 0.0], np.float16).astype(np.float32)
    lv = split(x, FloatQuant(13), F32)
    assert not lv.secondary.any()
    assert join(lv, FloatQuant(13), F32).tobytes() == x.tobytes()


def test_classic_has_no_secondary():
    lv = split(np.array([3.5, -1.25]), Classic(), F64)
    assert lv.secondary is None
    assert np.array_equal(lv.primary, classic_to_latent(np.array([3.5, -1.25]), F64))


def test_float_mult_exact_multiples_have_constant_secondary():
    x = np.round(np.random.default_rng(0).normal(0, 100, 1000), 2)
    lv = split(x, FloatMult(0.01), F64)
    # rounding noise keeps the adjustment within a few ULPs of the bias
    bias = 1 << 63
    dev = lv.secondary.astype(object) - bias
    assert max(abs(int(d)) for d in dev) <= 2
    assert join(lv, FloatMult(0.01), F64).tobytes() == x.tobytes()


def test_join_rejects_length_mismatch():
    with pytest.raises(CorruptLatents):
        join(LatentVars(np.zeros(3, np.uint64), np.zeros(2, np.uint64)), IntMult(3), U64)
    with pytest.raises(CorruptLatents):
        join(LatentVars(np.zeros(3, np.uint64)), IntMult(3), U64)


@pytest.mark.parametrize("mode,kind", [(IntMult(3), F32), (FloatMult(0.1), U64), (FloatQuant(0), F32),
                                       (FloatQuant(23), F32), (FloatMult(0.0), F64), (FloatMult(np.inf), F64),
                                       (IntMult(1), U64)])
def test_inapplicable_modes_rejected(mode, kind):
    with pytest.raises(InvalidConfig):
        validate_mode(mode, kind)


def test_parse_mode():
    assert parse_mode("intmult:101") == IntMult(101)
    assert parse_mode("floatmult:0.01") == FloatMult(0.01)
    assert parse_mode("floatquant:13") == FloatQuant(13)
    assert parse_mode("classic") == Classic()
    with pytest.raises(InvalidConfig):
        parse_mode("intmult:x")


_bits64 = st.integers(0, 2 ** 64 - 1)


@settings(max_examples=200, deadline=None)
@given(st.lists(_bits64, min_size=1, max_size=50), st.sampled_from(list(NumberKind)), st.data())
def test_split_join_bijective(bits, kind, data):
    x = np.array(bits, np.uint64).astype(kind.latent_dtype).view(kind.dtype)
    if kind.is_float:
        mode = data.draw(st.one_of(
            st.just(Classic()),
            st.integers(1, kind.mantissa_bits - 1).map(FloatQuant),
            st.sampled_from([0.1, 0.5, 3.0, 1e-20, 1e20, -0.25]).map(FloatMult)))
    else:
        mode = data.draw(st.one_of(st.just(Classic()),
                                   st.integers(2, 2 ** kind.bits - 1).map(IntMult)))
    lv = split(x, mode, kind)
    assert join(lv, mode, kind).tobytes() == x.tobytes()
    if isinstance(mode, IntMult):
        assert (lv.secondary < mode.m).all()
    if isinstance(mode, FloatQuant):
        assert (lv.secondary < (1 << mode.k)).all()
        assert (lv.primary < (1 << (kind.bits - mode.k))).all()
