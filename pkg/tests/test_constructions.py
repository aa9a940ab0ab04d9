import pytest
from hypothesis import given
from hypothesis import strategies as st

from kle.constructions import (
    DeKey,
    FfxKey,
    FxKey,
    KeyedConstruction,
    de_dec,
    de_enc,
    em_dec,
    em_enc,
    ffx_eval,
    fx_dec,
    fx_enc,
)
from kle.primitives import IdealCipher, Permutation, RandomFunction, Rng, sample_ideal_cipher, sample_permutation

seeds = st.integers(0, 2**32)


def test_fx_hand_value():
    E = IdealCipher.from_tables([[2, 0, 3, 1]])
    assert fx_enc(E, FxKey(0, 1), 0) == 1


def test_ffx_hand_value():
    H = RandomFunction.from_table([[0, 0, 0, 0], [1, 0, 0, 1]], m=1)
    assert ffx_eval(H, FfxKey(1, 2), 0) == 0


def test_de_hand_value():
    E = IdealCipher.from_tables([[1, 0, 3, 2], [2, 3, 0, 1]])
    assert de_enc(E, DeKey(0, 1), 0) == 3


@given(seeds, st.integers(1, 3), st.integers(1, 6))
def test_fx_round_trip_and_bijective(seed, k, n):
    r = Rng(seed)
    E = sample_ideal_cipher(k, n, r)
    key = FxKey(r.bits(k), r.bits(n))
    N = 1 << n
    ys = [fx_enc(E, key, x) for x in range(N)]
    assert sorted(ys) == list(range(N))
    assert [fx_dec(E, key, y) for y in ys] == list(range(N))


@given(seeds)
def test_fx_zero_whitening_is_single_encryption(seed):
    E = sample_ideal_cipher(2, 4, Rng(seed))
    assert all(fx_enc(E, FxKey(3, 0), x) == E.enc(3, x) for x in range(16))


@given(seeds, st.integers(0, 15))
def test_ffx_whitening_shift(seed, d):
    r = Rng(seed)
    H = RandomFunction(2, 4, 3, r)
    k1, k2 = r.bits(2), r.bits(4)
    for x in range(16):
        assert ffx_eval(H, FfxKey(k1, k2), x) == ffx_eval(H, FfxKey(k1, k2 ^ d), x ^ d)
        assert ffx_eval(H, FfxKey(k1, k2), x) == H(k1, x ^ k2)
    assert all(ffx_eval(H, FfxKey(k1, 0), x) == H(k1, x) for x in range(16))


@given(seeds, st.integers(1, 3), st.integers(1, 6))
def test_de_round_trip_and_bijective(seed, k, n):
    r = Rng(seed)
    E = sample_ideal_cipher(k, n, r)
    key = DeKey(r.bits(k), r.bits(k))
    N = 1 << n
    ys = [de_enc(E, key, x) for x in range(N)]
    assert sorted(ys) == list(range(N))
    assert [de_dec(E, key, y) for y in ys] == list(range(N))


def test_de_identity_inner_key():
    E = IdealCipher.from_tables([[0, 1, 2, 3], [2, 3, 0, 1]])
    assert all(de_enc(E, DeKey(0, 1), x) == E.enc(1, x) for x in range(4))


@given(seeds, st.integers(1, 8))
def test_em_period_property(seed, n):
    r = Rng(seed)
    P = sample_permutation(n, r)
    k2 = 1 + r.randbelow((1 << n) - 1) if n > 0 else 0
    g = [em_enc(P, k2, x) ^ P(x) for x in range(1 << n)]
    assert all(g[x] == g[x ^ k2] for x in range(1 << n))
    assert all(em_dec(P, k2, em_enc(P, k2, x)) == x for x in range(1 << n))


def test_em_zero_key_is_p():
    P = sample_permutation(3, Rng(2))
    assert all(em_enc(P, 0, x) == P(x) for x in range(8))


@pytest.mark.parametrize("call", [
    lambda E, H, P: fx_enc(E, FxKey(0, 16), 0),
    lambda E, H, P: fx_enc(E, FxKey(4, 0), 0),
    lambda E, H, P: fx_dec(E, FxKey(0, 0), 99),
    lambda E, H, P: ffx_eval(H, FfxKey(0, 0), 16),
    lambda E, H, P: de_enc(E, DeKey(0, 4), 0),
    lambda E, H, P: em_enc(P, 8, 0),
])
def test_width_mismatch(call):
    r = Rng(0)
    E, H, P = sample_ideal_cipher(2, 4, r), RandomFunction(2, 4, 2, r), sample_permutation(3, r)
    with pytest.raises(ValueError):
        call(E, H, P)


def test_keyed_construction_dispatch():
    r = Rng(6)
    E = sample_ideal_cipher(2, 3, r)
    fx = KeyedConstruction("fx", E, FxKey(1, 5))
    assert all(fx(x) == fx_enc(E, FxKey(1, 5), x) and fx.inverse(fx(x)) == x for x in range(8))
    E0 = sample_ideal_cipher(0, 3, r)
    em = KeyedConstruction("em", E0, 3)
    assert all(em(x) == em_enc(E0.permutation(0), 3, x) for x in range(8))
    ffx = KeyedConstruction("ffx", RandomFunction(2, 3, 2, r), FfxKey(0, 1))
    assert not ffx.invertible
    with pytest.raises(ValueError):
        ffx.inverse(0)
    with pytest.raises(ValueError):
        KeyedConstruction("triple", E, None)
