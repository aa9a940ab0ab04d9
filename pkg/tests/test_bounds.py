import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kle.bounds import FORMULAS, amplification_repetitions, eval_bound, invert_bound, lg


def test_fx_na_example():
    r = eval_bound("fx_na", k=128, n=128, p=2**80, q=2**64)
    assert r.log2_value == pytest.approx(-14.5)
    assert r.value == pytest.approx(4.3158e-5, rel=1e-4)
    assert not r.vacuous


def test_fx_na_zero_queries():
    assert eval_bound("fx_na", k=8, n=8, p=16, q=0).value == 0


def test_fx_na_small_vacuous():
    r = eval_bound("fx_na", k=4, n=4, p=4, q=4)
    assert r.value == pytest.approx(math.sqrt(2))
    assert r.vacuous


def test_de_example():
    r = eval_bound("de", k=64, q=2**20)
    main = 11 * ((2**20 * 64 * math.log2(64)) ** 3 / 2.0**128) ** (1 / 6)
    assert r.value == pytest.approx(main + 2**-64, rel=1e-12)
    assert r.value == pytest.approx(0.0836, abs=1e-4)


def test_ffx_and_kr_values():
    assert eval_bound("ffx", k=1, n=1, p=1, q=1).value == pytest.approx(math.sqrt(8 * 2 / 4))
    assert eval_bound("kr_classical", k=4, n=4, p=16, q=2).value == pytest.approx(16 * 2 / 2**7)


def test_list_formulas():
    assert eval_bound("eds", q=10, D=64).value == pytest.approx(9 * 12**3 / 64**2)
    assert eval_bound("lds", q=10, D=64).value == pytest.approx(2 * 9 * 12**3 / 64**2)
    assert eval_bound("lds", adv_eds=0.1).value == pytest.approx(0.2)
    assert eval_bound("ld", q=4, D=32).value == pytest.approx(
        11 * ((4 * 5 * math.log2(5)) ** 3 / 32**2) ** (1 / 6))
    assert eval_bound("de_red", k=10, adv_ld=0.25).value == pytest.approx(0.25 + 2**-10)
    assert eval_bound("o2h", q=3, guess=0.01).value == pytest.approx(0.6)


def test_lower_bounds():
    r = eval_bound("ldd", D=16, R=768, adv_ldd=1.0)
    assert r.value == pytest.approx(1 - 256 / 768) and r.kind == "lower" and not r.vacuous
    assert eval_bound("ldd", D=16, R=16, adv_ldd=0.5).vacuous
    r = eval_bound("amp", t=3, delta=0.4, q=5)
    assert r.value == pytest.approx(0.75)
    assert r.extra == {"repetitions": 78, "cost": 390}
    assert amplification_repetitions(3, 0.4) == 78


@pytest.mark.parametrize("formula,inputs", [
    ("ld", {"q": 4, "D": 16}),
    ("ld", {"q": 4, "D": 48}),
    ("eds", {"q": 4, "D": 8}),
    ("de", {"k": 1, "q": 4}),
    ("fx_na", {"k": 4, "n": 4, "p": 4}),
    ("fx_na", {"k": 4, "n": 4, "p": -1, "q": 2}),
    ("amp", {"t": 3, "delta": 0}),
    ("o2h", {"q": 1, "guess": 2}),
    ("nope", {}),
])
def test_domain_errors(formula, inputs):
    with pytest.raises(ValueError):
        eval_bound(formula, **inputs)


def test_no_clamping():
    assert eval_bound("fx_na", k=1, n=1, p=2**20, q=2**20).value > 1e9


def test_invert_intro_example():
    p = invert_bound("fx_na", 1, "p", k=128, n=128, q=2**64)
    assert lg(p) == pytest.approx(94.5, abs=0.01)


def test_invert_zero_target():
    assert invert_bound("fx_na", 0, "p", k=8, n=8, q=4) == 0


def test_invert_ld_scaling():
    # 11 * sqrt(q lgD lglgD) / D^(1/3) = 1 gives q = D^(2/3) / (121 lgD lglgD)
    D = 2**20
    q = invert_bound("ld", 1, "q", D=D)
    closed = D ** (2 / 3) / (121 * 20 * math.log2(20))
    assert q / 4 <= closed <= 4 * q


def test_invert_unreachable():
    with pytest.raises(ValueError):
        invert_bound("o2h", 10, "q", hi=4, guess=0.0001)


small = st.integers(0, 2**40)
pos = st.integers(1, 2**40)

MONOTONE = {
    "fx_na": ("p", "q"), "ffx": ("p", "q"), "kr_classical": ("p", "q"),
    "de": ("q",), "ld": ("q",), "eds": ("q",), "lds": ("q",), "o2h": ("q",),
}

BASE = {
    "fx_na": {"k": 64, "n": 64}, "ffx": {"k": 64, "n": 64}, "kr_classical": {"k": 64, "n": 64},
    "de": {"k": 32}, "ld": {"D": 2**16}, "eds": {"D": 2**16}, "lds": {"D": 2**16}, "o2h": {"guess": 0.001},
}


@given(st.sampled_from(sorted(MONOTONE)), small, small, st.integers(0, 2**20))
def test_monotone_in_p_and_q(formula, p, q, bump):
    base = dict(BASE[formula], p=p, q=q)
    v = eval_bound(formula, **base).value
    for var in MONOTONE[formula]:
        assert eval_bound(formula, **dict(base, **{var: base[var] + bump})).value >= v


@given(st.sampled_from(["fx_na", "ffx", "kr_classical"]), pos, pos)
def test_eval_invert_round_trip(formula, p, q):
    base = {"k": 40, "n": 40, "q": q}
    target = eval_bound(formula, p=p, **base).value
    got = invert_bound(formula, target, "p", **base)
    assert abs(got - p) <= 1


def test_formula_list():
    assert set(FORMULAS) == {"fx_na", "ffx", "de", "de_red", "ld", "eds", "lds", "ldd", "amp", "o2h",
                             "kr_classical"}
