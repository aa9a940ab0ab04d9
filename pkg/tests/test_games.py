import itertools
import math

import numpy as np
import pytest
from scipy import stats

from kle.attacks import de_mitm_distinguisher, ffx_exhaustive_distinguisher
from kle.games import (
    Adversary,
    BudgetExceeded,
    Ev,
    GameParams,
    Inv,
    NonAdaptiveViolation,
    O2HSpec,
    Prim,
    Query,
    estimate_advantage,
    hoeffding_half_width,
    reprogram_histogram,
    run_o2h_guess_game,
    run_prf_game,
    run_sprp_game,
    sample_reprogrammed_cipher,
)
from kle.primitives import Rng

FX = GameParams("fx", 1, 2)


def const(bit):
    def strategy(rng):
        return bit
        yield  # pragma: no cover

    return Adversary(strategy, q=0, p=0)


def coin():
    def strategy(rng):
        return rng.bit()
        yield  # pragma: no cover

    return Adversary(strategy, q=0, p=0)


@pytest.mark.parametrize("world", [0, 1])
def test_constant_one_sprp(world):
    assert run_sprp_game("sprp", FX, const(1), world, Rng(world)) == 1


@pytest.mark.parametrize("world", [0, 1])
def test_constant_zero_prf(world):
    assert run_prf_game(GameParams("ffx", 1, 2, 2), const(0), world, Rng(3)) == 0


@pytest.mark.parametrize("world", [0, 1])
def test_prf_answers_consistent(world):
    def strategy(rng):
        a = yield Ev(2)
        b = yield Ev(2)
        return a == b

    adv = Adversary(strategy, q=2, p=0)
    assert all(run_prf_game(GameParams("ffx", 2, 3, 3), adv, world, Rng(s)) == 1 for s in range(50))


def test_coin_advantage_within_ci():
    # meta Monte Carlo: Hoeffding at fail 1e-3 should almost never be exceeded
    inside = 0
    for s in range(100):
        est = estimate_advantage(coin(), FX, trials=500, rng=Rng(s))
        inside += abs(est.advantage) <= est.ci_half_width
    assert inside >= 99


def test_estimate_deterministic():
    a = estimate_advantage(coin(), FX, trials=300, rng=Rng(42))
    b = estimate_advantage(coin(), FX, trials=300, rng=Rng(42))
    assert a == b


def test_estimate_parallel_matches_serial():
    a = estimate_advantage(coin(), FX, trials=200, rng=Rng(4))
    b = estimate_advantage(coin(), FX, trials=200, rng=Rng(4), parallel=2)
    assert (a.p_real, a.p_ideal) == (b.p_real, b.p_ideal)


def test_hoeffding_one_trial():
    assert hoeffding_half_width(1, 1e-3) == pytest.approx(math.sqrt(math.log(2 / 1e-3) / 2))
    with pytest.raises(ValueError):
        hoeffding_half_width(0)


def test_de_mitm_advantage():
    est = estimate_advantage(de_mitm_distinguisher(4, 4), GameParams("de", 4, 4), trials=10_000, rng=Rng(1))
    assert est.advantage >= 0.9
    assert est.flagged == 0


def test_ffx_exhaustive_advantage():
    adv = ffx_exhaustive_distinguisher(2, 2, 16, all_points=True)
    est = estimate_advantage(adv, GameParams("ffx", 2, 2, 4), trials=10_000, rng=Rng(1), game="prf")
    assert est.advantage >= 0.8


def test_budget_exceeded():
    def strategy(rng):
        yield Ev(0)
        yield Ev(1)
        return 1

    adv = Adversary(strategy, q=1, p=0)
    with pytest.raises(BudgetExceeded):
        run_sprp_game("sprp", FX, adv, 1, Rng(0))
    est = estimate_advantage(adv, FX, trials=10, rng=Rng(0))
    assert est.flagged == 20 and est.p_real == 0


def test_primitive_budget():
    def strategy(rng):
        yield Prim(0, 0)
        return 1

    with pytest.raises(BudgetExceeded):
        run_sprp_game("sprp", FX, Adversary(strategy, q=0, p=0), 0, Rng(0))


def test_non_adaptive_script_enforced():
    def strategy(rng):
        yield Ev(3)
        return 1

    adv = Adversary.non_adaptive(strategy, [0])
    with pytest.raises(NonAdaptiveViolation):
        run_sprp_game("sprp-na", FX, adv, 1, Rng(0))
    with pytest.raises(NonAdaptiveViolation):
        run_sprp_game("sprp-na", FX, Adversary(strategy, q=1, p=0), 1, Rng(0))


@pytest.mark.parametrize("script", [
    (Ev(0), Ev(1), Ev(2)),
    (Ev(0), Inv(0), Ev(3)),
    (Inv(1), Ev(2)),
])
def test_ideal_world_transcript_is_random_permutation(script):
    # exact law: answers of a uniform permutation of {0..3}
    exact = {}
    for perm in itertools.permutations(range(4)):
        inv = {y: x for x, y in enumerate(perm)}
        t = tuple(perm[a.x] if isinstance(a, Ev) else inv[a.y] for a in script)
        exact[t] = exact.get(t, 0) + 1 / 24
    seen = []

    def strategy(rng):
        answers = []
        for a in script:
            answers.append((yield a))
        seen.append(tuple(answers))
        return 0

    adv = Adversary(strategy, q=len(script), p=0)
    runs = 24_000
    for s in range(runs):
        run_sprp_game("sprp", FX, adv, 0, Rng(s, 7))
    keys = sorted(exact)
    observed = [sum(1 for t in seen if t == key) for key in keys]
    assert sum(observed) == runs
    assert stats.chisquare(observed, [exact[key] * runs for key in keys]).pvalue > 1e-3


def test_reprogram_empty_script():
    s = sample_reprogrammed_cipher(((), ()), 1, 2, Rng(0))
    assert s.T == {}
    assert np.array_equal(s.f0.table, s.f1.table)


@pytest.mark.parametrize("script", [((0,), ()), ((0,), (1,)), ((0, 3), (2,)), ((), (1, 2))])
def test_reprogram_invariants(script):
    for seed in range(200):
        s = sample_reprogrammed_cipher(script, 2, 3, Rng(seed))
        for m, y in s.T.items():
            assert s.f1.enc(s.K1, m ^ s.K2) ^ s.K2 == y
        for key in range(4):
            assert sorted(s.f1.table[key].tolist()) == list(range(8))
            if key != s.K1:
                assert np.array_equal(s.f1.table[key], s.f0.table[key])
        for x in set(range(8)) - (s.I_set | s.I_prime):
            assert s.f1.enc(s.K1, x) == s.f0.enc(s.K1, x)


def test_reprogram_collision():
    with pytest.raises(ValueError):
        sample_reprogrammed_cipher(((1, 1), ()), 1, 2, Rng(0))


def test_reprogram_uniform_small():
    counts = reprogram_histogram(((0,), ()), 1, 2, 48_000, Rng(5))
    assert len(counts) == 24
    assert stats.chisquare(list(counts.values())).pvalue > 1e-3


def _spec(S=(), Sp=()):
    return O2HSpec(frozenset(S), frozenset(Sp), lambda x: x, lambda x: x)


def test_o2h_fixed_point_in_s():
    def strategy(rng):
        yield Query(0, 5)

    assert all(run_o2h_guess_game(_spec(S={5}), strategy, 1, Rng(s)) for s in range(20))


def test_o2h_empty_sets():
    def strategy(rng):
        for x in range(4):
            yield Query(x % 2, x)

    assert not any(run_o2h_guess_game(_spec(), strategy, 4, Rng(s)) for s in range(50))


def test_o2h_halting_early_is_false():
    def strategy(rng):
        yield Query(0, 1)

    hits = sum(run_o2h_guess_game(_spec(S={1}), strategy, 5, Rng(s)) for s in range(2000))
    assert 300 < hits < 500  # index 1 picked w.p. 1/5


def test_o2h_uniform_queries():
    N, s, p, trials = 32, 3, 4, 100_000
    S = set(range(s))

    def strategy(rng):
        for _ in range(p):
            yield Query(0, rng.randbelow(N))

    hits = sum(run_o2h_guess_game(_spec(S=S), strategy, p, Rng(t)) for t in range(trials))
    mu = s / N
    sigma = math.sqrt(mu * (1 - mu) / trials)
    assert abs(hits / trials - mu) <= 3 * sigma
