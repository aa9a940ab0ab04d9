import itertools
import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kle.attacks import de_mitm_distinguisher
from kle.listdis import (
    CountingList,
    EdInstance,
    LdInstance,
    QueryCounter,
    ReductionCipher,
    amplification_runs,
    amplify_decision,
    binary_search_lds,
    brute_force_search,
    chain_search,
    check_ld_promise,
    collision_pairs,
    de_to_ld_adversary,
    ed_relation,
    gen_instance,
    ld_decision_alg,
    ld_relation,
    ld_search_alg,
    naive_search,
    reduce_eds_from_lds,
)
from kle.primitives import IdealCipher, Permutation, Rng, sample_ideal_cipher, sample_permutation

import oracles


@pytest.mark.parametrize("seed", range(20))
def test_ld_class0_disjoint(seed):
    inst = gen_instance("1LD", 4, 48, 0, Rng(seed))
    assert not set(inst.L0) & set(inst.L1)
    assert check_ld_promise(inst)


@pytest.mark.parametrize("seed", range(20))
def test_ld_class1_single_witness(seed):
    inst = gen_instance("1LD", 8, 48, 1, Rng(seed))
    pairs = [(x, y) for x in range(4) for y in range(4) if inst.L0[x] == inst.L1[y]]
    assert len(pairs) == 1
    assert check_ld_promise(inst)


def test_ed_acceptance_rate_meets_lower_bound():
    D, R, n = 32, 3 * 32 ** 2, 5000
    r = Rng(17)
    attempts = sum(gen_instance("1ED", D, R, 1, r.child(i)).attempts for i in range(n))
    rate = n / attempts
    bound = (1 - 1 / D) * (1 - 1 / (3 * D)) * (5 / 6) / 6
    sigma = math.sqrt(rate * (1 - rate) / attempts)
    assert rate >= bound - 3 * sigma


def test_ed_instance_classes():
    for s in range(30):
        inst = gen_instance("1ED", 16, 40, s % 2, Rng(s))
        assert collision_pairs(inst.L) == inst.cls == s % 2
        assert all(1 <= v <= 40 for v in inst.L)


@pytest.mark.parametrize("args", [("1LD", 3, 10, 0), ("1LD", 4, 2, 1), ("1ED", 4, 10, 2), ("XX", 4, 4, 0),
                                  ("1ED", 5, 4, 0)])
def test_gen_instance_infeasible(args):
    with pytest.raises(ValueError):
        gen_instance(*args, Rng(0))


def test_brute_force_matches_naive():
    r = Rng(3)
    for i in range(1000):
        c = r.child(i)
        if i % 2:
            inst = gen_instance("1LD", 8, 20, i % 4 // 2, c)
            got, want = brute_force_search(inst), naive_search(inst)
            assert got == want
            assert (got is not None) == (inst.cls == 1)
            if got:
                assert ld_relation(inst.L0, inst.L1, got)
        else:
            inst = gen_instance("ED", 8, 20, None, c)
            got, want = brute_force_search(inst), naive_search(inst)
            assert (got is None) == (want is None) == (inst.cls == 0)
            if got:
                assert ed_relation(inst.L, got)


def test_split_class0_returns_none():
    inst = gen_instance("1ED", 16, 100, 0, Rng(0))
    assert reduce_eds_from_lds(ld_search_alg, inst, Rng(1)) is None


def test_split_witness_valid_and_rate():
    D, hits, runs = 32, 0, 2000
    for s in range(runs):
        r = Rng(s)
        inst = gen_instance("1ED", D, 3 * D * D, 1, r.child(0))
        w = reduce_eds_from_lds(ld_search_alg, inst, r.child(1))
        if w is not None:
            assert ed_relation(inst.L, w)
            hits += 1
    exact = (D / 2) / (D - 1)
    assert abs(hits / runs - exact) <= 3 * math.sqrt(exact * (1 - exact) / runs)


def test_split_query_count_is_inner_count():
    def five(L0, L1, rng):
        for i in range(3):
            L0[i]
        L1[0], L1[1]
        return None

    counter = QueryCounter()
    reduce_eds_from_lds(five, gen_instance("1ED", 8, 50, 1, Rng(0)), Rng(1), counter)
    assert counter.count == 5


def test_counting_list_padding_is_free():
    c = QueryCounter()
    v = CountingList([5, 6, 7, 8], c, domain=range(1, 3), pad=[10, 11, 12, 13])
    assert list(v) == [10, 6, 7, 13]
    assert c.count == 2


def test_binary_search_d2():
    inst = LdInstance(2, 4, (3,), (3,), 1)
    tr = binary_search_lds(ld_decision_alg, inst.L0, inst.L1, Rng(0), 4)
    assert tr.witness == (0, 0) and tr.rounds == 0 and tr.queries == 0


@given(st.integers(0, 2**32), st.sampled_from([4, 8, 16, 32]))
def test_binary_search_query_budget(seed, D):
    r = Rng(seed)
    R = 3 * D * D
    inst = gen_instance("1LD", D, R, 1, r.child(0))
    tr = binary_search_lds(ld_decision_alg, inst.L0, inst.L1, r.child(1), R)
    q_ldd = D  # the brute-force decision reads both lists once
    assert tr.queries <= 3 * q_ldd * math.log2(D)
    assert tr.decision_calls == 3 * tr.rounds == 3 * int(math.log2(D) - 1)


def test_binary_search_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        binary_search_lds(ld_decision_alg, [1, 2, 3], [4, 5, 6], Rng(0), 20)


def test_amplification_runs():
    assert amplification_runs(3, 0.4) == 78
    assert amplification_runs(3, 1.0) == math.ceil(4.5 * 4 * math.log(2))


def test_amplify_deterministic_base():
    calls = []

    def base(L, rng):
        calls.append(1)
        return L

    for bit in (0, 1):
        calls.clear()
        assert amplify_decision(base, 1.0, 0.0, 3, bit, Rng(0)) == bit
        assert len(calls) == 13


def test_amplify_rejects_nonpositive_delta():
    with pytest.raises(ValueError):
        amplify_decision(lambda L, r: 1, 0.0, 0.0, 3, None, Rng(0))


def test_chain_solves_ed():
    D, R = 16, 3 * 16 * 16
    ok = 0
    for s in range(200):
        r = Rng(s)
        inst = gen_instance("1ED", D, R, 1, r.child(0))
        w = chain_search(inst, R, r.child(1))
        if w is not None and ed_relation(inst.L, w):
            ok += 1
    # split (8/15) times binary search (>= 1 - D^2/R = 2/3)
    p = (8 / 15) * (2 / 3)
    assert ok / 200 >= p - 3 * math.sqrt(p * (1 - p) / 200)


def test_ld_json_round_trip():
    inst = gen_instance("1LD", 8, 30, 1, Rng(2))
    back = LdInstance.from_json(inst.to_json())
    assert back == inst


@given(st.integers(0, 2**32))
def test_reduction_cipher_inverse_k2_n3(seed):
    r = Rng(seed)
    inst = gen_instance("1LD", 4, 8, seed % 2, r.child(0))
    E = ReductionCipher(inst, 2, 3, sample_permutation(2, r.child(1)), sample_permutation(3, r.child(2)),
                        sample_ideal_cipher(3, 3, r.child(3)))
    for K in range(4):
        assert sorted(E.enc(K, x) for x in range(8)) == list(range(8))
        assert all(E.dec(K, E.enc(K, x)) == x for x in range(8))


@given(st.integers(0, 2**32))
def test_reduction_colliding_keys_compose_to_pi(seed):
    r = Rng(seed)
    inst = gen_instance("1LD", 8, 16, 1, r.child(0))
    rho, pi = sample_permutation(3, r.child(1)), sample_permutation(3, r.child(2))
    E = ReductionCipher(inst, 3, 3, rho, pi, sample_ideal_cipher(4, 3, r.child(3)))
    x, y = brute_force_search(inst)
    K = rho.inverse((0 << 2) | x)
    Kp = rho.inverse((1 << 2) | y)
    assert all(E.enc(Kp, E.enc(K, v)) == pi(v) for v in range(8))


def test_reduction_cipher_parameter_checks():
    inst = gen_instance("1LD", 4, 8, 0, Rng(0))
    with pytest.raises(ValueError):
        ReductionCipher(inst, 3, 2, None, None, None)
    small = LdInstance(4, 3, (1, 2), (3, 1), 1)
    with pytest.raises(ValueError):
        ReductionCipher(small, 2, 2, None, None, None)


def reduction_distribution(inst):
    """Exact law of the 24 single-query answers over (rho, pi, F)."""
    dist = defaultdict(float)
    rhos = [Permutation.from_table(t, 1) for t in ([0, 1], [1, 0])]
    pis = [Permutation.from_table(t, 2) for t in oracles.PERMS4]
    w = 1 / (2 * 24 * 24 * 24)
    for F0, F1 in itertools.product(oracles.PERMS4, repeat=2):
        F = IdealCipher.from_tables([F0, F1])
        for rho in rhos:
            for pi in pis:
                E = ReductionCipher(inst, 1, 2, rho, pi, F)
                ev = tuple(pi.table.tolist())
                ic = tuple(tuple(E.enc(K, x) for x in range(4)) for K in range(2))
                ici = tuple(tuple(E.dec(K, y) for y in range(4)) for K in range(2))
                dist[oracles.answer_vector(ev, oracles._inverse(ev), ic, ici)] += w
    return dist


CLASS0 = [LdInstance(2, 2, (1,), (2,), 0), LdInstance(2, 2, (2,), (1,), 0)]
CLASS1 = [LdInstance(2, 2, (1,), (1,), 1), LdInstance(2, 2, (2,), (2,), 1)]


def script_marginals(dist, length):
    keys = list(dist)
    A = np.array(keys, dtype=np.int64)
    w = np.array([dist[k] for k in keys])
    out = {}
    for script in itertools.product(range(24), repeat=length):
        code = np.zeros(len(keys), dtype=np.int64)
        for pos in script:
            code = code * 4 + A[:, pos]
        out[script] = np.bincount(code, weights=w, minlength=4 ** length)
    return out


@pytest.fixture(scope="module")
def worlds():
    return oracles.h0_world(), oracles.h1_world()


@pytest.mark.parametrize("inst,world", [(i, 0) for i in CLASS0] + [(i, 1) for i in CLASS1])
def test_reduction_matches_world_exactly(inst, world, worlds):
    red = reduction_distribution(inst)
    ref = worlds[world]
    assert oracles.total_variation(red, ref) <= 1e-9
    for length in (1, 2):
        a, b = script_marginals(red, length), script_marginals(ref, length)
        assert max(np.abs(a[s] - b[s]).sum() / 2 for s in a) <= 1e-9


def test_reduction_class0_differs_from_real_world(worlds):
    red = reduction_distribution(CLASS0[0])
    assert oracles.total_variation(red, worlds[1]) > 0.1


def test_de_to_ld_with_mitm():
    adv = de_mitm_distinguisher(2, 4)
    ones = [0, 0]
    for s in range(200):
        r = Rng(s)
        for cls in (0, 1):
            inst = gen_instance("1LD", 4, 16, cls, r.child(cls))
            ones[cls] += de_to_ld_adversary(adv, inst, 2, 4, r.child(10 + cls))
    assert ones[1] == 200
    assert ones[0] < 100


def test_de_to_ld_parameter_mismatch():
    inst = gen_instance("1LD", 4, 16, 0, Rng(0))
    with pytest.raises(ValueError):
        de_to_ld_adversary(de_mitm_distinguisher(3, 4), inst, 3, 4, Rng(0))


def test_ed_instance_json():
    inst = EdInstance(3, 5, (1, 2, 1), 1)
    assert '"problem": "ED"' in inst.to_json()
