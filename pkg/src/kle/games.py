"""Classical simulation of the SPRP, PRF and O2H guessing games.

An adversary is a generator function ``strategy(rng)`` that yields query
actions and finally returns its output bit::

    def strategy(rng):
        y = yield Ev(0)
        z = yield Prim(0, 3)
        return int(y == z)

The runner feeds back each answer with ``send``.  Budgets are enforced by
the runner, never trusted to the adversary.
"""

from __future__ import annotations

import json
import math
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

from .constructions import DeKey, FfxKey, FxKey, de_dec, de_enc, ffx_eval, fx_dec, fx_enc
from .primitives import IdealCipher, RandomFunction, Rng


class Ev(NamedTuple):
    x: int


class Inv(NamedTuple):
    y: int


class Prim(NamedTuple):
    key: int
    x: int
    inverse: bool = False


class QuantumAccess(NamedTuple):
    """Ask for the whole primitive as a table, charged as ``queries`` quantum queries.

    Stands in for superposition access: a simulated quantum adversary builds
    its oracle unitaries from the table and declares how many it applies.
    """

    queries: int


class BudgetExceeded(RuntimeError):
    pass


class NonAdaptiveViolation(RuntimeError):
    pass


@dataclass
class Adversary:
    strategy: Callable
    q: int
    p: int
    script: tuple | None = None  # (M_1..M_q', Y_q'+1..Y_q) for non-adaptive play
    name: str = "adversary"

    @classmethod
    def non_adaptive(cls, strategy, ev_points: Iterable[int], inv_points: Iterable[int] = (), p: int = 0, name="na-adversary"):
        ev_points, inv_points = tuple(ev_points), tuple(inv_points)
        return cls(strategy, len(ev_points) + len(inv_points), p, (ev_points, inv_points), name)


@dataclass(frozen=True)
class GameParams:
    kind: str  # fx | de | em | ffx
    k: int
    n: int
    m: int | None = None

    def to_dict(self):
        return {key: v for key, v in self.__dict__.items() if v is not None}


def _sample_key(params: GameParams, rng: Rng):
    if params.kind == "fx":
        return FxKey(rng.bits(params.k), rng.bits(params.n))
    if params.kind == "ffx":
        return FfxKey(rng.bits(params.k), rng.bits(params.n))
    if params.kind == "de":
        return DeKey(rng.bits(params.k), rng.bits(params.k))
    if params.kind == "em":
        return rng.bits(params.n)
    raise ValueError(f"unknown construction {params.kind!r}")


def _drive(adv: Adversary, rng: Rng, ev, inv, prim, prim_handle):
    gen = adv.strategy(rng)
    q_used = p_used = 0
    ev_ok = inv_ok = None
    if adv.script is not None:
        ev_ok, inv_ok = set(adv.script[0]), set(adv.script[1])
    answer = None
    try:
        while True:
            action = gen.send(answer)
            if isinstance(action, Ev):
                q_used += 1
                if q_used > adv.q:
                    raise BudgetExceeded(f"construction budget {adv.q} exceeded")
                if ev_ok is not None and action.x not in ev_ok:
                    raise NonAdaptiveViolation(f"Ev({action.x}) not in the declared script")
                answer = ev(action.x)
            elif isinstance(action, Inv):
                if inv is None:
                    raise ValueError("this game has no inverse oracle")
                q_used += 1
                if q_used > adv.q:
                    raise BudgetExceeded(f"construction budget {adv.q} exceeded")
                if inv_ok is not None and action.y not in inv_ok:
                    raise NonAdaptiveViolation(f"Inv({action.y}) not in the declared script")
                answer = inv(action.y)
            elif isinstance(action, Prim):
                p_used += 1
                if p_used > adv.p:
                    raise BudgetExceeded(f"primitive budget {adv.p} exceeded")
                answer = prim(action)
            elif isinstance(action, QuantumAccess):
                p_used += action.queries
                if p_used > adv.p:
                    raise BudgetExceeded(f"primitive budget {adv.p} exceeded")
                answer = prim_handle
            else:
                raise TypeError(f"unknown action {action!r}")
    except StopIteration as stop:
        return int(bool(stop.value))


def run_sprp_game(kind: str, params: GameParams, adv: Adversary, world: int, rng: Rng) -> int:
    """One run of the SPRP game; ``world=1`` is the real construction.

    ``kind`` is ``sprp`` or ``sprp-na`` (the latter requires a script).
    """
    if kind not in ("sprp", "sprp-na"):
        raise ValueError(f"unknown SPRP game {kind!r}")
    if kind == "sprp-na" and adv.script is None:
        raise NonAdaptiveViolation("sprp-na needs an adversary with a fixed script")
    c = params.kind
    E = IdealCipher(0 if c == "em" else params.k, params.n, rng.child(1))
    key = _sample_key(params, rng.child(2))
    if world:
        if c == "fx":
            ev, inv = (lambda x: fx_enc(E, key, x)), (lambda y: fx_dec(E, key, y))
        elif c == "de":
            ev, inv = (lambda x: de_enc(E, key, x)), (lambda y: de_dec(E, key, y))
        elif c == "em":
            ev = lambda x: E.enc(0, x ^ key) ^ key  # noqa: E731
            inv = lambda y: E.dec(0, y ^ key) ^ key  # noqa: E731
        else:
            raise ValueError(f"{c!r} is not a blockcipher construction")
    else:
        P = IdealCipher(0, params.n, rng.child(3), lazy=True)
        ev, inv = (lambda x: P.enc(0, x)), (lambda y: P.dec(0, y))

    def prim(a: Prim):
        return E.dec(a.key, a.x) if a.inverse else E.enc(a.key, a.x)

    return _drive(adv, rng.child(4), ev, inv, prim, E)


def run_prf_game(params: GameParams, adv: Adversary, world: int, rng: Rng) -> int:
    """One run of the PRF game for FFX over a random oracle H."""
    if params.m is None:
        raise ValueError("PRF game needs an output width m")
    H = RandomFunction(params.k, params.n, params.m, rng.child(1))
    key = _sample_key(GameParams("ffx", params.k, params.n, params.m), rng.child(2))
    if world:
        ev = lambda x: ffx_eval(H, key, x)  # noqa: E731
    else:
        F = RandomFunction(0, params.n, params.m, rng.child(3), lazy=True)
        ev = lambda x: F(0, x)  # noqa: E731

    def prim(a: Prim):
        if a.inverse:
            raise ValueError("a random oracle has no inverse")
        return H(a.key, a.x)

    return _drive(adv, rng.child(4), ev, None, prim, H)


@dataclass
class AdvantageEstimate:
    p_real: float
    p_ideal: float
    advantage: float
    ci_half_width: float
    trials: int
    seed: int
    fail_prob: float = 1e-3
    flagged: int = 0

    def to_dict(self, game: str, params: GameParams | dict) -> dict:
        params = params.to_dict() if hasattr(params, "to_dict") else dict(params)
        return {
            "game": game,
            "params": params,
            "world_probs": {"real": self.p_real, "ideal": self.p_ideal},
            "advantage": self.advantage,
            "ci": self.ci_half_width,
            "trials": self.trials,
            "seed": self.seed,
        }

    def to_json(self, game: str, params) -> str:
        return json.dumps(self.to_dict(game, params), sort_keys=True)


def hoeffding_half_width(trials: int, fail_prob: float = 1e-3) -> float:
    if trials < 1:
        raise ValueError("need at least one trial")
    return math.sqrt(math.log(2 / fail_prob) / (2 * trials))


def _run_one(game, params, adv, world, rng):
    if game == "prf":
        return run_prf_game(params, adv, world, rng)
    return run_sprp_game(game, params, adv, world, rng)


_WORKER_ADV = None


def _set_worker_adversary(adv):
    global _WORKER_ADV
    _WORKER_ADV = adv


def _run_block(args):
    game, params, adv, seed, stream, world, lo, hi = args
    if adv is None:
        adv = _WORKER_ADV
    base = Rng(seed, stream)
    wins = flagged = 0
    for i in range(lo, hi):
        try:
            wins += _run_one(game, params, adv, world, base.child(2 * i + world))
        except BudgetExceeded:
            flagged += 1
    return wins, flagged


def estimate_advantage(adv: Adversary, params: GameParams, trials: int = 10_000, fail_prob: float = 1e-3,
                       rng: Rng | None = None, game: str = "sprp", parallel: int = 1) -> AdvantageEstimate:
    """Monte Carlo estimate of Pr[real=1] - Pr[ideal=1].

    Each trial draws its randomness from its own child stream, so the result
    depends only on the seed, never on ``parallel``.  A trial that exceeds a
    budget is counted as output 0 and flagged.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = rng or Rng(0)
    probs, flagged = [], 0
    for world in (1, 0):
        if parallel > 1 and "fork" in mp.get_all_start_methods():
            # strategies are usually closures, so workers inherit the
            # adversary through fork instead of pickling it
            step = -(-trials // parallel)
            jobs = [(game, params, None, rng.seed, rng.stream, world, lo, min(lo + step, trials))
                    for lo in range(0, trials, step)]
            with ProcessPoolExecutor(max_workers=parallel, mp_context=mp.get_context("fork"),
                                     initializer=_set_worker_adversary, initargs=(adv,)) as pool:
                parts = list(pool.map(_run_block, jobs))
        else:
            parts = [_run_block((game, params, adv, rng.seed, rng.stream, world, 0, trials))]
        probs.append(sum(w for w, _ in parts) / trials)
        flagged += sum(f for _, f in parts)
    p_real, p_ideal = probs
    return AdvantageEstimate(p_real, p_ideal, p_real - p_ideal, hoeffding_half_width(trials, fail_prob),
                             trials, rng.seed, fail_prob, flagged)


# -- reprogrammed cipher ------------------------------------------------------


@dataclass
class ReprogramSample:
    f0: IdealCipher
    f1: IdealCipher
    K1: int
    K2: int
    T: dict
    T_inv: dict
    I_set: frozenset
    O_set: frozenset
    I_prime: frozenset
    O_prime: frozenset
    M: tuple = field(default=())
    Y: tuple = field(default=())

    @property
    def S(self):
        return {(self.K1, x) for x in self.I_set | self.I_prime}

    @property
    def S_prime(self):
        return {(self.K1, y) for y in self.O_set | self.O_prime}

    def check(self) -> None:
        for m, y in self.T.items():
            if self.f1.enc(self.K1, m ^ self.K2) ^ self.K2 != y:
                raise AssertionError(f"f1 is inconsistent with T at M={m}")


def _reprogram_core(ev_pts, inv_pts, k, n, rng: Rng, f0_rows=None):
    """Pure-list implementation of the three sampling steps; returns raw tables."""
    N = 1 << n
    T: dict[int, int] = {}
    Tinv: dict[int, int] = {}
    Ms: list[int] = []
    Ys: list[int] = []
    # Step 1
    for m in ev_pts:
        y = _draw_excluding(N, Ys, rng)
        Ms.append(m)
        Ys.append(y)
        T[m] = y
        Tinv[y] = m
    for y in inv_pts:
        if y in Tinv:
            m = Tinv[y]
        else:
            m = _draw_excluding(N, Ms, rng)
        Ms.append(m)
        Ys.append(y)
        T[m] = y
        Tinv[y] = m
    # Step 2
    if f0_rows is None:
        f0_rows = []
        for _ in range(1 << k):
            row = list(range(N))
            rng.shuffle(row)
            f0_rows.append(row)
    # Step 3
    K1 = rng.bits(k)
    K2 = rng.bits(n)
    row0 = f0_rows[K1]
    inv0 = [0] * N
    for x, y in enumerate(row0):
        inv0[y] = x
    I = {m ^ K2 for m in Ms}
    O = {y ^ K2 for y in Ys}
    Ip = {inv0[y] for y in O}
    Op = {row0[x] for x in I}
    f1_row: list = [None] * N
    both = I | Ip
    for x in range(N):
        if x not in both:
            f1_row[x] = row0[x]
    for m, y in zip(Ms, Ys):
        f1_row[m ^ K2] = y ^ K2
    for x in sorted(Ip - I):
        used = {f1_row[z] for z in both if f1_row[z] is not None}
        pool = sorted(Op - used)
        f1_row[x] = pool[rng.randbelow(len(pool))]
    return f0_rows, f1_row, K1, K2, T, Tinv, I, O, Ip, Op, Ms, Ys


def _draw_excluding(N: int, taken: list[int], rng: Rng) -> int:
    taken_set = set(taken)
    if len(taken_set) >= N:
        raise ValueError("script larger than the block space")
    while True:
        v = rng.randbelow(N)
        if v not in taken_set:
            return v


def _check_script(ev_pts, inv_pts, n):
    if len(set(ev_pts)) != len(ev_pts) or len(set(inv_pts)) != len(inv_pts):
        raise ValueError("scripted points must be distinct per oracle")
    if len(ev_pts) + len(inv_pts) > 1 << n:
        raise ValueError("script larger than the block space")
    for v in (*ev_pts, *inv_pts):
        if not 0 <= v < 1 << n:
            raise ValueError(f"scripted point {v} outside {n} bits")


def sample_reprogrammed_cipher(script, k: int, n: int, rng: Rng) -> ReprogramSample:
    """Draw (f0, f1, K1, K2, T) from the reprogrammed-cipher distribution.

    ``script`` is ``(ev_points, inv_points)``.  f1 agrees with f0 away from the
    key K1 and is reprogrammed at K1 so that the FX construction under
    (K1, K2) matches the sampled transcript T.
    """
    ev_pts, inv_pts = (tuple(s) for s in script)
    _check_script(ev_pts, inv_pts, n)
    if k + n > 20:
        raise ValueError("reprogramming needs full tables (k + n <= 20)")
    f0_rows, f1_row, K1, K2, T, Tinv, I, O, Ip, Op, Ms, Ys = _reprogram_core(ev_pts, inv_pts, k, n, rng)
    if None in f1_row or sorted(f1_row) != list(range(1 << n)):
        raise AssertionError("reprogrammed row is not a permutation")
    f0 = IdealCipher.from_tables(f0_rows, n)
    rows = [list(r) for r in f0_rows]
    rows[K1] = f1_row
    f1 = IdealCipher.from_tables(rows, n)
    sample = ReprogramSample(f0, f1, K1, K2, T, Tinv, frozenset(I), frozenset(O), frozenset(Ip), frozenset(Op),
                             tuple(Ms), tuple(Ys))
    sample.check()
    return sample


def reprogram_histogram(script, k: int, n: int, samples: int, rng: Rng) -> dict[tuple, int]:
    """Counts of the permutation f1(K1, .) over many draws (fast path, no objects)."""
    ev_pts, inv_pts = (tuple(s) for s in script)
    _check_script(ev_pts, inv_pts, n)
    counts: dict[tuple, int] = {}
    for _ in range(samples):
        row = tuple(_reprogram_core(ev_pts, inv_pts, k, n, rng)[1])
        counts[row] = counts.get(row, 0) + 1
    return counts


# -- O2H guessing game --------------------------------------------------------


class Query(NamedTuple):
    """A query to oracle 0 (P) or oracle 1 (P') in the O2H games."""

    oracle: int
    x: int


@dataclass
class O2HSpec:
    S: frozenset
    S_prime: frozenset
    P0: Callable[[int], int]
    P0_prime: Callable[[int], int]


def run_o2h_guess_game(spec: O2HSpec, strategy: Callable, q: int, rng: Rng) -> bool:
    """Classical guessing game: stop at a uniform query index and test membership."""
    if q < 1:
        return False
    i = rng.randbelow(q) + 1
    gen = strategy(rng.child(0))
    answer = None
    count = 0
    try:
        while True:
            action = gen.send(answer)
            if not isinstance(action, Query):
                raise TypeError(f"unknown action {action!r}")
            count += 1
            if count > q:
                raise BudgetExceeded(f"query budget {q} exceeded")
            if count == i:
                return action.x in (spec.S if action.oracle == 0 else spec.S_prime)
            answer = spec.P0(action.x) if action.oracle == 0 else spec.P0_prime(action.x)
    except StopIteration:
        return False
