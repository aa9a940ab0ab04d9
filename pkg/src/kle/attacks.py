"""Key-recovery and distinguishing attacks used to calibrate the bounds.

Quantum attacks run on the dense simulator in :mod:`kle.qsim`.  Oracle
unitaries are built from the classical tables of the primitive, which is how
superposition access to an ideal cipher is modelled here.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import qsim
from .constructions import FxKey, de_enc, fx_enc
from .games import Adversary, Ev, Prim, QuantumAccess
from .primitives import CountingCipher, IdealCipher, Rng


def _enc_row(E, key: int) -> np.ndarray:
    if getattr(E, "lazy", True) or not hasattr(E, "table"):
        return np.array([E.enc(key, x) for x in range(1 << E.n)], dtype=np.int64)
    return E.table[key]


def exhaustive_key_search(E, pairs: Sequence[tuple[int, int]], k: int) -> list[int]:
    """All keys K with E_K(M) = C for every pair."""
    if k > 24:
        raise ValueError("exhaustive search capped at k = 24")
    return [K for K in range(1 << k) if all(E.enc(K, m) == c for m, c in pairs)]


def brute_force_de(E, pairs: Sequence[tuple[int, int]], k: int) -> list[tuple[int, int]]:
    """Reference 2^{2k} search for double-encryption key pairs."""
    out = []
    for k1 in range(1 << k):
        for k2 in range(1 << k):
            if all(E.enc(k2, E.enc(k1, m)) == c for m, c in pairs):
                out.append((k1, k2))
    return out


class MitmResult(NamedTuple):
    keys: list
    survivors: int
    forward_calls: int
    inverse_calls: int


def mitm_de(E, pairs: Sequence[tuple[int, int]], k: int) -> MitmResult:
    """Meet-in-the-middle on double encryption.

    Tabulates E_{K1}(M_1), probes with E^{-1}_{K2}(C_1), then filters the
    matching key pairs on the remaining plaintext/ciphertext pairs.
    """
    if k > 20:
        raise ValueError("meet-in-the-middle capped at k = 20")
    if not pairs:
        return MitmResult([(a, b) for a in range(1 << k) for b in range(1 << k)], 0, 0, 0)
    C = E if isinstance(E, CountingCipher) else CountingCipher(E)
    f0, i0 = C.forward_calls, C.inverse_calls
    (m1, c1), rest = pairs[0], pairs[1:]
    table: dict[int, list[int]] = {}
    for k1 in range(1 << k):
        table.setdefault(C.enc(k1, m1), []).append(k1)
    matches = []
    for k2 in range(1 << k):
        for k1 in table.get(C.dec(k2, c1), ()):
            matches.append((k1, k2))
    keys = []
    for k1, k2 in matches:
        if all(C.enc(k2, C.enc(k1, m)) == c for m, c in rest):
            keys.append((k1, k2))
    keys.sort()
    return MitmResult(keys, len(matches), C.forward_calls - f0, C.inverse_calls - i0)


# -- Grover -------------------------------------------------------------------


class GroverResult(NamedTuple):
    key: int
    success: bool
    probability: float


def grover_state(k: int, marked: np.ndarray, iterations: int) -> qsim.StateVector:
    """State after ``iterations`` Grover rounds over a k-qubit key register.

    The phase oracle is realised as an XOR oracle into an ancilla prepared
    in |->, so a marked key picks up a sign.
    """
    marked = np.asarray(marked, dtype=np.int64)
    if len(marked) != 1 << k:
        raise ValueError("marking table must cover every key")
    layout = qsim.RegisterLayout([("K", k), ("A", 1)])
    st = qsim.StateVector(layout)
    qsim.apply_x(st, "A")
    qsim.apply_hadamard(st, ["K", "A"])
    zero_key = layout.values("K", st.indices()) == 0
    for _ in range(iterations):
        qsim.apply_xor_oracle(st, marked, "K", "A")
        qsim.apply_hadamard(st, "K")
        qsim.apply_phase_flip(st, zero_key)
        qsim.apply_hadamard(st, "K")
        st.amps *= -1  # global phase so the diffusion is 2|s><s| - I
    st.check_norm()
    return st


def grover_search(k: int, marked: np.ndarray, iterations: int, rng: Rng) -> GroverResult:
    if k + 1 > qsim.MAX_QUBITS:
        raise ValueError("key register exceeds simulator capacity")
    st = grover_state(k, marked, iterations)
    prob = qsim.prob_of(st, "K", lambda K: bool(marked[K]))
    key, _ = qsim.measure(st, "K", rng)
    return GroverResult(key, bool(marked[key]), prob)


def grover_key_search(E, pairs: Sequence[tuple[int, int]], k: int, iterations: int, rng: Rng) -> GroverResult:
    """Grover over the k-bit key space, marking keys consistent with every pair."""
    if k + 1 > qsim.MAX_QUBITS:
        raise ValueError("key register exceeds simulator capacity")
    marked = np.ones(1 << k, dtype=np.int64)
    for m, c in pairs:
        col = np.array([E.enc(K, m) for K in range(1 << k)], dtype=np.int64)
        marked &= (col == c).astype(np.int64)
    return grover_search(k, marked, iterations, rng)


def grover_closed_form(k: int, marked_count: int, iterations: int) -> float:
    theta = math.asin(math.sqrt(marked_count / 2 ** k))
    return math.sin((2 * iterations + 1) * theta) ** 2


# -- Simon --------------------------------------------------------------------


class SimonFailure(RuntimeError):
    """Simon's routine gave up; ``null_space`` lists every vector orthogonal to the samples."""

    def __init__(self, msg, rank=0, rounds=0, null_space=()):
        super().__init__(msg)
        self.rank, self.rounds, self.null_space = rank, rounds, list(null_space)


class PromiseViolation(SimonFailure):
    pass


class SimonResult(NamedTuple):
    period: int
    rounds: int
    samples: list


class Gf2Basis:
    """Row-reduced basis of a GF(2) subspace, rows packed into ints."""

    def __init__(self, n: int):
        self.n = n
        self.rows: dict[int, int] = {}  # pivot bit -> row

    @property
    def rank(self) -> int:
        return len(self.rows)

    def add(self, v: int) -> bool:
        for p in sorted(self.rows, reverse=True):
            if v >> p & 1:
                v ^= self.rows[p]
        if v == 0:
            return False
        p = v.bit_length() - 1
        for q, r in list(self.rows.items()):
            if r >> p & 1:
                self.rows[q] = r ^ v
        self.rows[p] = v
        return True

    def null_space(self) -> list[int]:
        return [v for v in range(1 << self.n) if all(bin(v & r).count("1") % 2 == 0 for r in self.rows.values())]

    def null_vector(self) -> int:
        """The unique nonzero vector orthogonal to a rank n-1 basis."""
        if self.rank != self.n - 1:
            raise ValueError("null vector is unique only at rank n-1")
        (free,) = [b for b in range(self.n) if b not in self.rows]
        s = 1 << free
        for p, r in self.rows.items():
            if r >> free & 1:
                s |= 1 << p
        return s


def _as_table(g, n: int) -> np.ndarray:
    if callable(g):
        return np.array([g(x) for x in range(1 << n)], dtype=np.int64)
    t = np.asarray(g, dtype=np.int64)
    if len(t) != 1 << n:
        raise ValueError("oracle table does not match n")
    return t


def simon_round(table: np.ndarray, n: int, rng: Rng) -> int:
    layout = qsim.RegisterLayout([("X", n), ("Y", n)])
    st = qsim.StateVector(layout)
    qsim.apply_hadamard(st, "X")
    qsim.apply_xor_oracle(st, table, "X", "Y")
    qsim.apply_hadamard(st, "X")
    y, _ = qsim.measure(st, "X", rng)
    return y


def simon_recover_period(g, n: int, rng: Rng, max_rounds: int | None = None) -> SimonResult:
    """Recover s from an oracle promised to satisfy g(x) = g(x ^ s), s != 0."""
    if not 1 <= n <= 10:
        raise ValueError("Simon's routine is capped at n <= 10")
    table = _as_table(g, n)
    max_rounds = max_rounds or 10 * n
    basis = Gf2Basis(n)
    samples = []
    for rounds in range(1, max_rounds + 1):
        y = simon_round(table, n, rng)
        samples.append(y)
        basis.add(y)
        if basis.rank == n - 1:
            s = basis.null_vector()
            if table[0] != table[s]:
                raise PromiseViolation(f"candidate period {s} fails g(0) = g(s)", basis.rank, rounds)
            for v in samples:
                assert bin(v & s).count("1") % 2 == 0, "measured vector not orthogonal to the period"
            return SimonResult(s, rounds, samples)
        if basis.rank == n:
            raise PromiseViolation("measurements span the whole space; no hidden period", n, rounds)
    raise SimonFailure(f"rank stuck at {basis.rank} after {max_rounds} rounds", basis.rank, max_rounds,
                       basis.null_space())


def has_period(table, s: int) -> bool:
    t = np.asarray(table)
    idx = np.arange(len(t))
    return bool(np.array_equal(t, t[idx ^ s]))


# -- FX break with quantum construction access -------------------------------


class FxBreakResult(NamedTuple):
    K1: int
    K2: int
    quantum_construction_queries: int
    quantum_primitive_queries: int
    classical_construction_queries: int
    classical_primitive_queries: int
    candidates: list
    method: str = "classical loop over K1, Simon inner routine"


def fx_q2_break(E, fx_oracle: Callable[[int], int], k: int, n: int, rng: Rng, verify_points: int = 3) -> FxBreakResult:
    """Recover (K1, K2) of an FX instance given superposition access to it.

    For each guess of K1, g(x) = FX(x) ^ E_{K1}(x) has period K2 when the
    guess is right, so Simon finds K2.  Every candidate is checked on
    ``verify_points`` random classical queries; ties are broken with more.
    """
    if k > 6 or n > 5:
        raise ValueError("fx_q2_break is capped at k <= 6, n <= 5")
    fx_table = _as_table(fx_oracle, n)
    qc = qp = cc = cp = 0
    candidates = []
    cache: dict[int, int] = {}

    def fx_classical(x):
        nonlocal cc
        if x not in cache:
            cc += 1
            cache[x] = int(fx_table[x])
        return cache[x]

    def verifies(k1, k2, xs):
        nonlocal cp
        for x in xs:
            cp += 1
            if E.enc(k1, x ^ k2) ^ k2 != fx_classical(x):
                return False
        return True

    points = [rng.bits(n) for _ in range(verify_points)]
    for k1 in range(1 << k):
        row = _enc_row(E, k1)
        g = fx_table ^ row
        trial = []
        try:
            res = simon_recover_period(g, n, rng)
            trial.append(res.period)
            rounds = res.rounds
        except SimonFailure as err:
            # g has extra periods (or is constant when K2 = 0): fall back to
            # every vector orthogonal to what was measured
            rounds = err.rounds
            trial.extend(err.null_space)
        qc += rounds
        qp += rounds
        for k2 in trial:
            if verifies(k1, k2, points):
                candidates.append((k1, k2))
    if not candidates:
        raise SimonFailure("no key candidate verified")
    if len(candidates) > 1:
        every = list(range(1 << n))
        candidates = [c for c in candidates if verifies(c[0], c[1], every)]
    if not candidates:
        raise SimonFailure("no key candidate survived full verification")
    K1, K2 = candidates[0]
    return FxBreakResult(K1, K2, qc, qp, cc, cp, candidates)


class EmBreakResult(NamedTuple):
    k2: int
    rounds: int
    classical_queries: int
    degenerate: bool


def even_mansour_break(P, em_oracle: Callable[[int], int], n: int, rng: Rng, verify_points: int = 3) -> EmBreakResult:
    """Recover the Even-Mansour key from g(x) = EM(x) ^ P(x).

    When g happens to have more than one period, Simon cannot single out
    k2; the remaining candidates are then checked against classical queries.
    """
    em_table = _as_table(em_oracle, n)
    table = em_table ^ np.asarray(P.table, dtype=np.int64)
    try:
        res = simon_recover_period(table, n, rng)
        return EmBreakResult(res.period, res.rounds, 0, False)
    except SimonFailure as err:
        pts = [rng.bits(n) for _ in range(verify_points)]
        cands = [s for s in err.null_space if s and all(P(x ^ s) ^ s == em_table[x] for x in pts)]
        if len(cands) > 1:
            cands = [s for s in cands if all(P(x ^ s) ^ s == em_table[x] for x in range(1 << n))]
        if not cands:
            raise
        return EmBreakResult(cands[0], err.rounds, verify_points, True)


def even_mansour_period_table(P, k2: int) -> np.ndarray:
    """g(x) = EM(x) ^ P(x), which has period k2."""
    t = np.asarray(P.table, dtype=np.int64)
    idx = np.arange(len(t))
    return (t[idx ^ k2] ^ k2) ^ t


# -- distinguishers for the games ---------------------------------------------


def fx_exhaustive_distinguisher(k: int, n: int, p: int, messages=(0, 1)) -> Adversary:
    """Classical key-guessing distinguisher against FX with two known pairs.

    Each primitive query E(K1, x) proposes K2 = x ^ M_1; a proposal that
    matches Y_1 is confirmed with one more query on M_2.
    """
    m1, m2 = messages

    def strategy(rng):
        y1 = yield Ev(m1)
        y2 = yield Ev(m2)
        used = 0
        seen = set()
        while used < p and len(seen) < 1 << (k + n):
            point = rng.bits(k + n)
            if point in seen:
                continue
            seen.add(point)
            k1, x = point >> n, point & ((1 << n) - 1)
            k2 = x ^ m1
            used += 1
            if (yield Prim(k1, x)) ^ k2 != y1:
                continue
            if used >= p:
                break
            used += 1
            if (yield Prim(k1, m2 ^ k2)) ^ k2 == y2:
                return 1
        return 0

    return Adversary(strategy, q=2, p=p, script=((m1, m2), ()), name="fx-exhaustive")


def fx_grover_distinguisher(k: int, n: int, iterations: int = 1, messages=(0, 1)) -> Adversary:
    """Q1 distinguisher: Grover over (K1, K2) for the first pair, classical check on the second.

    Each Grover iteration evaluates the cipher twice (compute and uncompute)
    so it is charged two quantum primitive queries.
    """
    m1, m2 = messages
    p = 2 * iterations + 1

    def strategy(rng):
        y1 = yield Ev(m1)
        y2 = yield Ev(m2)
        E = yield QuantumAccess(2 * iterations)
        keys = np.arange(1 << (k + n), dtype=np.int64)
        k1s, k2s = keys >> n, keys & ((1 << n) - 1)
        if E.lazy:
            vals = np.array([E.enc(int(a), int(b ^ m1)) for a, b in zip(k1s, k2s)], dtype=np.int64)
        else:
            vals = E.table[k1s, k2s ^ m1]
        marked = ((vals ^ k2s) == y1).astype(np.int64)
        res = grover_search(k + n, marked, iterations, rng)
        k1, k2 = res.key >> n, res.key & ((1 << n) - 1)
        return int((yield Prim(k1, m2 ^ k2)) ^ k2 == y2)

    return Adversary(strategy, q=2, p=p, script=((m1, m2), ()), name="fx-grover")


def ffx_exhaustive_distinguisher(k: int, n: int, p: int, x0: int = 0, all_points: bool = False) -> Adversary:
    """Guess (K1, K2) by querying H at p points.

    With ``all_points`` the adversary queries every input of the construction
    and every point of H, which identifies the key outright.
    """
    if all_points:
        def strategy(rng):
            ys = []
            for x in range(1 << n):
                ys.append((yield Ev(x)))
            rows = []
            for k1 in range(1 << k):
                row = []
                for x in range(1 << n):
                    row.append((yield Prim(k1, x)))
                rows.append(row)
            for k1 in range(1 << k):
                for k2 in range(1 << n):
                    if all(rows[k1][x ^ k2] == ys[x] for x in range(1 << n)):
                        return 1
            return 0

        return Adversary(strategy, q=1 << n, p=1 << (k + n), name="ffx-exhaustive-full")

    def strategy(rng):
        y = yield Ev(x0)
        for point in rng.sample(1 << (k + n), min(p, 1 << (k + n))):
            if (yield Prim(point >> n, point & ((1 << n) - 1))) == y:
                return 1
        return 0

    return Adversary(strategy, q=1, p=p, name="ffx-exhaustive")


def de_mitm_distinguisher(k: int, n: int, q: int = 3) -> Adversary:
    """Meet-in-the-middle distinguisher for double encryption."""
    msgs = tuple(range(q))
    p = 2 * (1 << k) + 4 * (q - 1) * (1 << (2 * k))

    def strategy(rng):
        cs = []
        for m in msgs:
            cs.append((yield Ev(m)))
        table: dict[int, list[int]] = {}
        for k1 in range(1 << k):
            table.setdefault((yield Prim(k1, msgs[0])), []).append(k1)
        for k2 in range(1 << k):
            for k1 in table.get((yield Prim(k2, cs[0], True)), ()):
                ok = True
                for m, c in zip(msgs[1:], cs[1:]):
                    mid = yield Prim(k1, m)
                    if (yield Prim(k2, mid)) != c:
                        ok = False
                        break
                if ok:
                    return 1
        return 0

    return Adversary(strategy, q=q, p=p, script=(msgs, ()), name="de-mitm")
