"""Exact statevector versions of the FFX hybrid games.

Registers are laid out as (W, K, X, Y, H, F, K1, K2, I, X1..Xq), first
register in the lowest qubits.  ``H`` holds the 2^{k+n} entries of the
random-oracle table (entry ``(key << n) | x``, m bits each) and ``F`` the
2^n entries of the ``Ev`` table.  Every oracle is a permutation of basis
states, built once per game as an index array and applied by scatter.

A circuit makes classical ``Ev`` queries; as in the proof, the game records
each query input into the next ``X`` slot, which is what makes the
recorded-query bookkeeping (``I``, ``X1..Xq``) part of the quantum state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .qsim import MAX_QUBITS, RegisterLayout, StateVector, apply_hadamard, run_gates

ADVERSARY_REGISTERS = ("W", "K", "X", "Y")
GATE_KINDS = ("h", "x", "cnot", "toffoli", "cphase")
HYBRIDS = ("H0", "H1", "H2", "H3", "H4", "H5", "H6", "H7", "H8", "H9", "H3~", "H4~")
ENUM_LIMIT = 1 << 20


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class HybridParams:
    k: int
    n: int
    m: int
    p: int
    q: int

    def __post_init__(self):
        for name in ("k", "n", "m", "p", "q"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.n < 1 or self.m < 1:
            raise ValueError("need n >= 1 and m >= 1")
        if self.num_qubits > MAX_QUBITS:
            raise CapacityError(f"hybrid games need {self.num_qubits} qubits, cap is {MAX_QUBITS}")

    @property
    def i_bits(self) -> int:
        return math.ceil(math.log2(self.q + 1)) if self.q else 0

    @property
    def h_bits(self) -> int:
        return (1 << (self.k + self.n)) * self.m

    @property
    def f_bits(self) -> int:
        return (1 << self.n) * self.m

    @property
    def num_qubits(self) -> int:
        k, n, m = self.k, self.n, self.m
        return 1 + k + n + m + self.h_bits + self.f_bits + k + n + self.i_bits + self.q * n

    def layout(self) -> RegisterLayout:
        return _layout(self)

    def to_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "m": self.m, "p": self.p, "q": self.q}


_LAYOUTS: dict = {}


def _layout(params: HybridParams) -> RegisterLayout:
    lay = _LAYOUTS.get(params)
    if lay is None:
        regs = [("W", 1), ("K", params.k), ("X", params.n), ("Y", params.m),
                ("H", params.h_bits), ("F", params.f_bits), ("K1", params.k), ("K2", params.n),
                ("I", params.i_bits)]
        regs += [(f"X{s}", params.n) for s in range(1, params.q + 1)]
        lay = _LAYOUTS[params] = RegisterLayout(regs)
    return lay


# ---------------------------------------------------------------------------
# adversary circuits


def _parse_target(t: str) -> tuple[str, int | None]:
    if "[" in t:
        name, rest = t.split("[", 1)
        return name, int(rest.rstrip("]"))
    return t, None


@dataclass(frozen=True)
class AdversaryCircuit:
    """Ordered ops: ``("gate", kind, targets, angle)``, ``("ev",)`` or ``("ro",)``.

    Targets name adversary registers (``"X"``) or single qubits within them
    (``"X[0]"``, 0-based).  The output bit is the single qubit of ``W``.
    """

    ops: tuple

    def __post_init__(self):
        for op in self.ops:
            if op[0] == "gate":
                _, kind, targets, _angle = op
                if kind not in GATE_KINDS:
                    raise ValueError(f"unknown gate kind {kind!r}")
                for t in targets:
                    name, _ = _parse_target(t)
                    if name not in ADVERSARY_REGISTERS:
                        raise ValueError(f"gate target {t!r} is not an adversary register")
            elif op[0] not in ("ev", "ro"):
                raise ValueError(f"unknown op {op[0]!r}")

    @property
    def q(self) -> int:
        return sum(op[0] == "ev" for op in self.ops)

    @property
    def p(self) -> int:
        return sum(op[0] == "ro" for op in self.ops)

    @property
    def queries(self) -> list[str]:
        return [op[0] for op in self.ops if op[0] != "gate"]

    @classmethod
    def from_ops(cls, ops) -> "AdversaryCircuit":
        out = []
        for op in ops:
            if isinstance(op, dict):
                kind = op["op"]
                if kind == "gate":
                    out.append(("gate", op["kind"], tuple(op["targets"]), op.get("angle")))
                else:
                    out.append((kind,))
            elif op[0] == "gate":
                angle = op[3] if len(op) > 3 else None
                out.append(("gate", op[1], tuple(op[2]), angle))
            else:
                out.append((op[0],))
        return cls(tuple(out))

    @classmethod
    def from_json(cls, text: str) -> "AdversaryCircuit":
        return cls.from_ops(json.loads(text))

    def to_json(self) -> str:
        out = []
        for op in self.ops:
            if op[0] == "gate":
                d = {"op": "gate", "kind": op[1], "targets": list(op[2])}
                if op[3] is not None:
                    d["angle"] = op[3]
                out.append(d)
            else:
                out.append({"op": op[0]})
        return json.dumps(out)

    def params(self, k: int, n: int, m: int) -> HybridParams:
        return HybridParams(k, n, m, self.p, self.q)


def _qubits(lay: RegisterLayout, target: str) -> list[int]:
    name, i = _parse_target(target)
    qs = lay.qubits(name)
    if i is None:
        return qs
    if not 0 <= i < len(qs):
        raise ValueError(f"qubit {target} out of range")
    return [qs[i]]


def _gate_tuples(lay: RegisterLayout, op) -> list[tuple]:
    _, kind, targets, angle = op
    qs = [_qubits(lay, t) for t in targets]
    if kind in ("h", "x"):
        return [(kind, [q for group in qs for q in group])]
    flat = [q for group in qs for q in group]
    if kind == "cphase":
        return [("cphase", flat, math.pi if angle is None else angle)]
    need = 2 if kind == "cnot" else 3
    if len(flat) != need:
        raise ValueError(f"{kind} needs {need} single qubits, got {targets}")
    if len(set(flat)) != need:
        raise ValueError(f"{kind} qubits must be distinct")
    return [(kind, *flat)]


def random_circuit(p: int, q: int, length: int, rng, k: int = 1, n: int = 1, m: int = 1) -> AdversaryCircuit:
    """``length`` random gates on W,K,X,Y with ``p`` Ro and ``q`` Ev calls mixed in."""
    widths = {"W": 1, "K": k, "X": n, "Y": m}
    qubits = [f"{r}[{i}]" for r in ADVERSARY_REGISTERS for i in range(widths[r])]
    body = []
    for _ in range(length):
        kind = GATE_KINDS[rng.randbelow(len(GATE_KINDS))]
        if kind in ("h", "x"):
            body.append(("gate", kind, (qubits[rng.randbelow(len(qubits))],), None))
        else:
            need = {"cnot": 2, "toffoli": 3, "cphase": 2}[kind]
            picks = [qubits[i] for i in rng.sample(len(qubits), need)]
            angle = None
            if kind == "cphase":
                angle = math.pi / (1 << rng.randbelow(3))
            body.append(("gate", kind, tuple(picks), angle))
    calls = [("ev",)] * q + [("ro",)] * p
    rng.shuffle(calls)
    ops = list(body)
    for call in calls:
        ops.insert(rng.randbelow(len(ops) + 1), call)
    # make sure the output bit depends on something the oracles touched
    ops.append(("gate", "cnot", ("Y[0]", "W[0]"), None))
    return AdversaryCircuit(tuple(ops))


def engineered_circuit() -> AdversaryCircuit:
    """Ev(0), then one Ro query on uniform (K, X); outputs 1 iff Y reads 0.

    Built for k = n = m = 1, where the Ro query hits the recorded Ev point
    with probability 1/4 and the two hybrids of the bad-event pair split.
    """
    return AdversaryCircuit.from_ops([
        {"op": "ev"},
        {"op": "gate", "kind": "h", "targets": ["K"]},
        {"op": "gate", "kind": "h", "targets": ["X"]},
        {"op": "ro"},
        {"op": "gate", "kind": "x", "targets": ["Y[0]"]},
        {"op": "gate", "kind": "cnot", "targets": ["Y[0]", "W[0]"]},
        {"op": "gate", "kind": "x", "targets": ["Y[0]"]},
    ])


# ---------------------------------------------------------------------------
# oracle construction


class _Basis:
    """Vectorised field access over an array of basis indices."""

    def __init__(self, params: HybridParams):
        self.p = params
        self.lay = _layout(params)
        self.mmask = (1 << params.m) - 1

    def get(self, idx, name):
        return self.lay.values(name, idx)

    def set(self, idx, name, value):
        off = self.lay.offsets[name]
        return (idx & ~self.lay.mask(name)) | (value << off)

    def h_shift(self, key, x):
        return self.lay.offsets["H"] + ((key << self.p.n) | x) * self.p.m

    def f_shift(self, x):
        return self.lay.offsets["F"] + x * self.p.m

    def entry(self, idx, shift):
        return (idx >> shift) & self.mmask

    def xor_entry(self, idx, shift, value):
        return idx ^ (value << shift)

    def swap(self, idx, s1, s2, cond):
        d = self.entry(idx, s1) ^ self.entry(idx, s2)
        d = np.where(cond, d, 0)
        return idx ^ (d << s1) ^ (d << s2)

    def member(self, idx, value, upto):
        """``value`` in {X_1..X_upto} (slots beyond q do not exist)."""
        hit = np.zeros(idx.shape, dtype=bool)
        for s in range(1, self.p.q + 1):
            hit |= (upto >= s) & (self.get(idx, f"X{s}") == value)
        return hit

    def record(self, idx):
        """I <- I + 1 mod 2^|I|, then X_I ^= X; returns (idx, new I)."""
        width = self.p.i_bits
        i_new = (self.get(idx, "I") + 1) & ((1 << width) - 1)
        idx = self.set(idx, "I", i_new)
        x = self.get(idx, "X")
        for s in range(1, self.p.q + 1):
            off = self.lay.offsets[f"X{s}"]
            idx = idx ^ np.where(i_new == s, x << off, 0)
        return idx, i_new

    def h_tilde_shift(self, idx, x):
        return self.h_shift(self.get(idx, "K1"), x ^ self.get(idx, "K2"))


def _ev(b, idx, real):
    idx, _ = b.record(idx)
    x = b.get(idx, "X")
    val = b.entry(idx, b.h_tilde_shift(idx, x) if real else b.f_shift(x))
    return idx ^ (val << b.lay.offsets["Y"])


def _ro(b, idx):
    val = b.entry(idx, b.h_shift(b.get(idx, "K"), b.get(idx, "X")))
    return idx ^ (val << b.lay.offsets["Y"])


def _fev(b, idx, real):
    idx, _ = b.record(idx)
    x = b.get(idx, "X")
    shift = b.h_tilde_shift(idx, x) if real else b.f_shift(x)
    return b.xor_entry(idx, shift, b.get(idx, "Y"))


def _fro(b, idx):
    return b.xor_entry(idx, b.h_shift(b.get(idx, "K"), b.get(idx, "X")), b.get(idx, "Y"))


def _fev_bad(b, idx, i_new):
    x = b.get(idx, "X")
    bool1 = ~b.member(idx, x, i_new - 1)
    bool2 = b.entry(idx, b.h_tilde_shift(idx, x)) != 0
    bool3 = b.entry(idx, b.f_shift(x)) != 0
    return bool1 & (bool2 | bool3)


def _fev_prime(b, idx):
    idx, i_new = b.record(idx)
    x = b.get(idx, "X")
    bad = _fev_bad(b, idx, i_new)
    idx = b.swap(idx, b.f_shift(x), b.h_tilde_shift(idx, x), bad)
    return b.xor_entry(idx, b.f_shift(x), b.get(idx, "Y"))


def _fro_bad(b, idx):
    x = b.get(idx, "X")
    return (b.get(idx, "K") == b.get(idx, "K1")) & b.member(idx, x ^ b.get(idx, "K2"), b.get(idx, "I"))


def _fro_prime(b, idx):
    bad = _fro_bad(b, idx)
    k, x, y = b.get(idx, "K"), b.get(idx, "X"), b.get(idx, "Y")
    shift = np.where(bad, b.f_shift(x ^ b.get(idx, "K2")), b.h_shift(k, x))
    return b.xor_entry(idx, shift, y)


def _t(b, idx):
    i = b.get(idx, "I")
    for s in range(1, b.p.q + 1):
        x = b.get(idx, f"X{s}")
        active = i >= s
        for t in range(1, s):
            active &= b.get(idx, f"X{t}") != x
        idx = b.swap(idx, b.f_shift(x), b.h_tilde_shift(idx, x), active)
    return idx


ORACLES = ("Ev", "Ro", "FEv", "FRo", "FEv'", "FRo'", "T")


def build_oracle(name: str, params: HybridParams, real: bool = False) -> np.ndarray:
    """Basis permutation (``perm[i]`` is the image of basis state ``i``).

    ``real`` selects the real-world ``Ev``/``FEv`` that read or write
    ``H_{K1}(X ^ K2)`` instead of ``F(X)``; it has no effect on the others.
    """
    b = _Basis(params)
    if name in ("Ev", "FEv", "FEv'") and params.q == 0:
        raise ValueError(f"{name} needs q >= 1")
    idx = np.arange(1 << params.num_qubits, dtype=np.int64)
    if name == "Ev":
        return _ev(b, idx, real)
    if name == "Ro":
        return _ro(b, idx)
    if name == "FEv":
        return _fev(b, idx, real)
    if name == "FRo":
        return _fro(b, idx)
    if name == "FEv'":
        return _fev_prime(b, idx)
    if name == "FRo'":
        return _fro_prime(b, idx)
    if name == "T":
        return _t(b, idx)
    raise ValueError(f"unknown oracle {name!r}; choose from {', '.join(ORACLES)}")


def bad_set(name: str, params: HybridParams) -> np.ndarray:
    """Boolean mask of basis states on which the two oracle versions differ."""
    b = _Basis(params)
    idx = np.arange(1 << params.num_qubits, dtype=np.int64)
    if name == "FEv":
        i_new = (b.get(idx, "I") + 1) & ((1 << params.i_bits) - 1)
        return _fev_bad(b, idx, i_new)
    if name == "FRo":
        return _fro_bad(b, idx)
    raise ValueError(f"no bad set for {name!r}")


def is_bijection(perm: np.ndarray) -> bool:
    return bool(np.array_equal(np.sort(perm), np.arange(len(perm))))


# ---------------------------------------------------------------------------
# games


@dataclass(frozen=True)
class _Oracle:
    perm: np.ndarray
    conj: tuple = ()  # registers Hadamard-conjugated around the permutation


@dataclass(frozen=True)
class _Game:
    ev: _Oracle | None
    ro: _Oracle | None
    init_h: tuple = ()
    classical: tuple = ()  # registers sampled classically and enumerated
    post: tuple = ()  # ("T",) or register names to Hadamard after the run


def _compose(*perms):
    """Permutation applying ``perms[0]`` first."""
    out = perms[0]
    for p in perms[1:]:
        out = p[out]
    return out


_GAMES: dict = {}


def _game(hid: str, params: HybridParams) -> _Game:
    key = (hid, params)
    if key in _GAMES:
        return _GAMES[key]
    has_ev, has_ro = params.q > 0, params.p > 0

    def orc(name, real=False, conj=(), sandwich=None):
        if name.startswith(("Ev", "FEv")) and not has_ev:
            return None
        if name.startswith(("Ro", "FRo")) and not has_ro:
            return None
        perm = build_oracle(name, params, real)
        if sandwich is not None:
            perm = _compose(sandwich, perm, sandwich)
        return _Oracle(perm, conj)

    if hid == "H0":
        g = _Game(orc("Ev"), orc("Ro"), classical=("H", "F"))
    elif hid == "H1":
        g = _Game(orc("Ev"), orc("Ro"), init_h=("H", "F"))
    elif hid == "H2":
        g = _Game(orc("FEv", conj=("Y", "F")), orc("FRo", conj=("Y", "H")), init_h=("H", "F"))
    elif hid in ("H3", "H3~"):
        post = ("H", "F") if hid == "H3" else ()
        init = () if hid == "H3" else ("K1", "K2")
        g = _Game(orc("FEv", conj=("Y",)), orc("FRo", conj=("Y",)), init_h=init, post=post)
    elif hid == "H9":
        g = _Game(orc("Ev", real=True), orc("Ro"), classical=("H", "K1", "K2"))
    elif hid == "H8":
        g = _Game(orc("Ev", real=True), orc("Ro"), init_h=("H", "K1", "K2"))
    elif hid == "H7":
        g = _Game(orc("FEv", True, ("Y", "H")), orc("FRo", conj=("Y", "H")), init_h=("H", "K1", "K2"))
    elif hid == "H6":
        g = _Game(orc("FEv", True, ("Y",)), orc("FRo", conj=("Y",)), init_h=("K1", "K2"), post=("H",))
    elif hid == "H5":
        t = build_oracle("T", params)
        g = _Game(orc("FEv", True, ("Y",), sandwich=t), orc("FRo", conj=("Y",), sandwich=t),
                  init_h=("K1", "K2"), post=("T", "H"))
    elif hid in ("H4", "H4~"):
        post = ("T", "H") if hid == "H4" else ()
        g = _Game(orc("FEv'", conj=("Y",)), orc("FRo'", conj=("Y",)), init_h=("K1", "K2"), post=post)
    else:
        raise ValueError(f"unknown hybrid {hid!r}; choose from {', '.join(HYBRIDS)}")
    _GAMES[key] = g
    return g


def _apply_oracle(state: StateVector, o: _Oracle) -> None:
    if o.conj:
        apply_hadamard(state, list(o.conj))
    out = np.empty_like(state.amps)
    out[o.perm] = state.amps
    state.amps = out
    if o.conj:
        apply_hadamard(state, list(o.conj))


def _run_circuit(state: StateVector, adv: AdversaryCircuit, game: _Game, stop_at: int | None = None):
    """Run ``adv``; with ``stop_at=j`` halt just before the j-th query (1-based)
    and return that query's oracle, having applied its pre-conjugation."""
    lay = state.layout
    count = 0
    for op in adv.ops:
        if op[0] == "gate":
            run_gates(state, _gate_tuples(lay, op))
            continue
        count += 1
        o = game.ev if op[0] == "ev" else game.ro
        if stop_at is not None and count == stop_at:
            if o.conj:
                apply_hadamard(state, list(o.conj))
            return op[0]
        _apply_oracle(state, o)
    return None


def _check_budget(adv: AdversaryCircuit, params: HybridParams) -> None:
    if adv.p != params.p or adv.q != params.q:
        raise ValueError(f"circuit makes p={adv.p}, q={adv.q} queries; params say p={params.p}, q={params.q}")


def _post(state: StateVector, game: _Game, params: HybridParams) -> None:
    for step in game.post:
        if step == "T":
            if params.q:
                out = np.empty_like(state.amps)
                out[build_oracle("T", params)] = state.amps
                state.amps = out
        else:
            apply_hadamard(state, step)


def _w_prob(state: StateVector) -> float:
    lay = state.layout
    ones = (state.indices() >> lay.offsets["W"]) & 1
    return float(np.sum(np.abs(state.amps[ones == 1]) ** 2))


def _single_run(adv, game, params, base: int) -> float:
    lay = _layout(params)
    st = StateVector(lay)
    st.amps[0] = 0.0
    st.amps[base] = 1.0
    if game.init_h:
        apply_hadamard(st, list(game.init_h))
    _run_circuit(st, adv, game)
    _post(st, game, params)
    return _w_prob(st)


def run_hybrid(hid: str, adv: AdversaryCircuit, params: HybridParams, rng=None, samples: int = 4096) -> float:
    """Exact Pr[W = 1] in hybrid ``hid``.

    Classically sampled registers (H0, H9) are averaged over every draw when
    the joint space has at most 2^20 points, otherwise over ``samples``
    draws from ``rng``.
    """
    _check_budget(adv, params)
    game = _game(hid, params)
    if adv.p == adv.q == 0:
        # game registers never meet the adversary's, so every hybrid is the
        # bare circuit; skipping them keeps the equalities exact in floats
        return _single_run(adv, _Game(None, None), params, 0)
    if not game.classical:
        return _single_run(adv, game, params, 0)
    lay = _layout(params)
    widths = [lay.widths[r] for r in game.classical]
    total_bits = sum(widths)
    if total_bits <= ENUM_LIMIT.bit_length() - 1:
        draws = range(1 << total_bits)
    else:
        if rng is None:
            raise ValueError(f"{hid}: 2^{total_bits} classical draws need an rng for sampling")
        draws = [rng.bits(total_bits) for _ in range(samples)]
    acc = 0.0
    count = 0
    for d in draws:
        base = 0
        for r, w in zip(game.classical, widths):
            base |= (d & ((1 << w) - 1)) << lay.offsets[r]
            d >>= w
        acc += _single_run(adv, game, params, base)
        count += 1
    return acc / count


def _max_dev(probs: dict) -> float:
    vals = list(probs.values())
    return max(vals) - min(vals)


class ClaimResult(NamedTuple):
    deviation: float
    probabilities: dict


def check_claim1(adv: AdversaryCircuit, params: HybridParams, rng=None) -> ClaimResult:
    probs = {h: run_hybrid(h, adv, params, rng) for h in ("H0", "H1", "H2", "H3")}
    return ClaimResult(_max_dev(probs), probs)


def check_claim2(adv: AdversaryCircuit, params: HybridParams, rng=None) -> ClaimResult:
    probs = {h: run_hybrid(h, adv, params, rng) for h in ("H9", "H8", "H7", "H6", "H5", "H4")}
    return ClaimResult(_max_dev(probs), probs)


def claim3_bound(params: HybridParams) -> float:
    p, q = params.p, params.q
    return 2 * (p + q) * math.sqrt(2 * p * q / 2 ** (params.k + params.n))


def ffx_theorem_bound(params: HybridParams) -> float:
    p, q = params.p, params.q
    return math.sqrt(8 * (p + q) * p * q / 2 ** (params.k + params.n))


class Claim3Result(NamedTuple):
    delta: float
    bound: float
    theorem_bound: float
    p_h3: float
    p_h4: float
    guess: float
    guess_bound: float


def run_quantum_guess_game(adv: AdversaryCircuit, params: HybridParams, rng=None) -> tuple[float, list[float]]:
    """Bad-input guessing probability for the H3~/H4~ oracle pair.

    For each query index j the circuit runs with the H3~ oracles up to its
    j-th query; the mass of the query register state inside that oracle's
    bad set is recorded.  Returns the average over j and the per-query list.
    """
    _check_budget(adv, params)
    total = params.p + params.q
    if total == 0:
        return 0.0, []
    game = _game("H3~", params)
    lay = _layout(params)
    bad = {"ev": bad_set("FEv", params) if params.q else None,
           "ro": bad_set("FRo", params) if params.p else None}
    masses = []
    for j in range(1, total + 1):
        st = StateVector(lay)
        apply_hadamard(st, list(game.init_h))
        which = _run_circuit(st, adv, game, stop_at=j)
        masses.append(float(np.sum(np.abs(st.amps[bad[which]]) ** 2)))
    return sum(masses) / total, masses


def check_claim3(adv: AdversaryCircuit, params: HybridParams, rng=None, tol: float = 1e-9) -> Claim3Result:
    p3 = run_hybrid("H3~", adv, params, rng)
    p4 = run_hybrid("H4~", adv, params, rng)
    delta = abs(p3 - p4)
    bound = claim3_bound(params)
    guess, _ = run_quantum_guess_game(adv, params, rng)
    guess_bound = 2 * (params.p + params.q) * math.sqrt(guess)
    if delta > min(1.0, bound) + tol:
        raise AssertionError(f"identical-until-bad gap {delta} exceeds bound {bound}")
    return Claim3Result(delta, bound, ffx_theorem_bound(params), p3, p4, guess, guess_bound)

