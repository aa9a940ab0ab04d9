"""Element distinctness and list disjointness, with the reduction chain.

Conventions: list positions are 0-based, list values live in ``1..R``.  An
LD instance of size ``D`` is two lists ``L0, L1`` of length ``D // 2``.
Algorithms receive lists through :class:`CountingList` views so every oracle
query is counted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .games import Ev, Inv, Prim
from .primitives import IdealCipher, Rng, sample_injection, sample_permutation


@dataclass(frozen=True)
class EdInstance:
    D: int
    R: int
    L: tuple
    cls: int
    attempts: int = 1

    def to_json(self) -> str:
        return json.dumps({"problem": "ED", "D": self.D, "R": self.R, "L": list(self.L)})


@dataclass(frozen=True)
class LdInstance:
    D: int
    R: int
    L0: tuple
    L1: tuple
    cls: int

    def to_json(self) -> str:
        return json.dumps({"problem": "1LD", "D": self.D, "R": self.R, "L0": list(self.L0), "L1": list(self.L1)})

    @classmethod
    def from_json(cls, text: str) -> "LdInstance":
        obj = json.loads(text)
        if obj.get("problem") != "1LD":
            raise ValueError("not a 1LD instance")
        L0, L1 = tuple(obj["L0"]), tuple(obj["L1"])
        return cls(obj["D"], obj["R"], L0, L1, len(set(L0) & set(L1)))


def collision_pairs(L: Sequence[int]) -> int:
    counts: dict[int, int] = {}
    for v in L:
        counts[v] = counts.get(v, 0) + 1
    return sum(c * (c - 1) // 2 for c in counts.values())


def check_ld_promise(inst: LdInstance) -> bool:
    return (len(set(inst.L0)) == len(inst.L0) and len(set(inst.L1)) == len(inst.L1)
            and len(set(inst.L0) & set(inst.L1)) == inst.cls and inst.cls in (0, 1))


def gen_instance(problem: str, D: int, R: int, cls: int | None, rng: Rng):
    """Uniform instance of the requested class.

    ``ED`` and ``1ED`` class 1 use rejection sampling from uniform lists,
    so the instance records how many draws were needed.
    """
    if D < 1 or R < 1:
        raise ValueError("sizes must be positive")
    if problem in ("ED", "1ED"):
        if problem == "1ED" and cls not in (0, 1):
            raise ValueError("1ED promises class 0 or 1")
        if cls == 0:
            if D > R:
                raise ValueError(f"no injective list of length {D} into [{R}]")
            return EdInstance(D, R, tuple(sample_injection(D, R, rng)), 0)
        if cls is not None and cls > D * (D - 1) // 2:
            raise ValueError("too many collision pairs requested")
        attempts = 0
        while True:
            attempts += 1
            L = tuple(rng.randbelow(R) + 1 for _ in range(D))
            c = collision_pairs(L)
            if cls is None or c == cls:
                return EdInstance(D, R, L, c, attempts)
            if attempts > 10_000_000:
                raise RuntimeError("rejection sampling did not converge")
    if problem == "1LD":
        if D % 2:
            raise ValueError("1LD needs an even D")
        h = D // 2
        if cls == 0:
            vals = sample_injection(D, R, rng)
            return LdInstance(D, R, tuple(vals[:h]), tuple(vals[h:]), 0)
        if cls == 1:
            if D - 1 > R or h < 1:
                raise ValueError("infeasible 1LD parameters")
            vals = sample_injection(D - 1, R, rng)
            L0 = vals[:h]
            rest = vals[h:]
            x = rng.randbelow(h)
            y = rng.randbelow(h)
            L1 = rest[:y] + [L0[x]] + rest[y:]
            return LdInstance(D, R, tuple(L0), tuple(L1), 1)
        raise ValueError("1LD promises class 0 or 1")
    raise ValueError(f"unknown problem {problem!r}")


class QueryCounter:
    def __init__(self):
        self.count = 0


class CountingList:
    """Read-only list view whose lookups are charged to a shared counter.

    ``base`` maps a view position to the underlying list; ``pad`` supplies
    values at positions outside ``domain`` (the merge ``f □ g``), and those
    lookups are free because the padding is local randomness.
    """

    def __init__(self, data: Sequence[int], counter: QueryCounter | None = None, index: Callable[[int], int] | None = None,
                 length: int | None = None, domain: range | None = None, pad: Sequence[int] | None = None):
        self.data = data
        self.counter = counter or QueryCounter()
        self.index = index
        self.length = len(data) if length is None else length
        self.domain = domain
        self.pad = pad

    def __len__(self):
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        if self.domain is not None and i not in self.domain:
            return self.pad[i]
        self.counter.count += 1
        return self.data[self.index(i) if self.index else i]

    def __iter__(self):
        return (self[i] for i in range(self.length))


def brute_force_search(inst) -> tuple[int, int] | None:
    """A witness (x, y) or None; hash-join for LD, first collision for ED."""
    if isinstance(inst, EdInstance):
        return _ed_search(inst.L)
    return _ld_search(inst.L0, inst.L1)


def _ed_search(L) -> tuple[int, int] | None:
    seen: dict[int, int] = {}
    for i in range(len(L)):
        v = L[i]
        if v in seen:
            return seen[v], i
        seen[v] = i
    return None


def _ld_search(L0, L1) -> tuple[int, int] | None:
    where = {L0[x]: x for x in range(len(L0))}
    for y in range(len(L1)):
        x = where.get(L1[y])
        if x is not None:
            return x, y
    return None


def naive_search(inst) -> tuple[int, int] | None:
    if isinstance(inst, EdInstance):
        L = inst.L
        for i in range(len(L)):
            for j in range(i + 1, len(L)):
                if L[i] == L[j]:
                    return i, j
        return None
    for x in range(len(inst.L0)):
        for y in range(len(inst.L1)):
            if inst.L0[x] == inst.L1[y]:
                return x, y
    return None


def ld_search_alg(L0, L1, rng=None):
    """Brute-force 1LD search algorithm over (counting) list views."""
    return _ld_search(L0, L1)


def ld_decision_alg(L0, L1, rng=None) -> int:
    """Brute-force 1LD decision algorithm: 1 iff the lists share a value."""
    return int(_ld_search(L0, L1) is not None)


def ed_relation(L, w) -> bool:
    return w is not None and w[0] != w[1] and L[w[0]] == L[w[1]]


def ld_relation(L0, L1, w) -> bool:
    return w is not None and L0[w[0]] == L1[w[1]]


def reduce_eds_from_lds(A_lds: Callable, L, rng: Rng, counter: QueryCounter | None = None):
    """Solve 1ED search with a 1LD search algorithm by a random split.

    The list is permuted by a uniform pi and the two halves of L∘pi are
    handed to ``A_lds``; an answer (x, y) maps back to (pi(x), pi(y + D/2)).
    """
    data = L.L if isinstance(L, EdInstance) else L
    D = len(data)
    if D % 2:
        raise ValueError("the split needs an even D")
    h = D // 2
    pi = list(range(D))
    rng.shuffle(pi)
    counter = counter or QueryCounter()
    L0 = CountingList(data, counter, index=lambda i: pi[i], length=h)
    L1 = CountingList(data, counter, index=lambda i: pi[i + h], length=h)
    out = A_lds(L0, L1, rng.child(0))
    if out is None:
        return None
    x, y = out
    return pi[x], pi[y + h]


def _split(dom: range) -> tuple[range, range]:
    lo, hi = dom.start, dom.stop - 1
    mid = (lo + hi) // 2
    return range(lo, mid + 1), range(mid + 1, hi + 1)


@dataclass
class BinarySearchTrace:
    witness: tuple | None
    rounds: int
    decision_calls: int
    queries: int


def binary_search_lds(A_ldd: Callable, L0, L1, rng: Rng, R: int, counter: QueryCounter | None = None) -> BinarySearchTrace:
    """1LD search from a fixed-size 1LD decision algorithm by padded binary search.

    Each round halves both domains and asks the decision algorithm about
    the (l,l), (l,r), (r,l) quadrants; (r,r) is the default.  Sublists are
    padded back to full size with the two halves of a local injection.
    """
    h = len(L0)
    if len(L1) != h:
        raise ValueError("lists must have equal length")
    D = 2 * h
    if D & (D - 1):
        raise ValueError("D must be a power of two")
    counter = counter or QueryCounter()
    pad = sample_injection(D, R, rng)
    pad0, pad1 = pad[:h], pad[h:]
    dom0, dom1 = range(h), range(h)
    rounds = calls = 0
    sub = 0
    while len(dom0) > 1 or len(dom1) > 1:
        rounds += 1
        parts0 = dict(zip("lr", _split(dom0)))
        parts1 = dict(zip("lr", _split(dom1)))
        best = ("r", "r")
        for j, k in (("l", "l"), ("l", "r"), ("r", "l")):
            v0 = CountingList(L0, counter, domain=parts0[j], pad=pad0)
            v1 = CountingList(L1, counter, domain=parts1[k], pad=pad1)
            calls += 1
            sub += 1
            if A_ldd(v0, v1, rng.child(sub)):
                best = (j, k)
        dom0, dom1 = parts0[best[0]], parts1[best[1]]
    return BinarySearchTrace((dom0.start, dom1.start), rounds, calls, counter.count)


def amplify_decision(A: Callable, delta: float, p0: float, t: int, L, rng: Rng) -> int:
    """Repeat a decision algorithm n times and threshold the mean at p0 + delta/2."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = amplification_runs(t, delta)
    total = 0
    for i in range(n):
        total += int(A(L, rng.child(i)))
    return 0 if total / n < p0 + delta / 2 else 1


def amplification_runs(t: int, delta: float) -> int:
    return math.ceil(4.5 * (t + 1) * math.log(2) / delta ** 2)


def amplified(A: Callable, delta: float, p0: float, t: int) -> Callable:
    """Wrap a two-list decision algorithm so it can be plugged into the binary search."""
    def run(L0, L1, rng):
        return amplify_decision(lambda L, r: A(L[0], L[1], r), delta, p0, t, (L0, L1), rng)

    return run


def chain_search(L, R: int, rng: Rng, base: Callable = ld_decision_alg, delta: float = 1.0, p0: float = 0.0,
                 t: int = 1, counter: QueryCounter | None = None):
    """1ED search through amplify -> binary search -> random split."""
    dec = amplified(base, delta, p0, t)

    def lds(L0, L1, r):
        return binary_search_lds(dec, L0, L1, r, R, counter=L0.counter).witness

    return reduce_eds_from_lds(lds, L, rng, counter)


# -- DE -> 1LD reduction ------------------------------------------------------


class ReductionCipher:
    """The ideal cipher simulated from a 1LD instance (``Ic`` / ``Inv``).

    Key K is routed through rho to list position (i, j); list value v keys
    the cipher F as ``v - 1``.  Keys from L0 get F_v, keys from L1 get
    pi ∘ F_v^{-1}, so a shared value turns two keys into a double
    encryption equal to pi.
    """

    def __init__(self, inst: LdInstance, k: int, n: int, rho, pi, F):
        if 1 << k != inst.D:
            raise ValueError(f"need 2^k = D, got k={k}, D={inst.D}")
        if inst.R < 1 << k:
            raise ValueError("need R >= 2^k")
        self.inst, self.k, self.n = inst, k, n
        self.rho, self.pi, self.F = rho, pi, F

    def route(self, K: int) -> tuple[int, int]:
        r = self.rho(K)
        return r >> (self.k - 1), r & ((1 << (self.k - 1)) - 1)

    def enc(self, K: int, x: int) -> int:
        i, j = self.route(K)
        if i == 0:
            return self.F.enc(self.inst.L0[j] - 1, x)
        return self.pi(self.F.dec(self.inst.L1[j] - 1, x))

    def dec(self, K: int, y: int) -> int:
        i, j = self.route(K)
        if i == 0:
            return self.F.dec(self.inst.L0[j] - 1, y)
        return self.F.enc(self.inst.L1[j] - 1, self.pi.inverse(y))


def de_to_ld_adversary(adv, inst: LdInstance, k: int, n: int, rng: Rng) -> int:
    """Run an SPRP adversary against the view simulated from a 1LD instance; return its bit."""
    if k < 1:
        raise ValueError("need k >= 1")
    rho = sample_permutation(k, rng.child(1))
    pi = sample_permutation(n, rng.child(2))
    F = IdealCipher(max(1, math.ceil(math.log2(inst.R))), n, rng.child(3), lazy=True)
    E = ReductionCipher(inst, k, n, rho, pi, F)
    gen = adv.strategy(rng.child(4))
    answer = None
    q_used = p_used = 0
    try:
        while True:
            a = gen.send(answer)
            if isinstance(a, Ev):
                q_used += 1
                answer = pi(a.x)
            elif isinstance(a, Inv):
                q_used += 1
                answer = pi.inverse(a.y)
            elif isinstance(a, Prim):
                p_used += 1
                answer = E.dec(a.key, a.x) if a.inverse else E.enc(a.key, a.x)
            else:
                raise TypeError(f"unsupported action {a!r}")
            if q_used > adv.q or p_used > adv.p:
                raise RuntimeError("adversary exceeded its budget")
    except StopIteration as stop:
        return int(bool(stop.value))
