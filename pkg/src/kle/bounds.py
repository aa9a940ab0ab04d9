"""Advantage-bound formulas and query-budget inversion.

Everything is evaluated through base-2 logarithms so that inputs such as
``p = 2**80`` with ``k + n = 256`` never overflow a double.  ``lg`` is log
base 2; natural logs appear only in the amplification constant.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

NEG_INF = float("-inf")


def lg(x) -> float:
    """log2 that accepts arbitrarily large ints and maps 0 to -inf."""
    if x < 0:
        raise ValueError(f"lg of negative value {x}")
    if x == 0:
        return NEG_INF
    if isinstance(x, int) and x.bit_length() > 1000:
        shift = x.bit_length() - 64
        return math.log2(x >> shift) + shift
    return math.log2(x)


def _pow2(e: float) -> float:
    if e == NEG_INF:
        return 0.0
    if e > 1023:
        return math.inf
    return 2.0 ** e


@dataclass
class BoundResult:
    formula: str
    inputs: dict
    value: float
    vacuous: bool
    kind: str = "upper"
    log2_value: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _need(inputs: dict, *names):
    missing = [n for n in names if inputs.get(n) is None]
    if missing:
        raise ValueError(f"missing inputs: {', '.join(missing)}")
    for n in names:
        if inputs[n] < 0:
            raise ValueError(f"input {n} must be non-negative")
    return [inputs[n] for n in names]


def _lg_fx_na(i):
    k, n, p, q = _need(i, "k", "n", "p", "q")
    return 0.5 * (3 + 2 * lg(p) + lg(q) - k - n)


def _lg_ffx(i):
    k, n, p, q = _need(i, "k", "n", "p", "q")
    return 0.5 * (3 + lg(p + q) + lg(p) + lg(q) - k - n)


def _lg_kr_classical(i):
    k, n, p, q = _need(i, "k", "n", "p", "q")
    return lg(p) + lg(q) - (k + n - 1)


def _lg_ld_core(q, D):
    if D < 32 or D & (D - 1):
        raise ValueError(f"D={D} must be a power of 2 and at least 32")
    lgD = lg(D)
    # (q lg D lg lg D)^3 / D^2, sixth root, times 11
    return lg(11) + (3 * (lg(q) + lg(lgD) + lg(lg(lgD))) - 2 * lgD) / 6


def _de(i):
    k, q = _need(i, "k", "q")
    if k < 2:
        raise ValueError("need k >= 2")
    main = lg(11) + (3 * (lg(q) + lg(k) + lg(lg(k))) - 2 * k) / 6
    return _pow2(main) + _pow2(-k), None


def _ld(i):
    q, D = _need(i, "q", "D")
    e = _lg_ld_core(q, D)
    return _pow2(e), e


def _eds(i):
    q, D = _need(i, "q", "D")
    if D < 32:
        raise ValueError("need D >= 32")
    e = lg(9) + 3 * lg(q + 2) - 2 * lg(D)
    return _pow2(e), e


def _lds(i):
    if i.get("adv_eds") is not None:
        (a,) = _need(i, "adv_eds")
        return 2 * a, None
    v, e = _eds(i)
    return 2 * v, e + 1


def _de_red(i):
    k, a = _need(i, "k", "adv_ld")
    return a + _pow2(-k), None


def _ldd(i):
    D, R, a = _need(i, "D", "R", "adv_ldd")
    if D < 4 or D & (D - 1):
        raise ValueError(f"D={D} must be a power of 2 and at least 4")
    return 1 - D * D / R - 1.5 * (lg(D) - 2) * (1 - a), None


def _amp(i):
    t, delta = _need(i, "t", "delta")
    if delta <= 0:
        raise ValueError("delta must be positive")
    reps = amplification_repetitions(t, delta)
    return 1 - 2 / 2 ** t, None, {"repetitions": reps, "cost": (i.get("q") or 1) * reps}


def _o2h(i):
    q, g = _need(i, "q", "guess")
    if g > 1:
        raise ValueError("guess probability above 1")
    return 2 * q * math.sqrt(g), None


_LOG_FORMULAS = {
    "fx_na": _lg_fx_na,
    "ffx": _lg_ffx,
    "kr_classical": _lg_kr_classical,
}

_OTHER = {
    "de": _de,
    "ld": _ld,
    "eds": _eds,
    "lds": _lds,
    "de_red": _de_red,
    "ldd": _ldd,
    "amp": _amp,
    "o2h": _o2h,
}

FORMULAS = tuple(sorted([*_LOG_FORMULAS, *_OTHER]))
LOWER_BOUNDS = {"ldd", "amp"}


def amplification_repetitions(t: int, delta: float) -> int:
    return math.ceil(4.5 * (t + 1) * math.log(2) / delta ** 2)


def eval_bound(formula: str, **inputs) -> BoundResult:
    inputs = {k: v for k, v in inputs.items() if v is not None}
    extra = {}
    if formula in _LOG_FORMULAS:
        e = _LOG_FORMULAS[formula](inputs)
        value = _pow2(e)
    elif formula in _OTHER:
        out = _OTHER[formula](inputs)
        value, e = out[0], out[1]
        if len(out) > 2:
            extra = out[2]
        if e is None and value > 0:
            e = lg(value)
    else:
        raise ValueError(f"unknown formula {formula!r}; choose from {', '.join(FORMULAS)}")
    kind = "lower" if formula in LOWER_BOUNDS else "upper"
    # an upper bound is vacuous once it reaches 1; a lower bound once it drops to 0
    vacuous = value >= 1 if kind == "upper" else value <= 0
    return BoundResult(formula, dict(inputs), value, vacuous, kind, e if e is not None else NEG_INF, extra)


def _log_value(formula: str, inputs: dict) -> float:
    r = eval_bound(formula, **inputs)
    return r.log2_value if r.log2_value is not None else lg(r.value)


def invert_bound(formula: str, target: float, free: str, hi: int | None = None, **fixed) -> int:
    """Smallest non-negative integer value of ``free`` whose bound reaches ``target``.

    Brackets by doubling, then binary-searches; comparisons run in the log
    domain so budgets like ``2**95`` stay exact integers.
    """
    if target <= 0:
        return 0
    lt = lg(target)

    def reaches(x: int) -> bool:
        return _log_value(formula, {**fixed, free: x}) >= lt

    if reaches(0):
        return 0
    lo, top = 0, 1
    limit = hi if hi is not None else 1 << 4096
    while not reaches(top):
        lo = top
        top <<= 1
        if top > limit:
            raise ValueError(f"target {target} unreachable for {formula} below {free}={limit}")
    while top - lo > 1:
        mid = (lo + top) // 2
        if reaches(mid):
            top = mid
        else:
            lo = mid
    return top
