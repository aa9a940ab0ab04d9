"""Command-line runner: ``kle <subcommand> ...``.

Exit codes: 0 on success, 1 on usage or parameter errors, 2 when a checked
invariant fails (a bound exceeded, a recovered key that does not verify).
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import attacks, bounds, games, hybrids, listdis
from .constructions import DeKey, FxKey, de_enc, fx_enc
from .primitives import IdealCipher, Rng, sample_permutation
from .report import emit_report

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(text: str):
    """Integer, float, or a power written ``2^80`` / ``2**80``."""
    t = text.strip().replace("**", "^")
    if "^" in t:
        base, exp = t.split("^", 1)
        b, e = _num(base), _num(exp)
        if isinstance(b, int) and isinstance(e, int) and e >= 0:
            return b ** e
        return float(b) ** float(e)
    try:
        return int(t)
    except ValueError:
        try:
            return float(t)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()] if text else []


def _default_seed() -> int:
    env = os.environ.get("KLE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"KLE_SEED must be an integer, got {env!r}") from None


def _pmap(fn, items, parallel: int):
    items = list(items)
    if parallel > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * parallel))))
    return [fn(it) for it in items]


# -- bounds -------------------------------------------------------------------

_BOUND_INPUTS = ("k", "n", "p", "q", "D", "R", "t", "delta", "guess", "adv_eds", "adv_ld", "adv_ldd")


def _bound_row(res: bounds.BoundResult) -> dict:
    row = {"formula": res.formula}
    row.update({name: res.inputs[name] for name in _BOUND_INPUTS if name in res.inputs})
    row.update(value=res.value, log2_value=res.log2_value, vacuous=res.vacuous, kind=res.kind)
    return row


def cmd_bounds(a) -> tuple[list, dict, dict]:
    inputs = {name: getattr(a, name) for name in _BOUND_INPUTS if getattr(a, name) is not None}
    if a.invert:
        if a.target is None:
            raise UsageError("--invert needs --target")
        inputs.pop(a.invert, None)
        val = bounds.invert_bound(a.formula, a.target, a.invert, **inputs)
        res = bounds.eval_bound(a.formula, **inputs, **{a.invert: val})
        summary = {"formula": a.formula, "target": a.target, "free": a.invert, "minimal": val,
                   "log2_minimal": bounds.lg(val), "value_at_minimal": res.value, "inputs": inputs}
        return [_bound_row(res)], summary, {}
    if a.sweep:
        var, _, span = a.sweep.partition("=")
        lo, _, hi = span.partition(":")
        if var not in _BOUND_INPUTS or not lo or not hi:
            raise UsageError("--sweep takes VAR=LO:HI (log2 exponents, inclusive)")
        rows = []
        lo, hi = sorted((int(lo), int(hi)))
        for e in range(lo, hi + 1):
            rows.append(_bound_row(bounds.eval_bound(a.formula, **{**inputs, var: 2 ** e})))
        return rows, {"formula": a.formula, "sweep": var}, {"sort_by": var}
    res = bounds.eval_bound(a.formula, **inputs)
    summary = {"formula": res.formula, "inputs": res.inputs, "value": res.value, "vacuous": res.vacuous,
               "kind": res.kind, "log2_value": res.log2_value, "extra": res.extra}
    return [_bound_row(res)], summary, {}


# -- game ---------------------------------------------------------------------

_ADVERSARIES = ("fx-exhaustive", "fx-grover", "ffx-exhaustive", "de-mitm")


def _game_setup(a):
    k, n = a.k, a.n
    if a.adversary == "fx-exhaustive":
        p = a.p if a.p is not None else 1 << (k + n)
        adv = attacks.fx_exhaustive_distinguisher(k, n, p)
        params, bound = games.GameParams("fx", k, n), bounds.eval_bound("kr_classical", k=k, n=n, p=p, q=adv.q)
    elif a.adversary == "fx-grover":
        adv = attacks.fx_grover_distinguisher(k, n, a.iterations)
        params, bound = games.GameParams("fx", k, n), bounds.eval_bound("fx_na", k=k, n=n, p=adv.p, q=adv.q)
    elif a.adversary == "ffx-exhaustive":
        m = a.m if a.m is not None else n
        p = a.p if a.p is not None else 1 << (k + n)
        adv = attacks.ffx_exhaustive_distinguisher(k, n, p)
        params, bound = games.GameParams("ffx", k, n, m), bounds.eval_bound("ffx", k=k, n=n, p=p, q=adv.q)
    else:
        adv = attacks.de_mitm_distinguisher(k, n)
        params = games.GameParams("de", k, n)
        bound = bounds.eval_bound("de", k=k, q=adv.q) if k >= 2 else None
    return adv, params, bound


def cmd_game(a):
    adv, params, bound = _game_setup(a)
    if (a.which == "prf") != (params.kind == "ffx"):
        raise UsageError(f"adversary {a.adversary} does not play the {a.which} game")
    if a.which == "sprp-na" and adv.script is None:
        raise UsageError(f"adversary {a.adversary} is adaptive; use the sprp game")
    trials = a.trials or 10_000
    est = games.estimate_advantage(adv, params, trials, a.fail_prob, Rng(a.seed), a.which, a.parallel)
    doc = est.to_dict(a.which, params)
    doc.update(adversary=adv.name, p=adv.p, q=adv.q, flagged=est.flagged)
    if bound is not None:
        doc.update(bound=bound.value, bound_formula=bound.formula,
                   within_bound=est.advantage <= bound.value + est.ci_half_width)
    row = {"game": a.which, "adversary": adv.name, **params.to_dict(), "p": adv.p, "q": adv.q,
           "p_real": est.p_real, "p_ideal": est.p_ideal, "advantage": est.advantage,
           "ci": est.ci_half_width, "trials": trials, "bound": doc.get("bound", "")}
    doc.pop("trials", None)
    doc.pop("seed", None)
    doc["trials"] = trials
    return [row], doc, {"check": doc.get("within_bound", True),
                        "why": "advantage exceeds bound + ci"}


# -- attacks ------------------------------------------------------------------


def _distinct_messages(rng, n, count):
    return rng.sample(1 << n, count)


def _attack_exhaustive(job):
    seed, i, k, n, npairs = job
    r = Rng(seed).child(i)
    E = IdealCipher(k, n, r.child(0))
    K = r.child(1).bits(k)
    pairs = [(m, E.enc(K, m)) for m in _distinct_messages(r.child(2), n, npairs)]
    keys = attacks.exhaustive_key_search(E, pairs, k)
    return {"instance": i, "key": K, "candidates": len(keys), "success": K in keys}


def _attack_mitm(job):
    seed, i, k, n, npairs = job
    r = Rng(seed).child(i)
    E = IdealCipher(k, n, r.child(0))
    kr = r.child(1)
    key = DeKey(kr.bits(k), kr.bits(k))
    pairs = [(m, de_enc(E, key, m)) for m in _distinct_messages(r.child(2), n, npairs)]
    res = attacks.mitm_de(E, pairs, k)
    brute = attacks.brute_force_de(E, pairs, k)
    limit = 2 * (1 << k) + 2 * res.survivors
    return {"instance": i, "k1": key.k1, "k2": key.k2, "keys": len(res.keys), "survivors": res.survivors,
            "forward_calls": res.forward_calls, "inverse_calls": res.inverse_calls,
            "matches_exhaustive": sorted(res.keys) == sorted(brute), "within_call_limit": res.forward_calls <= limit,
            "planted_found": (key.k1, key.k2) in set(res.keys)}


def _attack_simon(job):
    seed, i, n = job
    r = Rng(seed).child(i)
    P = sample_permutation(n, r.child(0))
    k2 = r.child(1).randbelow((1 << n) - 1) + 1
    table = np.asarray(P.table, dtype=np.int64)
    em = lambda x: int(table[x ^ k2]) ^ k2  # noqa: E731
    res = attacks.even_mansour_break(P, em, n, r.child(2))
    g = attacks.even_mansour_period_table(P, k2)
    return {"instance": i, "n": n, "k2": k2, "recovered": res.k2, "rounds": res.rounds, "exact": res.k2 == k2,
            "verified": attacks.has_period(g, res.k2) and res.k2 != 0, "degenerate": res.degenerate}


def _attack_fx_q2(job):
    seed, i, k, n = job
    r = Rng(seed).child(i)
    E = IdealCipher(k, n, r.child(0))
    kr = r.child(1)
    key = FxKey(kr.bits(k), kr.bits(n))
    res = attacks.fx_q2_break(E, lambda x: fx_enc(E, key, x), k, n, r.child(2))
    rec = FxKey(res.K1, res.K2)
    equivalent = all(fx_enc(E, rec, x) == fx_enc(E, key, x) for x in range(1 << n))
    return {"instance": i, "K1": key.k1, "K2": key.k2, "rec_K1": res.K1, "rec_K2": res.K2,
            "exact": (res.K1, res.K2) == (key.k1, key.k2), "equivalent": equivalent,
            "quantum_queries": res.quantum_construction_queries, "classical_queries": res.classical_construction_queries,
            "candidates": len(res.candidates)}


def cmd_attack(a):
    trials = a.trials or 1
    seed = a.seed
    if a.which == "exhaustive":
        rows = _pmap(_attack_exhaustive, [(seed, i, a.k, a.n, a.pairs) for i in range(trials)], a.parallel)
        ok = all(r["success"] for r in rows)
        summary = {"success_rate": sum(r["success"] for r in rows) / trials}
        return rows, summary, {"check": ok, "why": "planted key missing from the candidates"}
    if a.which == "mitm":
        rows = _pmap(_attack_mitm, [(seed, i, a.k, a.n, a.pairs) for i in range(trials)], a.parallel)
        ok = all(r["matches_exhaustive"] and r["within_call_limit"] and r["planted_found"] for r in rows)
        summary = {"matches_exhaustive": sum(r["matches_exhaustive"] for r in rows), "instances": trials}
        return rows, summary, {"check": ok, "why": "MitM disagrees with exhaustive search"}
    if a.which == "grover":
        r = Rng(seed)
        marked = np.zeros(1 << a.k, dtype=np.int64)
        target = r.child(0).bits(a.k)
        marked[target] = 1
        top = a.iterations if a.iterations is not None else int(math.pi / 4 * math.sqrt(2 ** a.k))
        rows = []
        for t in range(top + 1):
            res = attacks.grover_search(a.k, marked, t, r.child(1 + t))
            closed = attacks.grover_closed_form(a.k, 1, t)
            rows.append({"iterations": t, "probability": res.probability, "closed_form": closed,
                         "abs_error": abs(res.probability - closed), "sampled_key": res.key, "success": res.success})
        ok = all(row["abs_error"] <= 1e-6 for row in rows)
        return rows, {"k": a.k, "marked": target}, {"check": ok, "why": "simulation disagrees with closed form"}
    if a.which == "simon":
        rows = _pmap(_attack_simon, [(seed, i, a.n) for i in range(trials)], a.parallel)
        rounds = sorted(r["rounds"] for r in rows)
        summary = {"verified": sum(r["verified"] for r in rows), "exact": sum(r["exact"] for r in rows),
                   "instances": trials, "median_rounds": float(np.median(rounds))}
        return rows, summary, {"check": all(r["verified"] for r in rows), "why": "recovered key has no period"}
    rows = _pmap(_attack_fx_q2, [(seed, i, a.k, a.n) for i in range(trials)], a.parallel)
    summary = {"equivalent": sum(r["equivalent"] for r in rows), "exact": sum(r["exact"] for r in rows),
               "instances": trials}
    return rows, summary, {"check": all(r["equivalent"] for r in rows), "why": "recovered key does not reproduce FX"}


# -- reductions ---------------------------------------------------------------


def _reduce_split(job):
    seed, i, D, R = job
    r = Rng(seed).child(i)
    inst = listdis.gen_instance("1ED", D, R, 1, r.child(0))
    w = listdis.reduce_eds_from_lds(listdis.ld_search_alg, inst, r.child(1))
    return {"trial": i, "success": listdis.ed_relation(inst.L, w)}


def _reduce_binsearch(job):
    seed, i, D, R = job
    r = Rng(seed).child(i)
    inst = listdis.gen_instance("1LD", D, R, 1, r.child(0))
    tr = listdis.binary_search_lds(listdis.ld_decision_alg, inst.L0, inst.L1, r.child(1), R)
    return {"trial": i, "success": listdis.ld_relation(inst.L0, inst.L1, tr.witness), "queries": tr.queries,
            "rounds": tr.rounds, "decision_calls": tr.decision_calls}


def _reduce_amplify(job):
    seed, i, cls, p_cls, delta, p0, t = job
    r = Rng(seed).child(i)
    calls = [0]

    def base(L, rr):
        calls[0] += 1
        return int(rr.random() < p_cls)

    out = listdis.amplify_decision(base, delta, p0, t, None, r)
    return {"trial": i, "class": cls, "output": out, "error": out != cls, "base_calls": calls[0]}


def _reduce_chain(job):
    seed, i, D, R = job
    r = Rng(seed).child(i)
    inst = listdis.gen_instance("1ED", D, R, 1, r.child(0))
    w = listdis.chain_search(inst, R, r.child(1))
    return {"trial": i, "success": listdis.ed_relation(inst.L, w)}


def _reduce_de2ld(job):
    seed, i, cls, k, n, R = job
    r = Rng(seed).child(i)
    inst = listdis.gen_instance("1LD", 1 << k, R, cls, r.child(0))
    adv = attacks.de_mitm_distinguisher(k, n)
    return {"trial": i, "class": cls, "output": listdis.de_to_ld_adversary(adv, inst, k, n, r.child(1))}


def cmd_reduce(a):
    trials = a.trials or 1000
    seed = a.seed
    if a.which in ("split", "chain"):
        D = a.D or 32
        R = a.R or 3 * D * D
        fn = _reduce_split if a.which == "split" else _reduce_chain
        rows = _pmap(fn, [(seed, i, D, R) for i in range(trials)], a.parallel)
        return rows, {"D": D, "R": R, "success_rate": sum(r["success"] for r in rows) / trials}, {}
    if a.which == "binsearch":
        D = a.D or 16
        R = a.R or 3 * D * D
        rows = _pmap(_reduce_binsearch, [(seed, i, D, R) for i in range(trials)], a.parallel)
        limit = 3 * D * int(math.log2(D))
        worst = max(r["queries"] for r in rows)
        summary = {"D": D, "R": R, "success_rate": sum(r["success"] for r in rows) / trials,
                   "max_queries": worst, "query_limit": limit}
        return rows, summary, {"check": worst <= limit, "why": "query count above 3 q lg D"}
    if a.which == "amplify":
        jobs = [(seed, 2 * i + cls, cls, a.p1 if cls else a.p0, a.delta, a.p0, a.t)
                for i in range(trials) for cls in (0, 1)]
        rows = _pmap(_reduce_amplify, jobs, a.parallel)
        runs = listdis.amplification_runs(a.t, a.delta)
        summary = {"repetitions": runs, "target_error": 2.0 ** -a.t}
        for cls in (0, 1):
            sel = [r for r in rows if r["class"] == cls]
            summary[f"error_class{cls}"] = sum(r["error"] for r in sel) / len(sel)
        ok = all(r["base_calls"] == runs for r in rows)
        return rows, summary, {"check": ok, "why": "repetition count differs from the formula"}
    k, n = a.k or 1, a.n or 2
    R = a.R or 1 << k
    jobs = [(seed, 2 * i + cls, cls, k, n, R) for i in range(trials) for cls in (0, 1)]
    rows = _pmap(_reduce_de2ld, jobs, a.parallel)
    summary = {"k": k, "n": n, "R": R}
    for cls in (0, 1):
        sel = [r["output"] for r in rows if r["class"] == cls]
        summary[f"pr_one_class{cls}"] = sum(sel) / len(sel)
    return rows, summary, {}


# -- hybrids ------------------------------------------------------------------


def _hybrid_circuits(a):
    if a.circuit:
        text = Path(a.circuit).read_text()
        return [hybrids.AdversaryCircuit.from_json(text)]
    count = a.random or 1
    r = Rng(a.seed)
    return [hybrids.random_circuit(a.p, a.q, a.length, r.child(i), a.k, a.n, a.m) for i in range(count)]


def _hybrid_job(job):
    which, k, n, m, text, i, tol = job
    c = hybrids.AdversaryCircuit.from_json(text)
    params = c.params(k, n, m)
    row = {"circuit": i, "p": params.p, "q": params.q}
    if which in ("claim1", "claim2"):
        res = (hybrids.check_claim1 if which == "claim1" else hybrids.check_claim2)(c, params)
        row.update(deviation=res.deviation, **{name.replace("~", "t"): v for name, v in res.probabilities.items()})
        row["ok"] = res.deviation <= tol
    elif which == "claim3":
        try:
            res = hybrids.check_claim3(c, params, tol=tol)
        except AssertionError:
            p3 = hybrids.run_hybrid("H3~", c, params)
            p4 = hybrids.run_hybrid("H4~", c, params)
            row.update(delta=abs(p3 - p4), bound=hybrids.claim3_bound(params), ok=False)
            return row
        row.update(delta=res.delta, bound=res.bound, theorem_bound=res.theorem_bound, guess=res.guess,
                   guess_bound=res.guess_bound, p_h3=res.p_h3, p_h4=res.p_h4)
        row["ok"] = res.delta <= min(1.0, res.bound) + tol and res.delta <= res.guess_bound + tol
    else:
        g, masses = hybrids.run_quantum_guess_game(c, params)
        row.update(guess=g, masses=masses, ok=True)
    return row


def cmd_hybrid(a):
    circuits = _hybrid_circuits(a)
    jobs = [(a.which, a.k, a.n, a.m, c.to_json(), i, a.tol) for i, c in enumerate(circuits)]
    rows = _pmap(_hybrid_job, jobs, a.parallel)
    summary = {"k": a.k, "n": a.n, "m": a.m, "circuits": len(rows)}
    if a.which in ("claim1", "claim2"):
        summary["max_deviation"] = max(r["deviation"] for r in rows)
    elif a.which == "claim3":
        summary["max_delta"] = max(r["delta"] for r in rows)
    return rows, summary, {"check": all(r["ok"] for r in rows), "why": "hybrid invariant violated"}


# -- reprogramming ------------------------------------------------------------

_CHUNK = 50_000


def _reprogram_chunk(job):
    seed, c, ev, inv, k, n, count = job
    return games.reprogram_histogram((ev, inv), k, n, count, Rng(seed).child(c))


def cmd_reprogram(a):
    from scipy.stats import chisquare

    N = 1 << a.n
    if N > 8:
        raise UsageError("uniformity test enumerates all permutations; need n <= 3")
    samples = a.trials or 100_000
    ev, inv = _ints(a.ev), _ints(a.inv)
    jobs = []
    for c, lo in enumerate(range(0, samples, _CHUNK)):
        jobs.append((a.seed, c, tuple(ev), tuple(inv), a.k, a.n, min(_CHUNK, samples - lo)))
    counts: dict = {}
    for part in _pmap(_reprogram_chunk, jobs, a.parallel):
        for key, v in part.items():
            counts[key] = counts.get(key, 0) + v
    perms = list(itertools.permutations(range(N)))
    observed = np.array([counts.get(p, 0) for p in perms], dtype=float)
    if observed.sum() != samples:
        raise InvariantError("sampled rows are not all permutations")
    stat, pval = chisquare(observed)
    expected = samples / len(perms)
    rows = [{"permutation": list(p), "count": int(o), "expected": expected} for p, o in zip(perms, observed)]
    summary = {"k": a.k, "n": a.n, "ev": ev, "inv": inv, "samples": samples, "cells": len(perms),
               "chi2": float(stat), "p_value": float(pval), "alpha": a.alpha, "passed": bool(pval >= a.alpha)}
    return rows, summary, {"check": pval >= a.alpha, "why": "chi-square rejects uniformity"}


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $KLE_SEED or 0)")
    common.add_argument("--trials", type=int, default=None, help="trials, instances or samples")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    common.add_argument("--json", dest="format", action="store_const", const="json", help="same as --format json")
    common.add_argument("--out", default=None, help="output path (CSV also writes <out>.json)")
    common.add_argument("--parallel", type=int, default=1, help="worker processes")

    p = _Parser(prog="kle", description="Key-length extension workbench.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", parents=[common], help="evaluate or invert an advantage bound")
    b.add_argument("--formula", required=True, choices=bounds.FORMULAS)
    for name in _BOUND_INPUTS:
        b.add_argument(f"--{name.replace('_', '-')}", dest=name, type=_num, default=None)
    b.add_argument("--invert", choices=_BOUND_INPUTS, default=None, help="solve for this input")
    b.add_argument("--target", type=_num, default=None)
    b.add_argument("--sweep", default=None, help="VAR=LO:HI, evaluate at VAR=2^LO..2^HI")
    b.set_defaults(func=cmd_bounds)

    g = sub.add_parser("game", parents=[common], help="Monte Carlo advantage of a distinguisher")
    g.add_argument("which", choices=("sprp", "prf", "sprp-na"))
    g.add_argument("--adversary", choices=_ADVERSARIES, required=True)
    g.add_argument("--k", type=int, default=4)
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--m", type=int, default=None)
    g.add_argument("--p", type=int, default=None)
    g.add_argument("--iterations", type=int, default=1)
    g.add_argument("--fail-prob", type=float, default=1e-3)
    g.set_defaults(func=cmd_game)

    at = sub.add_parser("attack", parents=[common], help="run a key-recovery attack")
    at.add_argument("which", choices=("exhaustive", "mitm", "grover", "simon", "fx-q2"))
    at.add_argument("--k", type=int, default=4)
    at.add_argument("--n", type=int, default=8)
    at.add_argument("--pairs", type=int, default=2)
    at.add_argument("--iterations", type=int, default=None)
    at.set_defaults(func=cmd_attack)

    r = sub.add_parser("reduce", parents=[common], help="run a list-problem reduction")
    r.add_argument("which", choices=("split", "binsearch", "amplify", "de2ld", "chain"))
    r.add_argument("--D", type=int, default=None)
    r.add_argument("--R", type=int, default=None)
    r.add_argument("--k", type=int, default=None)
    r.add_argument("--n", type=int, default=None)
    r.add_argument("--p1", type=float, default=0.7)
    r.add_argument("--p0", type=float, default=0.3)
    r.add_argument("--t", type=int, default=3)
    r.add_argument("--delta", type=float, default=0.4)
    r.set_defaults(func=cmd_reduce)

    h = sub.add_parser("hybrid", parents=[common], help="exact FFX hybrid-game checks")
    h.add_argument("which", choices=("claim1", "claim2", "claim3", "guess"))
    h.add_argument("--k", type=int, default=1)
    h.add_argument("--n", type=int, default=1)
    h.add_argument("--m", type=int, default=1)
    h.add_argument("--circuit", default=None, help="AdversaryCircuit JSON file")
    h.add_argument("--random", type=int, default=None, help="number of random circuits")
    h.add_argument("--p", type=int, default=1)
    h.add_argument("--q", type=int, default=1)
    h.add_argument("--length", type=int, default=8)
    h.add_argument("--tol", type=float, default=1e-9)
    h.set_defaults(func=cmd_hybrid)

    u = sub.add_parser("reprogram-uniformity", parents=[common], help="chi-square test of the reprogrammed row")
    u.add_argument("--k", type=int, default=1)
    u.add_argument("--n", type=int, default=2)
    u.add_argument("--ev", default="0", help="comma-separated forward script points")
    u.add_argument("--inv", default="", help="comma-separated inverse script points")
    u.add_argument("--alpha", type=float, default=1e-3)
    u.set_defaults(func=cmd_reprogram)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        if a.seed is None:
            a.seed = _default_seed()
        if a.parallel < 1:
            raise UsageError("--parallel must be at least 1")
        t0 = time.perf_counter()
        rows, summary, opts = a.func(a)
        wall = time.perf_counter() - t0
        command = a.command + (f" {a.which}" if hasattr(a, "which") else "")
        emit_report(command, rows, summary, seed=a.seed, wall_time=wall, fmt=a.format, out=a.out,
                    sort_by=opts.get("sort_by"))
        if not opts.get("check", True):
            print(f"kle: invariant failed: {opts.get('why')}", file=sys.stderr)
            return EXIT_INVARIANT
        return EXIT_OK
    except (InvariantError, AssertionError, attacks.SimonFailure) as err:
        print(f"kle: invariant failed: {err}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, ValueError, OSError) as err:
        print(f"kle: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
