"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for just the summary lines.
"""
import functools
import time

import pytest

from reachflow.cfl import REACHES_MC, REACHES_R_ONLY, UNREACHABLE, run_cfl
from reachflow.fixtures import load
from reachflow.graphs import build_gri
from reachflow.immutability import MUTABLE, POLY, READONLY, infer
from reachflow.lang import FieldId
from reachflow.oracle import DEFAULT_BOUND
from reachflow.qualifiers import MULTI, NEG, SINGLE, infer_types
from reachflow.validation import (compare_precision, fixture_corpus, random_corpus,
                                  validate_corpus)

CORPUS_SIZE = 500
CORPUS_SEED = 0


def _var(p, name):
    return next(v for v in p.variables() if str(v) == name)


@functools.lru_cache(maxsize=None)
def corpus_report():
    t0 = time.perf_counter()
    items = fixture_corpus() + random_corpus(CORPUS_SIZE, CORPUS_SEED)
    rep = validate_corpus(items, bound=DEFAULT_BOUND, seed=CORPUS_SEED)
    return rep, time.perf_counter() - t0


def fixture_set_get():
    t0 = time.perf_counter()
    p = load("set_get_two_objects")
    g = build_gri(p, infer(p))
    a, b, c, d = (_var(p, f"C.main:{n}") for n in "abcd")
    this_get, ret = _var(p, "A.get:this"), _var(p, "A.get:ret")
    problems = []

    one = run_cfl(g, [b])
    typed = infer_types(p, g, {b: NEG})
    if one.classify(a) != REACHES_MC or typed.typing[a] != NEG:
        problems.append("a->b not reported")
    for v in (this_get, ret):
        if one.classify(v) != REACHES_R_ONLY or typed.typing[v] != "poly":
            problems.append(f"{v} not poly")

    both = run_cfl(g, [b, d])
    cfl_flows = {(x, s) for x in (a, c) for s in (b, d) if both.classify(x, s) != UNREACHABLE}
    type_flows = {(x, s) for s in (b, d)
                  for x in (a, c) if infer_types(p, g, {s: NEG}).typing[x] == NEG}
    want = {(a, b), (c, d)}
    for name, got in (("cfl", cfl_flows), ("types", type_flows)):
        if got != want:
            problems.append(f"{name} flows {sorted((str(x), str(s)) for x, s in got)}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 1.0:
        problems.append(f"took {elapsed:.2f}s")
    return not problems, "; ".join(problems) or f"flows a->b, c->d only ({elapsed:.3f}s)"


def fixture_store_param():
    t0 = time.perf_counter()
    p = load("write_through_param")
    imm = infer(p)
    want = {"H.m:p": MUTABLE, "Main.main:y": MUTABLE, "Main.main:z": MUTABLE,
            "H.m:x": POLY, "H.m:ret": POLY,
            "Main.main:w": READONLY, "Main.main:a": READONLY, "Main.main:b": READONLY}
    problems = [f"{k} is {imm.of(_var(p, k))}" for k, q in want.items()
                if imm.of(_var(p, k)) != q]
    for f in (FieldId("Y", "f"), FieldId("X", "g")):
        if imm.of(f) != READONLY:
            problems.append(f"{f} is {imm.of(f)}")
    g = build_gri(p, imm)
    if len(g.inverse) != 3:
        problems.append(f"{len(g.inverse)} inverse edges")
    a, b = _var(p, "Main.main:a"), _var(p, "Main.main:b")
    if run_cfl(g, [b]).classify(a) == UNREACHABLE:
        problems.append("a->b missed")
    if run_cfl(g, [a]).classify(b) != UNREACHABLE:
        problems.append("b->a reported")
    elapsed = time.perf_counter() - t0
    if elapsed >= 1.0:
        problems.append(f"took {elapsed:.2f}s")
    return not problems, "; ".join(problems) or f"qualifiers, 3 inverse edges, a->b only ({elapsed:.3f}s)"


def fixture_adapters():
    p = load("two_slot_adapter")
    g = build_gri(p, infer(p))
    pins = {s: NEG for s in p.sinks}
    # variables whose only route to a sink runs through m; a also reads a.f directly
    through_m = {"x", "y", "a1", "x1", "y1"}

    def negs(mode):
        tr = infer_types(p, g, pins, mode)
        return {v.name for v, q in tr.typing.items()
                if q == NEG and getattr(v, "method", "") == "Main.main"} & through_m

    multi, single = negs(MULTI), negs(SINGLE)
    extra = single - multi
    ok = multi == {"x", "y1"} and extra == {"y", "a1"}
    return ok, f"multi neg {sorted(multi)}, single adds {sorted(extra)}"


def witness_gate():
    rep, elapsed = corpus_report()
    s = rep.summary()
    chains, fails, inc = s["chains"], s["chain_failures"], s["chain_inconclusive"]
    ok = fails == 0 and inc <= 0.02 * chains and elapsed < 300
    lines = [f"{r.name}: {m}" for r in rep.programs
             for m in r.witnesses.failures + r.witnesses.inconclusive]
    detail = (f"{s['programs']} programs, {chains} chains, {fails} unwitnessed, "
              f"{inc} inconclusive ({100 * inc / max(chains, 1):.2f}%), {elapsed:.1f}s")
    return ok, detail + "".join(f"\n    {ln}" for ln in lines)


def equivalence_gate():
    s = corpus_report()[0].summary()
    return s["equivalence_violations"] == 0, f"{s['equivalence_violations']} violations"


def oracle_gate():
    s = corpus_report()[0].summary()
    cd, rd = s["cfl_oracle_disagreements"], s["ri_oracle_disagreements"]
    return (cd == 0 and rd == 0 and 12 <= DEFAULT_BOUND <= 14,
            f"bound {DEFAULT_BOUND}: cfl {cd} disagreements ({s['cfl_oracle_inconclusive']} "
            f"inconclusive), immutability {rd} ({s['ri_oracle_inconclusive']} inconclusive)")


def precision_gate():
    s = corpus_report()[0].summary()
    branch = compare_precision(load("branch_merge"))
    p = load("write_through_param")
    store = compare_precision(p, [_var(p, "Main.main:a"), _var(p, "Main.main:b")])
    fails = s["precision_inclusion_failures"]
    ok = fails == 0 and branch.strict and store.strict
    return ok, (f"{fails} inclusion failures; strict: branch_merge {branch.strict}, "
                f"write_through_param {store.strict}")


def invariant_gate():
    s = corpus_report()[0].summary()
    ok = (s["step_failures"] == 0 and s["assoc_failures"] == 0
          and s["assoc_triples"] >= 10_000)
    return ok, (f"creation chained: {s['step_checks']} steps, {s['step_failures']} failures; "
                f"associativity: {s['assoc_triples']} triples, {s['assoc_failures']} failures")


CRITERIA = [
    (1, "set/get fixture flows", fixture_set_get),
    (2, "write-through-parameter fixture", fixture_store_param),
    (3, "two-slot adapter fixture", fixture_adapters),
    (4, "interpreter chains witnessed", witness_gate),
    (5, "engine equivalence", equivalence_gate),
    (6, "oracle agreement", oracle_gate),
    (7, "precision direction", precision_gate),
    (8, "chain invariant and associativity", invariant_gate),
]


def report(num, title, fn):
    ok, detail = fn()
    line = f"{'PASS' if ok else 'FAIL'} criterion {num} ({title}): {detail}"
    return ok, line


class TestAcceptance:
    @pytest.mark.parametrize("num,title,fn", CRITERIA, ids=[f"c{n}" for n, _, _ in CRITERIA])
    def test_criterion(self, num, title, fn, capsys):
        ok, line = report(num, title, fn)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line


if __name__ == "__main__":
    for crit in CRITERIA:
        print(report(*crit)[1])
