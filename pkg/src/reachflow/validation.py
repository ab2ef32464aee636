"""Executable checks tying the interpreter, the graphs and both engines together."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .cfl import REACHES_MC, REACHES_R_ONLY, UNREACHABLE, run_cfl
from .graphs import FlowGraph, build_gbi, build_gri
from .immutability import MUTABLE, READONLY, adapt_ri_seq, infer
from .interp import (Inst, Residual, abstract_delta, chain_sources_pure, check_creation_chained,
                     ctx_diff, delta_concat, run)
from .lang import Program
from .oracle import (DEFAULT_BOUND, EXHAUSTED, ClassAnswer, PathOracle, csfi_classes_per_sink,
                     oracle_class, ri_oracle)
from .qualifiers import MULTI, NEG, POLY, POS, infer_types

AGREE, SOUNDNESS, PRECISION = "agree", "soundness-violation", "precision-violation"
_QUAL_RANK = {NEG: 0, POLY: 1, POS: 2}
_CLASS_RANK = {UNREACHABLE: 0, REACHES_R_ONLY: 1, REACHES_MC: 2}


# -- chain witnesses ------------------------------------------------------------

@dataclass
class ChainMiss:
    src: Inst
    dst: Inst
    residual: Residual
    direction: str  # "forward" or "inverse"
    status: str     # "absent" or "exhausted"

    def __str__(self):
        return f"{self.direction} {self.src} -> {self.dst} [{self.residual}]: {self.status}"


@dataclass
class WitnessReport:
    checked: int = 0
    failures: list = field(default_factory=list)
    inconclusive: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def merge(self, other: "WitnessReport"):
        self.checked += other.checked
        self.failures += other.failures
        self.inconclusive += other.inconclusive


def _lhs_quals(result, ctx, p: Program, imm):
    """Immutability of the call's left-hand side for each frame of ``ctx``."""
    sites = {c.site: (m, c) for m in p.methods() for c in _calls(m)}
    out = []
    for f in ctx[1:]:
        m, c = sites[result.frames[f]]
        out.append(imm.of(m.var(c.target)) if c.target is not None else READONLY)
    return out


def _calls(m):
    from .lang import Call, iter_stmts
    return [s for s in iter_stmts(m.lowered_body()) if isinstance(s, Call)]


def check_chain_witnesses(result, g: FlowGraph, imm, p: Program, bound: int = DEFAULT_BOUND) -> WitnessReport:
    """Every recorded chain ``(x^A, y^B)`` needs a path ``x -> y`` whose
    call/return string reduces to the abstracted context difference; when
    ``y`` is mutable in context ``B`` the reverse path must exist as well."""
    rep = WitnessReport()
    oracle = PathOracle(g, bound=bound)
    for src, dst in sorted(result.history):
        rep.checked += 1
        fwd = abstract_delta(ctx_diff(src.ctx, dst.ctx), result.frames)
        ans = oracle.query(src.var, dst.var, fwd)
        if not ans.found:
            miss = ChainMiss(src, dst, fwd, "forward", ans.status)
            (rep.inconclusive if ans.status == EXHAUSTED else rep.failures).append(miss)
        if adapt_ri_seq(_lhs_quals(result, dst.ctx, p, imm), imm.of(dst.var)) == MUTABLE:
            back = abstract_delta(ctx_diff(dst.ctx, src.ctx), result.frames)
            ans = oracle.query(dst.var, src.var, back)
            if not ans.found:
                miss = ChainMiss(dst, src, back, "inverse", ans.status)
                (rep.inconclusive if ans.status == EXHAUSTED else rep.failures).append(miss)
    return rep


# -- per-step and context-algebra checks -----------------------------

@dataclass
class CheckReport:
    checked: int = 0
    failures: list = field(default_factory=list)
    skipped: int = 0  # undefined concatenations

    @property
    def ok(self) -> bool:
        return not self.failures


def run_with_step_checks(p: Program, script=()):
    """Run ``p`` checking creation-site chains and source purity after every step."""
    rep = CheckReport()

    def hook(interp, step):
        rep.checked += 1
        if not check_creation_chained(interp.st):
            rep.failures.append(f"creation chain missing after {step.kind} at {step.stmt.loc}")
        if not chain_sources_pure(interp.st):
            rep.failures.append(f"heap slot used as chain source at {step.stmt.loc}")

    res = run(p, script, on_step=hook)
    return res, rep


def sample_associativity(result, n: int, rng: random.Random) -> CheckReport:
    """Compare concatenated abstract deltas on ``n`` time-ordered context triples."""
    rep = CheckReport()
    ctxs = [t.ctx for t in result.trace]
    if not ctxs:
        return rep
    fr = result.frames
    for _ in range(n):
        i, j, k = sorted(rng.randrange(len(ctxs)) for _ in range(3))
        a, b, c = ctxs[i], ctxs[j], ctxs[k]
        ab = abstract_delta(ctx_diff(a, b), fr)
        bc = abstract_delta(ctx_diff(b, c), fr)
        ac = abstract_delta(ctx_diff(a, c), fr)
        got = delta_concat(ab, bc)
        if got is None:
            rep.skipped += 1
            continue
        rep.checked += 1
        if got != ac:
            rep.failures.append(f"{ab} + {bc} = {got}, expected {ac}")
    return rep


# -- engine equivalence ------------------------------------------------------------

@dataclass
class EquivalenceReport:
    rows: dict  # var -> (class, qualifier, verdict)

    @property
    def violations(self) -> dict:
        return {v: r for v, r in self.rows.items() if r[2] != AGREE}

    @property
    def verdict(self) -> str:
        return AGREE if not self.violations else "disagree"

    @property
    def ok(self) -> bool:
        return not self.violations


def check_equivalence(P, S, variables, setting: str = "neg") -> EquivalenceReport:
    """Pair each variable's reachability class with its inferred qualifier.

    Reaching a sink with balanced or open-call paths means neg, reaching
    only with open returns means poly, otherwise pos (mirrored for sources).
    A qualifier that is too weak for its class is a soundness violation; one
    that is too strong is a precision violation.
    """
    from .analysis import CLASS_TO_QUAL
    table = CLASS_TO_QUAL[setting]
    typing = getattr(S, "typing", S)
    rows = {}
    for v in variables:
        cls = P.classify(v) if hasattr(P, "classify") else P[v]
        q = typing.get(v, POS if setting == "neg" else NEG)
        want = table[cls]
        if q == want:
            verdict = AGREE
        else:
            # in the negative setting a larger qualifier misses flows
            looser = _QUAL_RANK[q] > _QUAL_RANK[want]
            if setting == "pos":
                looser = not looser
            verdict = SOUNDNESS if looser else PRECISION
        rows[v] = (cls, q, verdict)
    return EquivalenceReport(rows)


# -- precision of trimming inverse edges ------------------------------------------

@dataclass
class PrecisionReport:
    bi: dict   # (var, sink) -> class
    ri: dict

    def reached(self, which: str) -> set:
        table = self.bi if which == "bi" else self.ri
        return {k for k, c in table.items() if c != UNREACHABLE}

    @property
    def extra(self) -> set:
        """(var, sink) pairs reachable only with every inverse edge present."""
        return self.reached("bi") - self.reached("ri")

    @property
    def included(self) -> bool:
        return self.reached("ri") <= self.reached("bi")

    @property
    def strict(self) -> bool:
        return self.included and bool(self.extra)

    def to_json(self) -> dict:
        return {"schema": 1, "extra": sorted(f"{v} -> {n}" for v, n in self.extra),
                "included": self.included}


def compare_precision(p: Program, sinks=None) -> PrecisionReport:
    """Run reachability on both graphs with the same sinks."""
    sinks = list(p.sinks if sinks is None else sinks)
    imm = infer(p)
    out = []
    for g in (build_gbi(p), build_gri(p, imm)):
        res = run_cfl(g, sinks)
        out.append({(v, n): res.classify(v, n) for v in p.variables() for n in sinks})
    return PrecisionReport(*out)


# -- engines against the oracle --------------------------------------------------

@dataclass
class OracleReport:
    checked: int = 0
    disagreements: list = field(default_factory=list)
    inconclusive: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements


def cfl_vs_oracle(g: FlowGraph, sinks, bound: int = DEFAULT_BOUND) -> OracleReport:
    """Reachability classes from the fixpoint against bounded enumeration."""
    res = run_cfl(g, sinks)
    rep = OracleReport()
    for v in sorted(g.nodes):
        per = csfi_classes_per_sink(g, v, sinks, res.fields, bound)
        for n in sinks:
            rep.checked += 1
            ans = per[n]
            seen = oracle_class(ClassAnswer(ans.classes, False))
            got = res.classify(v, n)
            if got == seen:
                continue
            if ans.exhausted and _CLASS_RANK[got] > _CLASS_RANK[seen]:
                rep.inconclusive.append((v, n, got))
            else:
                rep.disagreements.append((v, n, got, seen))
    return rep


def ri_vs_oracle(p: Program, bound: int = DEFAULT_BOUND) -> OracleReport:
    imm = infer(p)
    want = ri_oracle(imm.graph, imm.updates, bound)
    rep = OracleReport()
    for n, q in sorted(want.items(), key=lambda kv: str(kv[0])):
        rep.checked += 1
        got = imm.nodes.get(n, READONLY)
        if q is None:
            if got != MUTABLE:
                rep.inconclusive.append((n, got))
        elif q != got:
            rep.disagreements.append((n, got, q))
    return rep


# -- whole-program gate --------------------------------------------------------------

@dataclass
class ProgramReport:
    name: str
    witnesses: WitnessReport
    steps: CheckReport
    assoc: CheckReport
    equivalence: EquivalenceReport
    cfl_oracle: OracleReport
    ri_oracle: OracleReport
    precision: PrecisionReport
    trace_error: Optional[str] = None
    budget_exhausted: bool = False

    @property
    def ok(self) -> bool:
        return (self.witnesses.ok and self.steps.ok and self.assoc.ok and self.equivalence.ok
                and self.cfl_oracle.ok and self.ri_oracle.ok and self.precision.included)


def validate_program(p: Program, script=(), name: str = "", bound: int = DEFAULT_BOUND,
                     assoc_samples: int = 40, rng: Optional[random.Random] = None,
                     sinks=None) -> ProgramReport:
    rng = rng or random.Random(0)
    sinks = list(p.sinks if sinks is None else sinks)
    imm = infer(p)
    g = build_gri(p, imm)
    res, steps = run_with_step_checks(p, script)
    if res.budget_exhausted:
        t1 = WitnessReport()
    else:
        t1 = check_chain_witnesses(res, g, imm, p, bound)
    assoc = sample_associativity(res, assoc_samples, rng)
    P = run_cfl(g, sinks)
    S = infer_types(p, g, {s: NEG for s in sinks}, MULTI, "neg")
    eq = check_equivalence(P, S, p.variables(), "neg")
    return ProgramReport(name, t1, steps, assoc, eq, cfl_vs_oracle(g, sinks, bound),
                         ri_vs_oracle(p, bound), compare_precision(p, sinks),
                         res.error, res.budget_exhausted)


@dataclass
class CorpusReport:
    programs: list = field(default_factory=list)

    def count(self, attr: str, part: str) -> int:
        return sum(len(getattr(getattr(r, attr), part)) for r in self.programs)

    def total(self, attr: str) -> int:
        return sum(getattr(r, attr).checked for r in self.programs)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.programs)

    def summary(self) -> dict:
        chains = self.total("witnesses")
        return {
            "schema": 1,
            "programs": len(self.programs),
            "chains": chains,
            "chain_failures": self.count("witnesses", "failures"),
            "chain_inconclusive": self.count("witnesses", "inconclusive"),
            "step_checks": self.total("steps"),
            "step_failures": self.count("steps", "failures"),
            "assoc_triples": self.total("assoc"),
            "assoc_failures": self.count("assoc", "failures"),
            "equivalence_violations": sum(len(r.equivalence.violations) for r in self.programs),
            "cfl_oracle_disagreements": self.count("cfl_oracle", "disagreements"),
            "cfl_oracle_inconclusive": self.count("cfl_oracle", "inconclusive"),
            "ri_oracle_disagreements": self.count("ri_oracle", "disagreements"),
            "ri_oracle_inconclusive": self.count("ri_oracle", "inconclusive"),
            "precision_inclusion_failures": sum(not r.precision.included for r in self.programs),
            "failing": [r.name for r in self.programs if not r.ok],
        }


def validate_corpus(items, bound: int = DEFAULT_BOUND, seed: int = 0,
                    assoc_samples: int = 40) -> CorpusReport:
    """``items`` are (name, program, branch script) triples."""
    rng = random.Random(seed)
    rep = CorpusReport()
    for name, p, script in items:
        rep.programs.append(validate_program(p, script, name, bound, assoc_samples, rng))
    return rep


def fixture_corpus() -> list:
    from .fixtures import load_all
    return [(name, p, script) for name, p, script in load_all()]


def random_corpus(n: int = 500, seed: int = 0) -> list:
    from .generator import corpus
    return [(f"gen-{g.seed}", g.program, g.branch_script) for g in corpus(n, seed)]
