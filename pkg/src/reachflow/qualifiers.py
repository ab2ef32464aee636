"""Type-qualifier inference over pos/poly/neg.

Every flow edge becomes a subtyping constraint; fields and call-site
adapters appear through viewpoint adaptation ``q |> x``.  Qualifier sets
shrink until every constraint has support, while a closure step adds the
constraints implied by poly fields and by flows through callees.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from .graphs import FlowGraph
from .lang import FieldId, Program, VarId

POS, POLY, NEG = "pos", "poly", "neg"
ALL = frozenset((POS, POLY, NEG))
_RANK = {NEG: 0, POLY: 1, POS: 2}
MULTI, SINGLE = "multi", "single"


def subtype(a: str, b: str) -> bool:
    return _RANK[a] <= _RANK[b]


def adapt(q_ctx: str, q: str) -> str:
    return q_ctx if q == POLY else q


@dataclass(frozen=True, order=True)
class AdapterId:
    site: int
    slot: str = ""  # empty for the single per-site adapter

    def __str__(self):
        return f"q{self.site}" + (f"_{self.slot}" if self.slot else "")


@dataclass(frozen=True, order=True)
class Side:
    """``base`` seen through ``ctx`` (a variable for fields, an adapter for calls)."""

    base: object
    ctx: object = None

    def __str__(self):
        return f"{self.ctx} |> {self.base}" if self.ctx is not None else str(self.base)

    @property
    def plain(self) -> bool:
        return self.ctx is None


@dataclass(frozen=True, order=True)
class Constraint:
    left: Side
    right: Side

    def __str__(self):
        return f"{self.left} <: {self.right}"

    def ids(self) -> tuple:
        out = []
        for s in (self.left, self.right):
            for i in (s.ctx, s.base):
                if i is not None and i not in out:
                    out.append(i)
        return tuple(out)

    def holds(self, val) -> bool:
        return subtype(_side_value(self.left, val), _side_value(self.right, val))


def _side_value(s: Side, val) -> str:
    v = val[s.base]
    return v if s.ctx is None else adapt(val[s.ctx], v)


def sub(a, b) -> Constraint:
    """Shorthand for a plain ``a <: b``."""
    return Constraint(Side(a), Side(b))


def _field_id(label: str) -> FieldId:
    cls, name = label.rsplit(".", 1)
    return FieldId(cls, name)


def slot_name(v: VarId) -> str:
    return v.name


def constraints_from_graph(g: FlowGraph, mode: str = MULTI) -> list:
    """One constraint per edge (forward or inverse) of ``g``."""
    out = []
    for e in g.edges:
        if e.kind == "d":
            c = sub(e.src, e.dst)
        elif e.kind == "w":
            c = Constraint(Side(e.src), Side(_field_id(e.label), e.dst))
        elif e.kind == "r":
            c = Constraint(Side(_field_id(e.label), e.src), Side(e.dst))
        elif e.kind == "call":
            q = AdapterId(e.site, slot_name(e.dst) if mode == MULTI else "")
            c = Constraint(Side(e.src), Side(e.dst, q))
        else:
            q = AdapterId(e.site, slot_name(e.src) if mode == MULTI else "")
            c = Constraint(Side(e.src, q), Side(e.dst))
        if c not in out:
            out.append(c)
    return out


def gen_constraints(p: Program, imm, mode: str = MULTI, setting: str = "neg",
                    graph: Optional[FlowGraph] = None) -> list:
    """Constraints for ``p``; inverse constraints follow the immutability gating."""
    from .graphs import build_gri
    g = graph if graph is not None else build_gri(p, imm)
    return constraints_from_graph(g, mode)


def initial_sets(p: Program, constraints, setting: str = "neg", pins=None) -> dict:
    """Fresh qualifier sets.  ``pins`` maps ids to their pinned singleton."""
    field_init = frozenset((POS, POLY)) if setting == "neg" else frozenset((POLY, NEG))
    S = {}
    for v in p.variables():
        S[v] = set(ALL)
    for fid in p.all_fields():
        S[fid] = set(field_init)
        decl = p.field_decl(fid)
        ann = set(decl.quals) & field_init if decl is not None else set()
        if ann:
            S[fid] = ann
    for c in constraints:
        for i in c.ids():
            if i not in S:
                S[i] = set(field_init) if isinstance(i, FieldId) else set(ALL)
    for i, q in (pins or {}).items():
        S[i] = {q}
    return S


def _support(c: Constraint, S) -> dict:
    """For every id in ``c``, the values that take part in some solution."""
    ids = c.ids()
    keep = {i: set() for i in ids}
    for combo in itertools.product(*(sorted(S[i]) for i in ids)):
        val = dict(zip(ids, combo))
        if c.holds(val):
            for i in ids:
                keep[i].add(val[i])
    return keep


@dataclass
class Conflict:
    id: object
    removed: str

    def __str__(self):
        return f"{self.id} cannot keep {self.removed}"


def solve(constraints, S, pins=None, conflicts=None) -> bool:
    """Shrink ``S`` in place until every constraint has support.

    A pinned id whose value would be removed is reported once in
    ``conflicts`` and kept at its pinned value.
    """
    pins = pins or {}
    by_id = defaultdict(list)
    for c in constraints:
        for i in c.ids():
            by_id[i].append(c)
    work = list(constraints)
    queued = set(work)
    changed_any = False
    while work:
        c = work.pop()
        queued.discard(c)
        for i, vals in _support(c, S).items():
            if vals == S[i]:
                continue
            if not vals and i in pins:
                if conflicts is not None and all(k.id != i for k in conflicts):
                    conflicts.append(Conflict(i, pins[i]))
                continue
            if not vals:
                if conflicts is not None:
                    conflicts.append(Conflict(i, "/".join(sorted(S[i]))))
                continue
            S[i] = vals
            changed_any = True
            for d in by_id[i]:
                if d not in queued:
                    queued.add(d)
                    work.append(d)
    return changed_any


def _plain_closure(plain) -> set:
    succ = defaultdict(set)
    for a, b in plain:
        succ[a].add(b)
    out = set()
    for a in list(succ):
        seen, work = set(), [a]
        while work:
            n = work.pop()
            for m in succ.get(n, ()):
                if m not in seen:
                    seen.add(m)
                    work.append(m)
        out |= {(a, b) for b in seen if b != a}
    return out


def closure_step(C: set, S) -> set:
    """Constraints derivable in one round of erase / trans-local / trans-call."""
    new = set()
    for c in C:
        l, r = c.left, c.right
        if isinstance(l.base, FieldId) and S.get(l.base) == {POLY}:
            new.add(sub(l.ctx, r.base) if r.plain else Constraint(Side(l.ctx), r))
        if isinstance(r.base, FieldId) and S.get(r.base) == {POLY}:
            new.add(sub(l.base, r.ctx) if l.plain else Constraint(l, Side(r.ctx)))
    plain = {(c.left.base, c.right.base) for c in C | new if c.left.plain and c.right.plain}
    closed = _plain_closure(plain)
    new |= {sub(a, b) for a, b in closed}
    ins, outs = defaultdict(list), defaultdict(list)
    for c in C:
        if c.left.plain and isinstance(c.right.ctx, AdapterId):
            ins[c.right.ctx.site].append((c.left.base, c.right.base))
        if c.right.plain and isinstance(c.left.ctx, AdapterId):
            outs[c.left.ctx.site].append((c.left.base, c.right.base))
    for site, pairs in ins.items():
        for z, a in pairs:
            for b, x in outs.get(site, ()):
                if a != b and (a, b) in closed and z != x:
                    new.add(sub(z, x))
    return new - C


def close_and_solve(constraints, S, pins=None, closure: bool = True):
    """Simultaneous fixpoint of set shrinking and constraint closure."""
    C = set(constraints)
    conflicts = []
    while True:
        solve(C, S, pins, conflicts)
        if not closure:
            return C, S, conflicts
        new = closure_step(C, S)
        if not new:
            return C, S, conflicts
        C |= new


def preference(setting: str) -> tuple:
    return (POS, POLY, NEG) if setting == "neg" else (NEG, POLY, POS)


def maximal_typing(S, setting: str = "neg") -> dict:
    """Preferred qualifier of every non-adapter id (largest in the negative
    setting, smallest in the positive one)."""
    order = preference(setting)
    out = {}
    for i, vals in S.items():
        if isinstance(i, AdapterId) or not vals:
            continue
        out[i] = next(q for q in order if q in vals)
    return out


@dataclass
class UnsatReport(Exception):
    site: int
    violated: list

    def __str__(self):
        return f"no adapter values at site {self.site}: " + "; ".join(map(str, self.violated))


def assign_adapters(typing: dict, C, setting: str = "neg", adapter_sets=None) -> dict:
    """Pick adapter values per call site that make every constraint check.

    Adapters of one site are chosen together; when slot ``a`` flows to slot
    ``b`` inside the callee the choice also keeps ``q_a <: q_b``.
    """
    order = preference(setting)
    by_site = defaultdict(list)
    for c in C:
        for i in c.ids():
            if isinstance(i, AdapterId):
                by_site[i.site].append(c)
    plain = {(c.left.base, c.right.base) for c in C if c.left.plain and c.right.plain}
    out = {}
    for site in sorted(by_site):
        cs = by_site[site]
        adapters = sorted({i for c in cs for i in c.ids() if isinstance(i, AdapterId)})
        links = [(a, b) for a in adapters for b in adapters
                 if a != b and (_slot_var(a, cs), _slot_var(b, cs)) in plain]
        domains = [[q for q in order if adapter_sets is None or q in adapter_sets.get(a, ALL)]
                   for a in adapters]
        found = None
        for use_links in (True, False):
            for combo in itertools.product(*domains):
                val = dict(typing)
                val.update(zip(adapters, combo))
                if all(c.holds(val) for c in cs) and (
                        not use_links or all(subtype(val[a], val[b]) for a, b in links)):
                    found = dict(zip(adapters, combo))
                    break
            if found is not None:
                break
        if found is None:
            val = dict(typing)
            val.update({a: order[0] for a in adapters})
            raise UnsatReport(site, [c for c in cs if not c.holds(val)])
        out.update(found)
    return out


def _slot_var(a: AdapterId, cs):
    for c in cs:
        for s in (c.left, c.right):
            if s.ctx == a:
                return s.base
    return None


def check_typing(C, val: dict) -> list:
    """Constraints violated by a full assignment (variables, fields, adapters)."""
    bad = []
    for c in sorted(C, key=str):
        try:
            ok = c.holds(val)
        except KeyError:
            ok = False
        if not ok:
            bad.append(c)
    return bad


def _label_order(p: Program, S) -> list:
    """Fields first, then callee methods before their callers."""
    from .lang import call_records
    callers = defaultdict(set)
    for m, c, callee in call_records(p):
        callers[callee.qname].add(m.qname)
    methods = [m.qname for m in p.methods()]
    done, order = set(), []

    def visit(q, stack=()):
        if q in done or q in stack:
            return
        # callees first: visit methods this one calls
        for m, c, callee in call_records(p):
            if m.qname == q:
                visit(callee.qname, stack + (q,))
        done.add(q)
        order.append(q)

    for q in methods:
        visit(q)
    ids = sorted(i for i in S if isinstance(i, FieldId))
    for q in order:
        m = p.method(q)
        ids += list(m.anchors) + [v for v in m.variables() if v not in m.anchors]
    return [i for i in ids if i in S]


def label_search(constraints, S, order, setting="neg", pins=None) -> Optional[dict]:
    """Assign ids in ``order`` their most preferred value that still admits a
    solution, backtracking when propagation empties a set."""
    pref = preference(setting)
    C = list(constraints)

    def consistent(sets):
        trial = []
        solve(C, sets, None, trial)
        return not trial and all(sets[i] for i in sets)

    def rec(k, sets):
        if k == len(order):
            return sets
        i = order[k]
        for q in pref:
            if q not in sets[i]:
                continue
            nxt = {j: set(v) for j, v in sets.items()}
            nxt[i] = {q}
            if consistent(nxt):
                res = rec(k + 1, nxt)
                if res is not None:
                    return res
        return None

    start = {j: set(v) for j, v in S.items()}
    if not consistent(start):
        return None
    return rec(0, start)


@dataclass
class TypeResult:
    constraints: set
    sets: dict
    typing: dict
    adapters: dict
    conflicts: list = field(default_factory=list)
    mode: str = MULTI
    setting: str = "neg"

    def of(self, i) -> str:
        return self.typing.get(i)

    def full_assignment(self) -> dict:
        val = dict(self.typing)
        val.update(self.adapters)
        return val


def infer_types(p: Program, graph: FlowGraph, pins: dict, mode: str = MULTI,
                setting: str = "neg") -> TypeResult:
    """Run the engine in either adapter mode and extract a typing."""
    C0 = constraints_from_graph(graph, mode)
    S = initial_sets(p, C0, setting, pins)
    if mode == MULTI:
        C, S, conflicts = close_and_solve(C0, S, pins, closure=True)
        typing = maximal_typing(S, setting)
        adapters = assign_adapters(typing, C, setting, S)
        return TypeResult(C, S, typing, adapters, conflicts, mode, setting)
    C, S, conflicts = close_and_solve(C0, S, pins, closure=False)
    labelled = label_search(C, S, _label_order(p, S), setting, pins)
    if labelled is None:
        typing = maximal_typing(S, setting)
        return TypeResult(C, S, typing, {}, conflicts + [Conflict("labelling", "all")],
                          mode, setting)
    typing = maximal_typing(labelled, setting)
    adapters = assign_adapters(typing, C, setting, labelled)
    return TypeResult(C, labelled, typing, adapters, conflicts, mode, setting)


def run_single_adapter(p: Program, graph: FlowGraph, pins: dict, setting: str = "neg") -> TypeResult:
    return infer_types(p, graph, pins, SINGLE, setting)
