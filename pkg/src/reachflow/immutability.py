"""Reference immutability: which references may be used to mutate state.

A variable is *mutable* when a balanced-or-outstanding-calls path leads from
it to an update (the receiver of a field write), *poly* when only paths with
outstanding returns exist, and *readonly* otherwise.  Only the leading
call-transmitted segment of a path is inspected; the part after the first
approximate edge is plain reachability.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .lang import Assign, FieldId, Program, Read, VarId, Write, call_records, iter_stmts

MUTABLE, POLY, READONLY = "mutable", "poly", "readonly"
_RANK = {READONLY: 0, POLY: 1, MUTABLE: 2}


@dataclass(frozen=True, order=True)
class SlotNode:
    """Graph node standing for ``x.f``."""

    var: VarId
    field: FieldId

    def __str__(self):
        return f"{self.var}.{self.field.name}"


@dataclass(frozen=True, order=True)
class RIEdge:
    src: object
    dst: object
    kind: str  # "d", "call", "ret" or "approx"
    site: int = 0

    @property
    def label(self) -> str:
        return {"call": f"({self.site}", "ret": f"){self.site}"}.get(self.kind, self.kind)


@dataclass
class RIGraph:
    nodes: set = field(default_factory=set)
    edges: set = field(default_factory=set)

    def add(self, src, dst, kind, site=0):
        self.nodes.update((src, dst))
        self.edges.add(RIEdge(src, dst, kind, site))

    def out_edges(self):
        out = defaultdict(list)
        for e in sorted(self.edges):
            out[e.src].append(e)
        return out


def _accesses(p: Program):
    writes, reads = defaultdict(list), defaultdict(list)
    for m in p.methods():
        for s in iter_stmts(m.lowered_body()):
            if isinstance(s, Write):
                fid = p.field_of(m, s.base, s.field)
                writes[fid].append((m.var(s.base), m.var(s.value)))
            elif isinstance(s, Read):
                fid = p.field_of(m, s.base, s.field)
                reads[fid].append((m.var(s.base), m.var(s.target)))
    return writes, reads


def build_ri_graph(p: Program) -> RIGraph:
    g = RIGraph()
    g.nodes.update(p.variables())
    for m in p.methods():
        for s in iter_stmts(m.lowered_body()):
            if isinstance(s, Assign):
                g.add(m.var(s.source), m.var(s.target), "d")
    for m, c, callee in call_records(p):
        g.add(m.var(c.receiver), callee.this, "call", c.site)
        for a, pid in zip(c.args, callee.param_ids):
            g.add(m.var(a), pid, "call", c.site)
        if c.target is not None and callee.ret is not None:
            g.add(callee.ret, m.var(c.target), "ret", c.site)
    writes, reads = _accesses(p)
    for fid in sorted(set(writes) & set(reads)):
        for base, value in writes[fid]:
            g.add(value, SlotNode(base, fid), "d")
        for base, target in reads[fid]:
            g.add(SlotNode(base, fid), target, "d")
            g.add(base, SlotNode(base, fid), "d")
        for wbase, _ in writes[fid]:
            for rbase, _ in reads[fid]:
                g.add(SlotNode(wbase, fid), SlotNode(rbase, fid), "approx")
    return g


def find_updates(p: Program) -> set:
    return {m.var(s.base) for m in p.methods() for s in iter_stmts(m.lowered_body())
            if isinstance(s, Write)}


def balanced_pairs(nodes, edges) -> set:
    """Pairs (u, v) joined by a path whose call/return labels are balanced.

    ``edges`` are (src, dst, kind, site) with kind in d/call/ret; the empty
    path counts, so every node is paired with itself.
    """
    bal = {(n, n) for n in nodes}
    d_succ = defaultdict(set)
    calls, rets = [], defaultdict(list)
    for s, t, kind, site in edges:
        if kind == "d":
            d_succ[s].add(t)
        elif kind == "call":
            calls.append((s, t, site))
        elif kind == "ret":
            rets[(s, site)].append(t)
    bal |= {(s, t) for s, ts in d_succ.items() for t in ts}
    while True:
        fwd = defaultdict(set)
        for a, b in bal:
            fwd[a].add(b)
        new = set()
        for a, b in bal:
            for c in fwd[b]:
                if (a, c) not in bal:
                    new.add((a, c))
        for s, t, site in calls:
            for u in fwd[t]:
                for w in rets.get((u, site), ()):
                    if (s, w) not in bal:
                        new.add((s, w))
        if not new:
            return bal
        bal |= new


def path_classes(nodes, edges, targets) -> tuple:
    """Nodes with a balanced/outstanding-call path to ``targets`` and nodes
    with an outstanding-return path, as (mc, r) sets."""
    bal = balanced_pairs(nodes, edges)
    reach = defaultdict(set)  # node -> nodes reachable by a balanced path
    for a, b in bal:
        reach[a].add(b)
    m_set = {a for a in nodes if reach[a] & targets}
    calls = [(s, t) for s, t, kind, _ in edges if kind == "call"]
    rets = [(s, t) for s, t, kind, _ in edges if kind == "ret"]

    def grow(base, steps):
        out = set(base)
        while True:
            heads = {s for s, t in steps if t in out}
            new = {a for a in nodes if a not in out and reach[a] & heads}
            if not new:
                return out
            out |= new

    mc = grow(m_set, calls)
    r = set()
    while True:
        heads = {s for s, t in rets if t in mc or t in r}
        new = {a for a in nodes if a not in r and reach[a] & heads}
        if not new:
            return mc, r
        r |= new


def plain_reach(edges, targets) -> set:
    """Nodes that reach ``targets`` ignoring all labels."""
    pred = defaultdict(set)
    for e in edges:
        pred[e.dst].add(e.src)
    seen, work = set(targets), list(targets)
    while work:
        n = work.pop()
        for s in pred[n]:
            if s not in seen:
                seen.add(s)
                work.append(s)
    return seen


def classify(g: RIGraph, updates) -> dict:
    """Qualifier for every node of ``g`` (variables and slot nodes)."""
    updates = set(updates)
    after = plain_reach(g.edges, updates)
    ends = updates | {e.src for e in g.edges if e.kind == "approx" and e.dst in after}
    seg = [(e.src, e.dst, e.kind, e.site) for e in g.edges if e.kind != "approx"]
    mc, r = path_classes(g.nodes | updates, seg, ends)
    out = {}
    for n in g.nodes | updates:
        out[n] = MUTABLE if n in mc else POLY if n in r else READONLY
    return out


def classify_fields(g: RIGraph, updates, p: Program = None, node_quals=None) -> dict:
    quals = node_quals if node_quals is not None else classify(g, updates)
    out = {f: READONLY for f in (p.all_fields() if p is not None else ())}
    for n, q in quals.items():
        if isinstance(n, SlotNode):
            cur = out.get(n.field, READONLY)
            out[n.field] = q if _RANK[q] > _RANK[cur] else cur
    return out


def adapt_ri(q_ctx: str, q: str) -> str:
    return q_ctx if q == POLY else q


def adapt_ri_seq(ctxs, q: str) -> str:
    for c in reversed(list(ctxs)):
        q = adapt_ri(c, q)
    return q


@dataclass
class Immutability:
    """Results of the inference for one program."""

    graph: RIGraph
    updates: set
    vars: dict
    fields: dict
    nodes: dict

    def of(self, v) -> str:
        if isinstance(v, FieldId):
            return self.fields.get(v, READONLY)
        return self.vars.get(v, READONLY)

    def lines(self) -> list:
        return [f"{v}: {q}" for v, q in sorted(self.vars.items())]


def infer(p: Program) -> Immutability:
    g = build_ri_graph(p)
    ups = find_updates(p)
    nodes = classify(g, ups)
    vs = {v: nodes.get(v, READONLY) for v in p.variables()}
    fs = classify_fields(g, ups, p, nodes)
    return Immutability(g, ups, vs, fs, nodes)

