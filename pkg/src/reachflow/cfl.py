"""Context-sensitive, field-refined reachability to sinks.

Sinks are propagated backwards over a :class:`FlowGraph`.  Each fact
``(x, N, n)`` says that a path from ``x`` to ``n`` exists whose call/return
string reduces to class ``N``:

* ``M``: balanced,
* ``C``: only outstanding calls,
* ``R``: at least one outstanding return.

Read edges are followed freely and record their field in ``F``; write edges
are followed only for fields already in ``F``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .graphs import FlowEdge, FlowGraph

M, C, R = "M", "C", "R"
REACHES_MC, REACHES_R_ONLY, UNREACHABLE = "reaches_MC", "reaches_R_only", "unreachable"


@dataclass
class PathSet:
    entries: dict = field(default_factory=lambda: defaultdict(set))  # node -> {(N, target)}
    sinks: frozenset = frozenset()

    def add(self, x, n_class, target) -> bool:
        s = self.entries[x]
        if (n_class, target) in s:
            return False
        s.add((n_class, target))
        return True

    def __contains__(self, triple) -> bool:
        x, n_class, target = triple
        return (n_class, target) in self.entries.get(x, ())

    @property
    def sink_paths(self) -> set:
        return {(x, n, t) for x, es in self.entries.items() for n, t in es if t in self.sinks}

    @property
    def summaries(self) -> set:
        return {(x, t) for x, es in self.entries.items() for n, t in es
                if n == M and t not in self.sinks}

    def classes(self, x, sink=None) -> set:
        return {n for n, t in self.entries.get(x, ())
                if (t == sink if sink is not None else t in self.sinks)}

    def __len__(self):
        return sum(len(v) for v in self.entries.values())


@dataclass
class CFLResult:
    paths: PathSet
    fields: set
    rounds: int = 0

    def classify(self, x, sink=None) -> str:
        return classify_var(self.paths, x, sink)

    def reached(self, sink=None) -> set:
        return {x for x in self.paths.entries if self.paths.classes(x, sink)}


class _Engine:
    def __init__(self, g: FlowGraph, sinks):
        self.g = g
        self.anchors = g.anchors
        self.P = PathSet(sinks=frozenset(sinks))
        self.F = set()
        self.ret_out = defaultdict(list)  # (node, site) -> targets of its return edges
        for e in g.edges:
            if e.kind == "ret":
                self.ret_out[(e.src, e.label)].append(e.dst)

    def edge_step(self, e: FlowEdge) -> bool:
        P, F = self.P, self.F
        x, y = e.src, e.dst
        changed = False
        if y in self.anchors:
            changed |= P.add(y, M, y)
        for n_class, n in list(P.entries.get(y, ())):
            if e.kind in ("d", "r") or (e.kind == "w" and e.label in F):
                changed |= P.add(x, n_class, n)
                changed |= P.add(x, M, y)
                if e.kind == "r" and n in P.sinks and e.label not in F:
                    F.add(e.label)
                    changed = True
            elif e.kind == "ret":
                changed |= P.add(x, R, n)
            elif e.kind == "call":
                if n_class in (M, C):
                    changed |= P.add(x, C, n)
                else:
                    for m_class, u in list(P.entries.get(y, ())):
                        if m_class != M or u not in self.anchors:
                            continue
                        for z in self.ret_out.get((u, e.label), ()):
                            for n2_class, n2 in list(P.entries.get(z, ())):
                                if n2 == n:
                                    changed |= P.add(x, n2_class, n)
                                    changed |= P.add(x, M, z)
        # close summaries into anchors
        for m_class, y2 in list(P.entries.get(x, ())):
            if m_class != M:
                continue
            for m2, u in list(P.entries.get(y2, ())):
                if m2 == M and u in self.anchors:
                    changed |= P.add(x, M, u)
        return changed

    def run(self) -> CFLResult:
        for n in self.P.sinks:
            self.P.add(n, M, n)
        order = self.g.forward + self.g.inverse
        rounds, changed = 0, bool(self.P.sinks)
        while changed:
            rounds += 1
            changed = False
            for e in order:
                changed |= self.edge_step(e)
        return CFLResult(self.P, set(self.F), rounds)


def run_cfl(g: FlowGraph, sinks) -> CFLResult:
    """Least fixpoint of the edge rules over all edges of ``g``."""
    return _Engine(g, sinks).run()


def edge_step(e: FlowEdge, g: FlowGraph, paths: PathSet, fields: set) -> bool:
    """Apply the rule for one edge in place; returns whether anything changed."""
    eng = _Engine(g, paths.sinks)
    eng.P, eng.F = paths, fields
    return eng.edge_step(e)


def run_cfl_positive(g: FlowGraph, sources) -> CFLResult:
    """Forward propagation from sources, by running on the reversed graph."""
    return run_cfl(g.reversed(), sources)


def classify_var(P: PathSet, x, sink=None) -> str:
    cls = P.classes(x, sink)
    if cls & {M, C}:
        return REACHES_MC
    if R in cls:
        return REACHES_R_ONLY
    return UNREACHABLE
