"""Bounded breadth-first path enumeration, the reference answer for the engines.

A search state is ``(node, call/return summary, write/read summary)``.  The
call/return summary is either an exact residual (unmatched returns, open
calls) or, for classification, just "has an unmatched return" plus the open
calls.  Absence of a path is definite only when the state space runs dry
before the edge bound is reached.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from .interp import Residual
from .graphs import FlowGraph

DEFAULT_BOUND = 14
BALANCED, CSFI_PLUS, IGNORE = "balanced", "csfi_plus", "ignore"
FOUND, ABSENT, EXHAUSTED = "found", "absent", "exhausted"


@dataclass(frozen=True)
class OracleQuery:
    graph: FlowGraph
    src: object
    dst: object
    residual: Residual = Residual()
    discipline: str = BALANCED
    fields: frozenset = frozenset()
    bound: int = DEFAULT_BOUND


@dataclass
class OracleAnswer:
    status: str
    witness: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def __bool__(self):
        return self.found


def _adjacency(g: FlowGraph):
    out = defaultdict(list)
    for e in g.edges:
        out[e.src].append(e)
    return out


def _pg_step(pg, e, discipline, fields):
    """Next write/read summary, or None when the edge is not allowed."""
    if e.kind not in ("w", "r") or discipline == IGNORE:
        return pg
    if discipline == CSFI_PLUS:
        return pg if e.label in fields else None
    if e.kind == "w":
        return pg + (e.label,)
    if pg and pg[-1] == e.label:
        return pg[:-1]
    return None


def _cr_step(rets, calls, e):
    if e.kind == "call":
        return rets, calls + (e.site,)
    if e.kind == "ret":
        if calls:
            return (rets, calls[:-1]) if calls[-1] == e.site else None
        return rets + (e.site,), calls
    return rets, calls


class _Search:
    """One source, one required residual, many destinations."""

    def __init__(self, g: FlowGraph, src, residual: Residual, discipline, fields, bound):
        self.g, self.src, self.want = g, src, residual
        self.discipline, self.fields, self.bound = discipline, frozenset(fields), bound
        self.adj = _adjacency(g)
        self.hits = {}
        self.exhausted = False
        self._run()

    def _run(self):
        start = (self.src, (), (), ())
        parent = {start: None}
        frontier = [start]
        depth = 0
        self._record(start, parent)
        while frontier:
            if depth == self.bound:
                self.exhausted = any(self._successors(s, parent, probe=True) for s in frontier)
                break
            nxt = []
            for s in frontier:
                for t, e in self._successors(s, parent):
                    parent[t] = (s, e)
                    nxt.append(t)
                    self._record(t, parent)
            frontier = nxt
            depth += 1

    def _successors(self, s, parent, probe=False):
        node, rets, calls, pg = s
        out = []
        for e in self.adj.get(node, ()):
            cr = _cr_step(rets, calls, e)
            if cr is None:
                continue
            r2, c2 = cr
            if r2 != self.want.rets[:len(r2)]:
                continue
            p2 = _pg_step(pg, e, self.discipline, self.fields)
            if p2 is None:
                continue
            t = (e.dst, r2, c2, p2)
            if t in parent:
                continue
            if probe:
                return [t]
            out.append((t, e))
        return out

    def _record(self, s, parent):
        node, rets, calls, pg = s
        if node in self.hits:
            return
        if (rets, calls) != (self.want.rets, self.want.calls):
            return
        if self.discipline == BALANCED and pg:
            return
        path = []
        cur = s
        while parent[cur] is not None:
            cur, e = parent[cur]
            path.append(e)
        self.hits[node] = path[::-1]

    def answer(self, dst) -> OracleAnswer:
        if dst in self.hits:
            return OracleAnswer(FOUND, self.hits[dst])
        return OracleAnswer(EXHAUSTED if self.exhausted else ABSENT)


def oracle_paths(q: OracleQuery) -> OracleAnswer:
    """Is there a path of at most ``q.bound`` edges from ``q.src`` to ``q.dst``
    whose call/return string reduces to ``q.residual`` and whose write/read
    string obeys ``q.discipline``?"""
    res = q.residual if isinstance(q.residual, Residual) else Residual.parse(q.residual)
    return _Search(q.graph, q.src, res, q.discipline, q.fields, q.bound).answer(q.dst)


class PathOracle:
    """Caches one search per (source, residual) for a fixed graph."""

    def __init__(self, g: FlowGraph, discipline=BALANCED, fields=(), bound=DEFAULT_BOUND):
        self.g, self.discipline, self.fields, self.bound = g, discipline, frozenset(fields), bound
        self._cache = {}

    def query(self, src, dst, residual=Residual()) -> OracleAnswer:
        if isinstance(residual, str):
            residual = Residual.parse(residual)
        key = (src, residual)
        if key not in self._cache:
            self._cache[key] = _Search(self.g, src, residual, self.discipline, self.fields,
                                       self.bound)
        return self._cache[key].answer(dst)


# -- classification oracles ---------------------------------------------------

@dataclass
class ClassAnswer:
    classes: set           # subset of {"M", "C", "R"} seen at the target
    exhausted: bool


def _class_search(adj, src, targets, fields, bound, field_gate=True):
    """Classes of all paths from ``src`` reaching each node of ``targets``.

    State is (node, has unmatched return, open calls); write edges need their
    field in ``fields``, as do read edges.
    """
    start = (src, False, ())
    seen = {start}
    frontier = [start]
    found = defaultdict(set)
    depth = 0
    exhausted = False

    def note(s):
        node, has_ret, calls = s
        if node in targets:
            found[node].add("R" if has_ret else ("C" if calls else "M"))

    note(start)
    while frontier:
        nxt = []
        for node, has_ret, calls in frontier:
            for e in adj.get(node, ()):
                if field_gate and e.kind in ("w", "r") and e.label not in fields:
                    continue
                if e.kind == "call":
                    t = (e.dst, has_ret, calls + (e.site,))
                elif e.kind == "ret":
                    if calls:
                        if calls[-1] != e.site:
                            continue
                        t = (e.dst, has_ret, calls[:-1])
                    else:
                        t = (e.dst, True, calls)
                else:
                    t = (e.dst, has_ret, calls)
                if t in seen:
                    continue
                if depth == bound:
                    exhausted = True
                    break
                seen.add(t)
                nxt.append(t)
                note(t)
            if exhausted:
                break
        if exhausted:
            break
        frontier = nxt
        depth += 1
    return found, exhausted


def csfi_classes(g: FlowGraph, src, sinks, fields, bound=DEFAULT_BOUND) -> ClassAnswer:
    """Path classes from ``src`` to any of ``sinks`` with field gating by ``fields``."""
    found, ex = _class_search(_adjacency(g), src, set(sinks), set(fields), bound)
    cls = set().union(*found.values()) if found else set()
    return ClassAnswer(cls, ex)


def csfi_classes_per_sink(g: FlowGraph, src, sinks, fields, bound=DEFAULT_BOUND):
    found, ex = _class_search(_adjacency(g), src, set(sinks), set(fields), bound)
    return {n: ClassAnswer(set(found.get(n, ())), ex) for n in sinks}


def oracle_class(answer: ClassAnswer) -> Optional[str]:
    """Classification from oracle classes; ``None`` when inconclusive."""
    from .cfl import REACHES_MC, REACHES_R_ONLY, UNREACHABLE
    if answer.classes & {"M", "C"}:
        return REACHES_MC
    if answer.exhausted:
        return None
    if "R" in answer.classes:
        return REACHES_R_ONLY
    return UNREACHABLE


def ri_oracle(rg, updates, bound=DEFAULT_BOUND) -> dict:
    """Immutability class of each node by enumerating the leading
    call-transmitted segment.  Values are qualifiers, or ``None`` when the
    bound cut the search short before a mutable witness appeared."""
    from .immutability import MUTABLE, POLY, READONLY, plain_reach
    after = plain_reach(rg.edges, set(updates))
    approx_ok = {e.src for e in rg.edges if e.kind == "approx" and e.dst in after}
    ends = set(updates) | approx_ok
    adj = defaultdict(list)
    for e in rg.edges:
        if e.kind != "approx":
            adj[e.src].append(_RIAdapter(e))
    out = {}
    for n in sorted(rg.nodes | set(updates), key=str):
        found, ex = _class_search(adj, n, ends, set(), bound, field_gate=False)
        cls = set().union(*found.values()) if found else set()
        if cls & {"M", "C"}:
            out[n] = MUTABLE
        elif ex:
            out[n] = None
        elif "R" in cls:
            out[n] = POLY
        else:
            out[n] = READONLY
    return out


@dataclass(frozen=True)
class _RIAdapter:
    """Presents an immutability-graph edge with the flow-edge interface."""

    e: object

    @property
    def kind(self):
        return self.e.kind

    @property
    def dst(self):
        return self.e.dst

    @property
    def site(self):
        return self.e.site

    @property
    def label(self):
        return ""
