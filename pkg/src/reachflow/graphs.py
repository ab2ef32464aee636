"""Annotated flow graphs with forward and inverse edges.

The bidirectional graph adds an inverse edge for every forward edge; the
trimmed graph keeps an inverse edge only when reference immutability says
the relevant reference can be used for mutation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

from .immutability import READONLY, Immutability, adapt_ri
from .lang import Assign, Loc, Program, Read, VarId, Write, call_records, iter_stmts

FLIP = {"w": "r", "r": "w", "call": "ret", "ret": "call", "d": "d"}


@dataclass(frozen=True, order=True)
class FlowEdge:
    src: VarId
    dst: VarId
    kind: str           # d, w, r, call, ret
    label: str = ""     # qualified field for w/r, site id (as text) for call/ret
    inverse: bool = False
    loc: Loc = field(default=Loc(), compare=False)

    @property
    def ann(self) -> str:
        if self.kind == "d":
            return "d"
        if self.kind in ("w", "r"):
            return f"{self.kind}_{self.label.rsplit('.', 1)[-1]}"
        return ("(" if self.kind == "call" else ")") + self.label

    @property
    def site(self) -> Optional[int]:
        return int(self.label) if self.kind in ("call", "ret") else None

    def flipped(self) -> "FlowEdge":
        """The annotation-flipped reversal of this edge."""
        return replace(self, src=self.dst, dst=self.src, kind=FLIP[self.kind],
                       inverse=not self.inverse)

    def __str__(self):
        arrow = "~>" if self.inverse else "->"
        return f"{self.src} {arrow}[{self.ann}] {self.dst}"


@dataclass
class FlowGraph:
    nodes: list
    edges: list
    anchors: frozenset = frozenset()

    def __post_init__(self):
        seen, out = set(), []
        for e in self.edges:
            if e not in seen:
                seen.add(e)
                out.append(e)
        self.edges = out

    @property
    def forward(self) -> list:
        return [e for e in self.edges if not e.inverse]

    @property
    def inverse(self) -> list:
        return [e for e in self.edges if e.inverse]

    def edge_set(self) -> set:
        return {(e.src, e.dst, e.ann, e.inverse) for e in self.edges}

    def reversed(self) -> "FlowGraph":
        """Swap direction, call/ret, write/read and forward/inverse."""
        return FlowGraph(list(self.nodes), [e.flipped() for e in self.edges], self.anchors)

    def context_insensitive(self) -> "FlowGraph":
        """Same graph with every call and return relabelled as a plain edge."""
        es = [replace(e, kind="d", label="") if e.kind in ("call", "ret") else e
              for e in self.edges]
        return FlowGraph(list(self.nodes), es, frozenset())

    def to_json(self) -> dict:
        return {"schema": 1,
                "nodes": [str(n) for n in self.nodes],
                "edges": [{"src": str(e.src), "dst": str(e.dst), "ann": e.ann,
                           "dir": "inverse" if e.inverse else "forward", "loc": str(e.loc)}
                          for e in sorted(self.edges, key=_edge_key)]}


def _edge_key(e):
    return (str(e.src), str(e.dst), e.ann, e.inverse)


def _statement_edges(p: Program):
    """Yield (forward edge, stmt kind, stmt, method, extra) for every statement."""
    for m in p.methods():
        for s in iter_stmts(m.lowered_body()):
            if isinstance(s, Assign):
                yield FlowEdge(m.var(s.source), m.var(s.target), "d", loc=s.loc), "assign", s, m, None
            elif isinstance(s, Write):
                fid = p.field_of(m, s.base, s.field)
                yield (FlowEdge(m.var(s.value), m.var(s.base), "w", str(fid), loc=s.loc),
                       "write", s, m, fid)
            elif isinstance(s, Read):
                fid = p.field_of(m, s.base, s.field)
                yield (FlowEdge(m.var(s.base), m.var(s.target), "r", str(fid), loc=s.loc),
                       "read", s, m, fid)
    for m, c, callee in call_records(p):
        site = str(c.site)
        ctx = m.var(c.target) if c.target is not None else None
        yield FlowEdge(m.var(c.receiver), callee.this, "call", site, loc=c.loc), "call", c, m, (ctx, callee.this)
        for a, pid in zip(c.args, callee.param_ids):
            yield FlowEdge(m.var(a), pid, "call", site, loc=c.loc), "call", c, m, (ctx, pid)
        if ctx is not None and callee.ret is not None:
            yield FlowEdge(callee.ret, ctx, "ret", site, loc=c.loc), "ret", c, m, (ctx, callee.ret)


def _anchors(p: Program) -> frozenset:
    return frozenset(a for m in p.methods() for a in m.anchors)


def build_gbi(p: Program) -> FlowGraph:
    edges = []
    for fwd, *_ in _statement_edges(p):
        edges += [fwd, fwd.flipped()]
    return FlowGraph(sorted(p.variables()), edges, _anchors(p))


def keeps_inverse(kind, stmt, method, extra, imm: Immutability) -> bool:
    """Whether the trimmed graph keeps the inverse of this statement's edge."""
    if kind == "assign":
        return imm.of(method.var(stmt.target)) != READONLY
    if kind == "write":
        return imm.of(extra) != READONLY
    if kind == "read":
        return imm.of(method.var(stmt.target)) != READONLY
    ctx_var, slot = extra
    # a call whose result is dropped is a readonly context
    ctx_q = imm.of(ctx_var) if ctx_var is not None else READONLY
    return adapt_ri(ctx_q, imm.of(slot)) != READONLY


def build_gri(p: Program, imm: Immutability) -> FlowGraph:
    edges = []
    for fwd, kind, s, m, extra in _statement_edges(p):
        edges.append(fwd)
        if keeps_inverse(kind, s, m, extra, imm):
            edges.append(fwd.flipped())
    return FlowGraph(sorted(p.variables()), edges, _anchors(p))


def emit_dot(g: FlowGraph, name: str = "flow") -> str:
    lines = [f"digraph {name} {{"]
    for n in sorted(str(x) for x in g.nodes):
        lines.append(f'  "{n}";')
    for e in sorted(g.edges, key=_edge_key):
        style = ', style=dashed' if e.inverse else ''
        lines.append(f'  "{e.src}" -> "{e.dst}" [label="{e.ann}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dump_json(g: FlowGraph) -> str:
    return json.dumps(g.to_json(), indent=2, sort_keys=True)
