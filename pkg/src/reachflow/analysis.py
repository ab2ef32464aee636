"""End-to-end pipeline: program -> immutability -> graph -> engine -> conflicts."""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional

from . import cfl as cfl_mod
from .cfl import REACHES_MC, REACHES_R_ONLY, UNREACHABLE, run_cfl, run_cfl_positive
from .graphs import FlowGraph, build_gbi, build_gri
from .immutability import Immutability, infer
from .lang import FieldId, Program
from .qualifiers import MULTI, NEG, POLY, POS, infer_types

SETTINGS = ("neg", "pos")
GRAPHS = ("bi", "ri")
ENGINES = ("cfl", "types", "both")
MODES = (MULTI, "single")

# qualifier expected for each reachability class, per setting
CLASS_TO_QUAL = {
    "neg": {REACHES_MC: NEG, REACHES_R_ONLY: POLY, UNREACHABLE: POS},
    "pos": {REACHES_MC: POS, REACHES_R_ONLY: POLY, UNREACHABLE: NEG},
}


@dataclass(frozen=True)
class Config:
    setting: str = "neg"
    graph: str = "ri"
    engine: str = "cfl"
    mode: str = MULTI
    context_insensitive: bool = False

    def __post_init__(self):
        for name, allowed in (("setting", SETTINGS), ("graph", GRAPHS), ("engine", ENGINES),
                              ("mode", MODES)):
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {', '.join(allowed)}")


@dataclass
class Conflict:
    source: object
    sink: object
    engine: str
    witness: list = field(default_factory=list)
    constraints: list = field(default_factory=list)

    def __str__(self):
        return f"flow from {self.source} to {self.sink}"

    def to_json(self) -> dict:
        return {"source": str(self.source), "sink": str(self.sink), "engine": self.engine,
                "witness": [str(w) for w in self.witness],
                "constraints": [str(c) for c in self.constraints]}


@dataclass
class Analysis:
    program: Program
    config: Config
    imm: Immutability
    graph: FlowGraph
    cfl: Optional[cfl_mod.CFLResult] = None
    types: Optional[object] = None
    classes: dict = field(default_factory=dict)     # var -> class (cfl)
    qualifiers: dict = field(default_factory=dict)  # var -> qualifier (types)
    conflicts: list = field(default_factory=list)
    equivalence: Optional[object] = None
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.conflicts

    def to_json(self) -> dict:
        out = {"schema": 1, "setting": self.config.setting, "graph": self.config.graph,
               "engine": self.config.engine, "mode": self.config.mode,
               "errors": [c.to_json() for c in self.conflicts],
               "warnings": list(self.warnings)}
        if self.cfl is not None:
            out["classes"] = {str(v): c for v, c in sorted(self.classes.items())}
            out["fields"] = sorted(self.cfl.fields)
        if self.types is not None:
            out["typing"] = {str(v): q for v, q in sorted(self.qualifiers.items(), key=_k)}
            out["adapters"] = {str(a): q for a, q in sorted(self.types.adapters.items())}
        if self.equivalence is not None:
            out["equivalence"] = self.equivalence.verdict
        return out


def _k(kv):
    return str(kv[0])


def make_graph(p: Program, imm: Immutability, cfg: Config) -> FlowGraph:
    g = build_gbi(p) if cfg.graph == "bi" else build_gri(p, imm)
    return g.context_insensitive() if cfg.context_insensitive else g


def seeds_and_checks(p: Program, setting: str):
    """Annotated ids that get propagated, and those checked afterwards."""
    if setting == "neg":
        return list(p.sinks), list(p.sources)
    return list(p.sources), list(p.sinks)


def run_engine_cfl(g: FlowGraph, seeds, setting: str):
    return run_cfl(g, seeds) if setting == "neg" else run_cfl_positive(g, seeds)


def find_witness(g: FlowGraph, src, dst, fields, bound: int = 40) -> list:
    """A shortest realizable path from ``src`` to ``dst`` honouring the field
    gate; empty when none is found within ``bound`` edges."""
    adj = defaultdict(list)
    for e in g.edges:
        adj[e.src].append(e)
    start = (src, ())
    parent = {start: None}
    q = deque([(start, 0)])
    while q:
        s, d = q.popleft()
        node, calls = s
        if node == dst:
            path = []
            while parent[s] is not None:
                s, e = parent[s]
                path.append(e)
            return path[::-1]
        if d == bound:
            continue
        for e in adj[node]:
            if e.kind in ("w", "r") and e.label not in fields:
                continue
            if e.kind == "call":
                nc = calls + (e.site,)
            elif e.kind == "ret":
                if calls and calls[-1] != e.site:
                    continue
                nc = calls[:-1]
            else:
                nc = calls
            t = (e.dst, nc)
            if t not in parent:
                parent[t] = (s, e)
                q.append((t, d + 1))
    return []


def witness_path(g: FlowGraph, src, dst, fields) -> list:
    """Witness from a source to a sink in ``g``; tries open returns first."""
    return find_witness(g, src, dst, fields)


def check_witness(g: FlowGraph, path, src, dst, fields) -> bool:
    """Replay a witness: consecutive edges of ``g``, matched sites, gated fields."""
    edges = set(g.edges)
    cur, calls = src, []
    for e in path:
        if e not in edges or e.src != cur:
            return False
        if e.kind in ("w", "r") and e.label not in fields:
            return False
        if e.kind == "call":
            calls.append(e.site)
        elif e.kind == "ret" and calls:
            if calls.pop() != e.site:
                return False
        cur = e.dst
    return cur == dst


def analyze(p: Program, cfg: Config = Config()) -> Analysis:
    imm = infer(p)
    g = make_graph(p, imm, cfg)
    a = Analysis(p, cfg, imm, g)
    seeds, checks = seeds_and_checks(p, cfg.setting)
    for s in p.sinks:
        decl = p.method(s.method).decl_of(s.name)
        if decl is not None and decl.type != "Prim":
            a.warnings.append(f"sink {s} is not primitive")
    if cfg.engine in ("cfl", "both"):
        a.cfl = run_engine_cfl(g, seeds, cfg.setting)
        a.classes = {v: a.cfl.classify(v) for v in p.variables()}
        for seed in sorted(seeds):
            for c in sorted(checks):
                if a.cfl.classify(c, seed) != UNREACHABLE:
                    src, dst = (c, seed) if cfg.setting == "neg" else (seed, c)
                    a.conflicts.append(Conflict(src, dst, "cfl",
                                                witness_path(g, src, dst, a.cfl.fields)))
    if cfg.engine in ("types", "both"):
        pin = NEG if cfg.setting == "neg" else POS
        a.types = infer_types(p, g, {s: pin for s in seeds}, cfg.mode, cfg.setting)
        a.qualifiers = dict(a.types.typing)
        type_conflicts = []
        for seed in sorted(seeds):
            per = infer_types(p, g, {seed: pin}, cfg.mode, cfg.setting)
            clean = POS if cfg.setting == "neg" else NEG
            for c in sorted(checks):
                if per.typing.get(c) != clean:
                    src, dst = (c, seed) if cfg.setting == "neg" else (seed, c)
                    poly_fields = {str(f) for f, q in per.typing.items()
                                   if isinstance(f, FieldId) and q == POLY}
                    type_conflicts.append(Conflict(src, dst, "types",
                                                   witness_path(g, src, dst, poly_fields),
                                                   _constraint_chain(per, c, seed)))
        if cfg.engine == "types":
            a.conflicts = type_conflicts
        else:
            from .validation import check_equivalence
            a.equivalence = check_equivalence(a.cfl, a.types, p.variables(), cfg.setting)
            seen = {(c.source, c.sink) for c in a.conflicts}
            for c in type_conflicts:
                if (c.source, c.sink) not in seen:
                    a.conflicts.append(c)
    return a


def _constraint_chain(tr, a, b) -> list:
    """Plain subtyping constraints linking ``a`` and ``b`` in the closed set."""
    succ = defaultdict(list)
    for c in sorted(tr.constraints, key=str):
        if c.left.plain and c.right.plain:
            succ[c.left.base].append(c)
            succ[c.right.base].append(c)
    parent = {a: None}
    q = deque([a])
    while q:
        n = q.popleft()
        if n == b:
            out = []
            while parent[n] is not None:
                n, c = parent[n]
                out.append(c)
            return out[::-1]
        for c in succ[n]:
            m = c.right.base if c.left.base == n else c.left.base
            if m not in parent:
                parent[m] = (n, c)
                q.append(m)
    return []
