"""Concrete interpreter that tracks flow chains, plus the stack-context algebra.

A chain ``(x^A, y^B)`` records that the value held by ``x`` in stack context
``A`` flowed into ``y`` in context ``B``.  Chains are stored target-indexed:
``chains[target]`` is the set of sources that reached ``target``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .lang import (Alloc, Assign, Branch, Call, MethodDecl, Program, Read, VarId, Write,
                   resolve_calls)

ENTRY_FRAME = 0
DEFAULT_BUDGET = 100_000


@dataclass(frozen=True, order=True)
class Inst:
    """A variable in a stack context, written ``x^A``."""

    var: VarId
    ctx: tuple

    def __str__(self):
        return f"{self.var}^<{','.join(map(str, self.ctx))}>"


@dataclass(frozen=True, order=True)
class Slot:
    """Heap slot ``o.f``."""

    oid: int
    field: str

    def __str__(self):
        return f"o{self.oid}.{self.field}"


@dataclass(frozen=True)
class HeapObject:
    oid: int
    var: VarId
    ctx: tuple
    cls: str

    @property
    def creation(self) -> Inst:
        return Inst(self.var, self.ctx)


@dataclass
class ChainState:
    chains: dict = field(default_factory=dict)   # Inst | Slot -> frozenset[Inst]
    stack: dict = field(default_factory=dict)    # Inst -> oid | None
    heap: dict = field(default_factory=dict)     # Slot -> oid | None
    objects: dict = field(default_factory=dict)  # oid -> HeapObject

    def snapshot(self) -> "ChainState":
        return ChainState(dict(self.chains), dict(self.stack), dict(self.heap),
                          dict(self.objects))

    def sources(self, target) -> frozenset:
        return self.chains.get(target, frozenset())

    def has_chain(self, src: Inst, dst) -> bool:
        return src in self.chains.get(dst, ())

    def pairs(self):
        for dst, srcs in self.chains.items():
            for s in srcs:
                yield s, dst


class TraceError(Exception):
    pass


@dataclass(frozen=True)
class TraceStep:
    kind: str  # "stmt", "call" or "ret"
    stmt: object
    ctx: tuple


@dataclass
class RunResult:
    state: ChainState
    trace: list
    frames: dict                 # frame -> originating call site (None for entry)
    history: set                 # every (source Inst, target Inst) chain ever recorded
    contexts: list               # contexts in first-visit order
    warnings: list = field(default_factory=list)
    error: Optional[str] = None
    budget_exhausted: bool = False

    @property
    def complete(self) -> bool:
        return self.error is None and not self.budget_exhausted

    def alpha(self, ctx: tuple) -> tuple:
        return tuple(self.frames[f] for f in ctx[1:])

    def dump(self) -> dict:
        def ctx_pairs(ctx):
            return [[f, self.frames[f]] for f in ctx]
        steps = [{"kind": t.kind, "loc": str(t.stmt.loc), "context": ctx_pairs(t.ctx)}
                 for t in self.trace]
        final = [{"target": str(k), "sources": sorted(str(s) for s in v)}
                 for k, v in sorted(self.state.chains.items(), key=lambda kv: str(kv[0]))]
        return {"schema": 1, "steps": steps, "chains": final, "warnings": self.warnings,
                "error": self.error, "budget_exhausted": self.budget_exhausted}

    def to_json(self) -> str:
        return json.dumps(self.dump(), indent=2, sort_keys=True)


class Interpreter:
    def __init__(self, program: Program, branch_script=(), step_budget=DEFAULT_BUDGET,
                 on_step=None):
        self.p = program
        self.callees = resolve_calls(program, strict=False)
        self.script = list(branch_script)
        self.budget = step_budget
        self.on_step = on_step
        self.st = ChainState()
        self.frames = {ENTRY_FRAME: None}
        self.history = set()
        self.contexts = []
        self._seen_ctx = set()
        self.trace = []
        self.warnings = []

    # -- chain bookkeeping ----------------------------------------------------
    def _set_chains(self, target, sources):
        self.st.chains[target] = frozenset(sources)
        if isinstance(target, Inst):
            for s in sources:
                self.history.add((s, target))

    def _value(self, inst: Inst):
        return self.st.stack.get(inst)

    def _obj(self, inst: Inst, stmt):
        oid = self._value(inst)
        if oid is None:
            raise TraceError(f"{stmt.loc}: null receiver {inst.var.name}")
        return oid

    # -- single statements ----------------------------------------------------
    def step(self, s, m: MethodDecl, ctx: tuple):
        """Apply one non-call statement in context ``ctx``."""
        st = self.st
        v = lambda name: Inst(m.var(name), ctx)  # noqa: E731
        if isinstance(s, Assign):
            y = v(s.source)
            self._set_chains(v(s.target), st.sources(y) | {y})
            st.stack[v(s.target)] = self._value(y)
        elif isinstance(s, Alloc):
            x = v(s.target)
            oid = len(st.objects) + 1
            st.objects[oid] = HeapObject(oid, x.var, ctx, s.cls)
            for c in self.p.superchain(s.cls):
                for f in c.fields:
                    st.heap[Slot(oid, f.name)] = None
            self._set_chains(x, {x})
            st.stack[x] = oid
        elif isinstance(s, Write):
            o = self._obj(v(s.base), s)
            y = v(s.value)
            slot = Slot(o, s.field)
            self._set_chains(slot, st.sources(y) | {y})
            st.heap[slot] = self._value(y)
        elif isinstance(s, Read):
            o = self._obj(v(s.base), s)
            slot = Slot(o, s.field)
            if slot not in st.chains:
                self.warnings.append(f"{s.loc}: read of never-written slot {slot}")
            self._set_chains(v(s.target), st.sources(slot))
            st.stack[v(s.target)] = st.heap.get(slot)
        else:
            raise TypeError(f"not a simple statement: {s!r}")

    def enter(self, call: Call, m: MethodDecl, ctx: tuple, callee: MethodDecl) -> tuple:
        recv = Inst(m.var(call.receiver), ctx)
        self._obj(recv, call)
        frame = len(self.frames)
        self.frames[frame] = call.site
        inner = ctx + (frame,)
        this = Inst(callee.this, inner)
        self._set_chains(this, self.st.sources(recv) | {recv})
        self.st.stack[this] = self._value(recv)
        for pid, arg in zip(callee.param_ids, call.args):
            z = Inst(m.var(arg), ctx)
            self._set_chains(Inst(pid, inner), self.st.sources(z) | {z})
            self.st.stack[Inst(pid, inner)] = self._value(z)
        return inner

    def leave(self, call: Call, m: MethodDecl, ctx: tuple, callee: MethodDecl, inner: tuple):
        if call.target is None or callee.ret is None:
            return
        r = Inst(callee.ret, inner)
        x = Inst(m.var(call.target), ctx)
        self._set_chains(x, self.st.sources(r) | {r})
        self.st.stack[x] = self._value(r)

    # -- driver ---------------------------------------------------------------
    def _visit(self, ctx):
        if ctx not in self._seen_ctx:
            self._seen_ctx.add(ctx)
            self.contexts.append(ctx)

    def run(self) -> RunResult:
        entry = self.p.entry
        res = RunResult(self.st, self.trace, self.frames, self.history, self.contexts,
                        self.warnings)
        if entry is None:
            return res
        root = (ENTRY_FRAME,)
        self._visit(root)
        work = [("stmt", s, entry, root) for s in reversed(entry.lowered_body())]
        steps = 0
        try:
            while work:
                item = work.pop()
                if steps >= self.budget:
                    res.budget_exhausted = True
                    break
                steps += 1
                kind = item[0]
                if kind == "ret":
                    _, call, m, ctx, callee, inner = item
                    self.leave(call, m, ctx, callee, inner)
                    self.trace.append(TraceStep("ret", call, ctx))
                else:
                    _, s, m, ctx = item
                    if isinstance(s, Branch):
                        if self.script:
                            take = bool(self.script.pop(0))
                        else:
                            take = False
                            self.warnings.append(f"{s.loc}: branch script exhausted, taking else")
                        self.trace.append(TraceStep("stmt", s, ctx))
                        block = s.then if take else s.orelse
                        work.extend(("stmt", b, m, ctx) for b in reversed(block))
                    elif isinstance(s, Call):
                        callee = self.callees[s.site]
                        inner = self.enter(s, m, ctx, callee)
                        self._visit(inner)
                        self.trace.append(TraceStep("call", s, ctx))
                        work.append(("ret", s, m, ctx, callee, inner))
                        work.extend(("stmt", b, callee, inner)
                                    for b in reversed(callee.lowered_body()))
                    else:
                        self.step(s, m, ctx)
                        self.trace.append(TraceStep("stmt", s, ctx))
                if self.on_step is not None:
                    self.on_step(self, self.trace[-1])
        except TraceError as exc:
            res.error = str(exc)
        return res


def run(p: Program, branch_script=(), step_budget: int = DEFAULT_BUDGET, on_step=None) -> RunResult:
    """Execute ``p`` from its entry method."""
    return Interpreter(p, branch_script, step_budget, on_step).run()


def check_creation_chained(st: ChainState) -> bool:
    """Every held object is chained from its creation site."""
    for inst, oid in st.stack.items():
        if oid is not None and st.objects[oid].creation not in st.chains.get(inst, ()):
            return False
    for slot, oid in st.heap.items():
        if oid is not None and st.objects[oid].creation not in st.chains.get(slot, ()):
            return False
    return True


def chain_sources_pure(st: ChainState) -> bool:
    return all(isinstance(s, Inst) for srcs in st.chains.values() for s in srcs)


# -- context algebra --------------------------------------------------------

@dataclass(frozen=True)
class ContextDelta:
    ret: tuple
    call: tuple


@dataclass(frozen=True, order=True)
class Residual:
    """Abstract context difference: unmatched returns, then unmatched calls.

    ``rets`` is in string order (innermost return first); ``calls`` is
    outermost first.  ``str`` renders e.g. ``)6 (7``.
    """

    rets: tuple = ()
    calls: tuple = ()

    def __str__(self):
        return " ".join([f"){i}" for i in self.rets] + [f"({j}" for j in self.calls])

    @classmethod
    def parse(cls, text: str) -> "Residual":
        rets, calls = [], []
        for tok in text.split():
            if tok[0] == ")":
                if calls:
                    raise ValueError(f"not in returns-then-calls form: {text!r}")
                rets.append(int(tok[1:]))
            elif tok[0] == "(":
                calls.append(int(tok[1:]))
            else:
                raise ValueError(f"bad token {tok!r}")
        return cls(tuple(rets), tuple(calls))


def ctx_diff(a: tuple, b: tuple) -> ContextDelta:
    n = 0
    while n < min(len(a), len(b)) and a[n] == b[n]:
        n += 1
    return ContextDelta(tuple(a[n:]), tuple(b[n:]))


def abstract_delta(d: ContextDelta, frames: dict) -> Residual:
    return Residual(tuple(frames[f] for f in reversed(d.ret)), tuple(frames[f] for f in d.call))


def _as_residual(r) -> Residual:
    return Residual.parse(r) if isinstance(r, str) else r


def delta_concat(r1, r2) -> Optional[Residual]:
    """Concatenate two abstract deltas; ``None`` when undefined.

    Works on frame-order tuples: the returns of ``r2`` cancel a suffix of
    the calls of ``r1``, or the calls of ``r1`` cancel a suffix of the
    returns of ``r2``.
    """
    r1, r2 = _as_residual(r1), _as_residual(r2)
    ret1, call1 = r1.rets[::-1], r1.calls
    ret2, call2 = r2.rets[::-1], r2.calls
    if len(ret2) <= len(call1) and call1[len(call1) - len(ret2):] == ret2:
        calls = call1[:len(call1) - len(ret2)] + call2
        return Residual(ret1[::-1], calls)
    if len(call1) <= len(ret2) and ret2[len(ret2) - len(call1):] == call1:
        rets = ret2[:len(ret2) - len(call1)] + ret1
        return Residual(rets[::-1], call2)
    return None
