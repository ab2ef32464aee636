"""Seeded generator of small, well-typed, non-recursive programs."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .lang import Program, parse_program

MAX_CLASSES = 4       # including the entry class
MAX_FIELDS = 3
MAX_STMTS = 12
MAX_SITES = 5
BIAS = 0.3


@dataclass
class _Method:
    cls: str
    name: str
    param: object      # type name or None
    ret: object        # type name or None
    locals: dict = field(default_factory=dict)  # name -> type
    body: list = field(default_factory=list)    # lines (strings, possibly nested)
    ret_var: object = None


@dataclass
class Generated:
    text: str
    program: Program
    branch_script: tuple
    seed: int
    biased: bool


class _Gen:
    def __init__(self, rng: random.Random, biased: bool):
        self.rng = rng
        self.biased = biased
        self.stmts = 0
        self.sites = 0

    def build(self) -> str:
        rng = self.rng
        n_obj = rng.randint(1, MAX_CLASSES - 1)
        self.classes = [f"C{i}" for i in range(n_obj)]
        self.types = self.classes + ["Prim"]
        n_fields = rng.randint(1 if self.biased else 0, MAX_FIELDS)
        self.fields = {c: {} for c in self.classes}
        for k in range(n_fields):
            owner = rng.choice(self.classes)
            self.fields[owner][f"f{k}"] = rng.choice(self.types)
        self.methods = []
        k = 0
        for c in self.classes:
            for _ in range(rng.randint(0, 2)):
                param = rng.choice(self.types + [None])
                ret = rng.choice(self.types + [None])
                self.methods.append(_Method(c, f"m{k}", param, ret))
                k += 1
        if self.biased:
            self._plant_store()
        # later methods in the list may only call methods further down
        rng.shuffle(self.methods)
        for i, m in enumerate(self.methods):
            self._fill(m, self.methods[i + 1:], rng.randint(1, 3))
        main = _Method("Main", "main", None, None)
        self._fill_main(main)
        return self._emit(main)

    def _plant_store(self):
        """A setter whose parameter is stored into a field of ``this``."""
        owner = next((c for c in self.classes if self.fields[c]), None)
        if owner is None:
            return
        fname, ftype = next(iter(self.fields[owner].items()))
        m = _Method(owner, f"s{len(self.methods)}", ftype, None)
        m.body.append(f"this.{fname} = p;")
        self.stmts += 1
        self.methods.append(m)

    def _vars(self, m: _Method) -> dict:
        out = dict(m.locals)
        if m.name != "main":
            out["this"] = m.cls
            if m.param is not None:
                out["p"] = m.param
        return out

    def _local(self, m: _Method, t: str) -> str:
        name = f"v{len(m.locals)}"
        m.locals[name] = t
        return name

    def _pick(self, m: _Method, t: str, fresh_ok=True) -> str:
        cands = [v for v, vt in self._vars(m).items() if vt == t]
        if not cands or (fresh_ok and self.rng.random() < 0.3):
            return self._local(m, t)
        return self.rng.choice(sorted(cands))

    def _stmt(self, m: _Method, callees) -> list:
        rng = self.rng
        kinds = ["alloc", "assign", "read", "write", "call", "call", "branch"]
        kind = rng.choice(kinds)
        vs = self._vars(m)
        if kind == "call":
            targets = [c for c in callees if self.sites < MAX_SITES]
            if not targets:
                kind = "assign"
            else:
                c = rng.choice(targets)
                recv = self._pick(m, c.cls, fresh_ok=False)
                args = f"({self._pick(m, c.param, False)})" if c.param else "()"
                self.sites += 1
                self.stmts += 1
                if c.ret is not None and rng.random() < 0.85:
                    return [f"{self._pick(m, c.ret)} = {recv}.{c.name}{args};"]
                return [f"{recv}.{c.name}{args};"]
        if kind in ("read", "write"):
            owners = [c for c in self.classes if self.fields[c]]
            if not owners:
                kind = "alloc"
            else:
                owner = rng.choice(owners)
                fname = rng.choice(sorted(self.fields[owner]))
                ft = self.fields[owner][fname]
                base = self._pick(m, owner, fresh_ok=False)
                self.stmts += 1
                if kind == "read":
                    return [f"{self._pick(m, ft)} = {base}.{fname};"]
                return [f"{base}.{fname} = {self._pick(m, ft, False)};"]
        if kind == "branch" and self.stmts + 3 <= MAX_STMTS:
            self.stmts += 1
            then = self._stmt(m, callees)
            orelse = self._stmt(m, callees) if rng.random() < 0.7 else []
            return ["if (*) {", then, "} else {", orelse, "}"]
        if kind == "assign":
            t = rng.choice(sorted({vt for vt in vs.values()} or {"Prim"}))
            src = self._pick(m, t, fresh_ok=False)
            self.stmts += 1
            return [f"{self._pick(m, t)} = {src};"]
        t = rng.choice(self.types)
        self.stmts += 1
        return [f"{self._pick(m, t)} = new {t};"]

    def _fill(self, m: _Method, callees, n):
        for _ in range(n):
            if self.stmts >= MAX_STMTS - 1:
                break
            m.body.append(self._stmt(m, callees))
        if m.ret is not None:
            m.ret_var = self._pick(m, m.ret, fresh_ok=False)
            self.stmts += 1

    def _fill_main(self, main: _Method):
        # allocate one receiver per class so most calls run
        for c in self.classes:
            v = self._local(main, c)
            main.body.append(f"{v} = new {c};")
        callees = list(self.methods)
        setter = [m for m in callees if m.name.startswith("s")]
        if setter:
            s = setter[0]
            recv = self._pick(main, s.cls, fresh_ok=False)
            val = self._pick(main, s.param, fresh_ok=False)
            main.body.append(f"{recv}.{s.name}({val});")
            self.sites += 1
            alias = self._local(main, s.cls)
            main.body.append(f"{alias} = {recv};")
            fname = next(iter(self.fields[s.cls]))
            out = self._local(main, self.fields[s.cls][fname])
            main.body.append(f"{out} = {alias}.{fname};")
        while self.stmts < MAX_STMTS:
            main.body.append(self._stmt(main, callees))
        if not any(t == "Prim" for t in main.locals.values()):
            v = self._local(main, "Prim")
            main.body.append(f"{v} = new Prim;")
        names = sorted(main.locals)
        self.sinks = set(self.rng.sample(names, k=min(len(names), self.rng.randint(1, 2))))
        self.sources = set(self.rng.sample(names, k=1)) - self.sinks

    def _emit(self, main: _Method) -> str:
        out = []
        for c in self.classes:
            out.append(f"class {c} {{")
            for fname, ft in self.fields[c].items():
                out.append(f"    {ft} {fname};")
            for m in self.methods:
                if m.cls == c:
                    out += self._emit_method(m, "    ")
            out.append("}")
        out.append("class Main {")
        out += self._emit_method(main, "    ")
        out.append("}")
        return "\n".join(out) + "\n"

    def _emit_method(self, m: _Method, ind: str) -> list:
        if m.name == "main":
            head = f"{ind}static void main() {{"
        else:
            params = f"{m.cls} this" + (f", {m.param} p" if m.param else "")
            head = f"{ind}{m.ret or 'void'} {m.name}({params}) {{"
        lines = [head]
        for name, t in m.locals.items():
            role = ""
            if m.name == "main" and name in self.sinks:
                role = "@sink "
            elif m.name == "main" and name in self.sources:
                role = "@source "
            lines.append(f"{ind}    {role}{t} {name};")
        # object locals start allocated so receivers are rarely null
        for name, t in m.locals.items():
            if t != "Prim" and not (m.name == "main" and t in self.classes
                                    and f"{name} = new {t};" in m.body):
                lines.append(f"{ind}    {name} = new {t};")
        lines += _flatten(m.body, ind + "    ")
        if m.ret_var is not None:
            lines.append(f"{ind}    return {m.ret_var};")
        lines.append(f"{ind}}}")
        return lines


def _flatten(items, ind) -> list:
    out = []
    for it in items:
        if isinstance(it, str):
            out.append(ind + it)
        elif it and isinstance(it[0], str) and it[0].startswith("if"):
            out.append(ind + it[0])
            out += _flatten([it[1]], ind + "    ")
            out.append(ind + it[2])
            out += _flatten([it[3]], ind + "    ")
            out.append(ind + it[4])
        else:
            out += _flatten(it, ind)
    return out


def generate(seed: int) -> Generated:
    """One random program; the same seed always gives the same text."""
    rng = random.Random(seed)
    biased = rng.random() < BIAS
    text = _Gen(rng, biased).build()
    script = tuple(rng.random() < 0.5 for _ in range(rng.randint(0, 4)))
    return Generated(text, parse_program(text), script, seed, biased)


def corpus(n: int, seed: int = 0) -> list:
    base = random.Random(seed)
    return [generate(base.randrange(2 ** 32)) for _ in range(n)]
