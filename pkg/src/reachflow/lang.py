"""Core object language: AST, parser, printer, resolution and well-formedness.

Programs are written in a small Java-like named form::

    class A {
        Prim f;
        void set(A this, Prim p) { this.f = p; }
        Prim get(A this) { Prim ret; ret = this.f; return ret; }
    }
    class Main {
        static void main() {
            A e = new A;
            @source Prim a = new Prim;
            /*#6*/ e.set(a);
        }
    }

Every statement is one of assignment, allocation, field read, field write,
call, or a nondeterministic ``if (*) {..} else {..}``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

PRIM = "Prim"
QUALIFIERS = ("pos", "poly", "neg")
ROLES = ("source", "sink")


@dataclass(frozen=True, order=True)
class Loc:
    line: int = 0
    col: int = 0

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True, order=True)
class VarId:
    """A variable qualified by its method, e.g. ``A.set:this``."""

    method: str
    name: str

    def __str__(self):
        return f"{self.method}:{self.name}"

    @property
    def short(self) -> str:
        # this_set / p_set style, handy for reports
        return f"{self.name}_{self.method.rsplit('.', 1)[-1]}"


@dataclass(frozen=True, order=True)
class FieldId:
    cls: str
    name: str

    def __str__(self):
        return f"{self.cls}.{self.name}"


# -- statements -------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    target: str
    source: str
    loc: Loc = field(default=Loc(), compare=False)


@dataclass(frozen=True)
class Alloc:
    target: str
    cls: str
    loc: Loc = field(default=Loc(), compare=False)


@dataclass(frozen=True)
class Read:
    """``target = base.field``"""

    target: str
    base: str
    field: str
    loc: Loc = field(default=Loc(), compare=False)


@dataclass(frozen=True)
class Write:
    """``base.field = value``"""

    base: str
    field: str
    value: str
    loc: Loc = field(default=Loc(), compare=False)


@dataclass(frozen=True)
class Call:
    site: int
    target: Optional[str]
    receiver: str
    method: str
    args: tuple
    loc: Loc = field(default=Loc(), compare=False)
    labeled: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class Branch:
    then: tuple
    orelse: tuple
    loc: Loc = field(default=Loc(), compare=False)


Stmt = Union[Assign, Alloc, Read, Write, Call, Branch]


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str
    quals: frozenset = frozenset()
    roles: frozenset = frozenset()
    loc: Loc = field(default=Loc(), compare=False)


@dataclass(frozen=True)
class MethodDecl:
    cls: str
    name: str
    ret_type: Optional[str]  # None means void
    params: tuple  # VarDecl, excluding this
    locals: tuple  # VarDecl
    body: tuple
    ret_var: Optional[str] = None
    static: bool = False
    ret_quals: frozenset = frozenset()
    loc: Loc = field(default=Loc(), compare=False)

    @property
    def qname(self) -> str:
        return f"{self.cls}.{self.name}"

    def var(self, name: str) -> VarId:
        return VarId(self.qname, name)

    @property
    def this(self) -> Optional[VarId]:
        return None if self.static else self.var("this")

    @property
    def param_ids(self) -> tuple:
        return tuple(self.var(p.name) for p in self.params)

    @property
    def ret(self) -> Optional[VarId]:
        """The return node; ``None`` for void methods."""
        return self.var("ret") if self.ret_var is not None else None

    @property
    def anchors(self) -> tuple:
        out = [] if self.static else [self.this]
        out.extend(self.param_ids)
        if self.ret is not None:
            out.append(self.ret)
        return tuple(out)

    def lowered_body(self) -> tuple:
        """Body with the implicit ``ret = y`` for ``return y`` appended."""
        if self.ret_var is None or self.ret_var == "ret":
            return self.body
        return self.body + (Assign("ret", self.ret_var, self.loc),)

    def declared(self) -> dict:
        """name -> declared type, for this, params, locals and ret."""
        out = {}
        if not self.static:
            out["this"] = self.cls
        for d in self.params + self.locals:
            out[d.name] = d.type
        if self.ret_var is not None and "ret" not in out and self.ret_type:
            out["ret"] = self.ret_type
        return out

    def decl_of(self, name: str) -> Optional[VarDecl]:
        for d in self.params + self.locals:
            if d.name == name:
                return d
        return None

    def variables(self) -> list:
        return [self.var(n) for n in self.declared()]


@dataclass(frozen=True)
class ClassDecl:
    name: str
    superclass: Optional[str]
    fields: tuple  # VarDecl
    methods: tuple  # MethodDecl
    loc: Loc = field(default=Loc(), compare=False)


@dataclass(frozen=True)
class Diagnostic:
    loc: Loc
    message: str
    severity: str = "error"

    def __str__(self):
        return f"{self.loc}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, message, loc=Loc()):
        super().__init__(f"{loc}: {message}")
        self.loc = loc
        self.message = message


class ProgramError(Exception):
    """Raised when a parsed program has error-severity diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def iter_stmts(body) -> Iterator:
    """Flatten nested branches, in source order."""
    for s in body:
        if isinstance(s, Branch):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.orelse)
        else:
            yield s


@dataclass(frozen=True)
class Program:
    classes: tuple
    allow_multi_param: bool = False

    # -- lookup helpers -----------------------------------------------------
    def cls(self, name: str) -> Optional[ClassDecl]:
        for c in self.classes:
            if c.name == name:
                return c
        return None

    def methods(self) -> list:
        return [m for c in self.classes for m in c.methods]

    def method(self, qname: str) -> MethodDecl:
        for m in self.methods():
            if m.qname == qname:
                return m
        raise KeyError(qname)

    @property
    def entry(self) -> Optional[MethodDecl]:
        statics = [m for m in self.methods() if m.static]
        return statics[0] if len(statics) == 1 else None

    def superchain(self, name: str) -> list:
        out, seen = [], set()
        while name is not None and name not in seen:
            seen.add(name)
            c = self.cls(name)
            if c is None:
                break
            out.append(c)
            name = c.superclass
        return out

    def lookup_method(self, cls_name: str, mname: str) -> Optional[MethodDecl]:
        for c in self.superchain(cls_name):
            for m in c.methods:
                if m.name == mname and not m.static:
                    return m
        return None

    def lookup_field(self, cls_name: str, fname: str) -> Optional[FieldId]:
        for c in self.superchain(cls_name):
            for f in c.fields:
                if f.name == fname:
                    return FieldId(c.name, fname)
        return None

    def field_decl(self, fid: FieldId) -> Optional[VarDecl]:
        c = self.cls(fid.cls)
        for f in c.fields if c else ():
            if f.name == fid.name:
                return f
        return None

    def all_fields(self) -> list:
        return [FieldId(c.name, f.name) for c in self.classes for f in c.fields]

    def calls(self) -> list:
        """(method, Call) pairs in source order."""
        return [(m, s) for m in self.methods() for s in iter_stmts(m.body)
                if isinstance(s, Call)]

    @property
    def call_sites(self) -> dict:
        return resolve_calls(self, strict=False)

    def field_of(self, m: MethodDecl, base: str, fname: str) -> Optional[FieldId]:
        t = m.declared().get(base)
        return self.lookup_field(t, fname) if t else None

    def variables(self) -> list:
        return [v for m in self.methods() for v in m.variables()]

    def annotated(self, role: str) -> list:
        """Variables carrying a role marker (or the matching qualifier)."""
        qual = {"sink": "neg", "source": "pos"}[role]
        out = []
        for m in self.methods():
            for d in m.params + m.locals:
                if role in d.roles or qual in d.quals:
                    out.append(m.var(d.name))
            if m.ret is not None and (qual in m.ret_quals) and m.decl_of("ret") is None:
                out.append(m.ret)
        return sorted(set(out))

    @property
    def sinks(self) -> list:
        return self.annotated("sink")

    @property
    def sources(self) -> list:
        return self.annotated("source")


# -- lexer ------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<label>/\*\#\s*(?P<num>\d+)\s*\*/)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<lcomment>//[^\n]*)
  | (?P<annot>@[A-Za-z_]\w*)
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<punct>[{}();,.=*])
""", re.VERBOSE | re.DOTALL)

KEYWORDS = {"class", "extends", "static", "void", "return", "new", "if", "else"}


@dataclass
class Token:
    kind: str
    text: str
    loc: Loc


def tokenize(text: str) -> list:
    out, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", Loc(line, pos - line_start + 1))
        kind = m.lastgroup if m.lastgroup != "num" else "label"
        loc = Loc(line, pos - line_start + 1)
        chunk = m.group(0)
        if kind == "label":
            out.append(Token("label", m.group("num"), loc))
        elif kind == "ident":
            out.append(Token("kw" if chunk in KEYWORDS else "ident", chunk, loc))
        elif kind in ("annot", "punct"):
            out.append(Token(kind, chunk, loc))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", Loc(line, pos - line_start + 1)))
    return out


# -- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self.calls = []  # (mutable record) call statements needing site ids

    def peek(self, k=0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text=None, kind=None) -> Token:
        t = self.next()
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {t.text or t.kind!r}", t.loc)
        return t

    def at(self, text) -> bool:
        return self.peek().text == text and self.peek().kind in ("punct", "kw")

    def ident(self) -> str:
        return self.expect(kind="ident").text

    def annotations(self):
        quals, roles = set(), set()
        while self.peek().kind == "annot":
            t = self.next()
            name = t.text[1:]
            if name in QUALIFIERS:
                quals.add(name)
            elif name in ROLES:
                roles.add(name)
            else:
                raise ParseError(f"unknown annotation {t.text}", t.loc)
        return frozenset(quals), frozenset(roles)

    def program(self) -> list:
        classes = []
        while self.peek().kind != "eof":
            classes.append(self.class_decl())
        return classes

    def class_decl(self) -> ClassDecl:
        loc = self.expect("class").loc
        name = self.ident()
        sup = None
        if self.at("extends"):
            self.next()
            sup = self.ident()
        self.expect("{")
        fields, methods = [], []
        while not self.at("}"):
            quals, roles = self.annotations()
            static = False
            if self.at("static"):
                self.next()
                static = True
            t = self.next()
            if t.kind == "kw" and t.text == "void":
                rtype = None
            elif t.kind == "ident":
                rtype = t.text
            else:
                raise ParseError(f"expected member declaration, found {t.text!r}", t.loc)
            mname_tok = self.expect(kind="ident")
            if self.at("(") or static or rtype is None:
                methods.append(self.method_decl(name, mname_tok, rtype, static, quals))
            else:
                self.expect(";")
                fields.append(VarDecl(mname_tok.text, rtype, quals, roles, mname_tok.loc))
        self.expect("}")
        return ClassDecl(name, sup, tuple(fields), tuple(methods), loc)

    def param(self):
        quals, roles = self.annotations()
        tloc = self.peek().loc
        ptype = self.ident()
        pname = self.expect(kind="ident").text if self.peek().kind == "ident" else None
        if pname is None:
            raise ParseError("expected parameter name", tloc)
        return VarDecl(pname, ptype, quals, roles, tloc)

    def method_decl(self, cls, name_tok, rtype, static, rquals) -> MethodDecl:
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.param())
            while self.at(","):
                self.next()
                params.append(self.param())
        self.expect(")")
        if params and params[0].name == "this":
            params = params[1:]
        self.expect("{")
        locals_, body = [], []
        ret_var = None
        while not self.at("}"):
            if self.at("return"):
                self.next()
                ret_var = self.ident()
                self.expect(";")
                if not self.at("}"):
                    raise ParseError("return must be the last statement", self.peek().loc)
                break
            self.block_item(locals_, body)
        self.expect("}")
        return MethodDecl(cls, name_tok.text, rtype, tuple(params), tuple(locals_),
                          tuple(body), ret_var, static, rquals, name_tok.loc)

    def is_decl(self) -> bool:
        t0, t1 = self.peek(), self.peek(1)
        return t0.kind == "annot" or (t0.kind == "ident" and t1.kind == "ident")

    def block_item(self, locals_, body):
        if self.is_decl():
            quals, roles = self.annotations()
            vtype = self.ident()
            while True:
                ntok = self.expect(kind="ident")
                locals_.append(VarDecl(ntok.text, vtype, quals, roles, ntok.loc))
                if self.at("="):
                    self.next()
                    body.append(self.rhs(ntok.text, ntok.loc, None))
                if self.at(","):
                    self.next()
                    continue
                break
            self.expect(";")
            return
        body.append(self.stmt())

    def block(self) -> tuple:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.is_decl():
                raise ParseError("declarations are not allowed inside branches", self.peek().loc)
            stmts.append(self.stmt())
        self.expect("}")
        return tuple(stmts)

    def stmt(self):
        label = None
        if self.peek().kind == "label":
            label = int(self.next().text)
        t = self.peek()
        if t.kind == "kw" and t.text == "if":
            if label is not None:
                raise ParseError("labels only apply to calls", t.loc)
            self.next()
            self.expect("(")
            self.expect("*")
            self.expect(")")
            then = self.block()
            orelse = ()
            if self.at("else"):
                self.next()
                orelse = self.block()
            return Branch(then, orelse, t.loc)
        first = self.ident()
        if self.at("."):
            self.next()
            member = self.ident()
            if self.at("("):
                args = self.args()
                self.expect(";")
                return self.make_call(label, None, first, member, args, t.loc)
            self.expect("=")
            value = self.ident()
            self.expect(";")
            self.no_label(label, t)
            return Write(first, member, value, t.loc)
        self.expect("=")
        return self.rhs(first, t.loc, label)

    def no_label(self, label, t):
        if label is not None:
            raise ParseError("labels only apply to calls", t.loc)

    def rhs(self, target, loc, label):
        t = self.peek()
        if t.kind == "kw" and t.text == "new":
            self.next()
            cls = self.ident()
            if self.at("("):
                self.next()
                self.expect(")")
            self.expect(";")
            self.no_label(label, t)
            return Alloc(target, cls, loc)
        src = self.ident()
        if self.at("."):
            self.next()
            member = self.ident()
            if self.at("("):
                args = self.args()
                self.expect(";")
                return self.make_call(label, target, src, member, args, loc)
            self.expect(";")
            self.no_label(label, t)
            return Read(target, src, member, loc)
        if self.at("("):
            raise ParseError("calls need an explicit receiver", self.peek().loc)
        self.expect(";")
        self.no_label(label, t)
        return Assign(target, src, loc)

    def args(self) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.ident())
            while self.at(","):
                self.next()
                out.append(self.ident())
        self.expect(")")
        return tuple(out)

    def make_call(self, label, target, recv, meth, args, loc):
        c = Call(label if label is not None else -1, target, recv, meth, args, loc,
                 labeled=label is not None)
        self.calls.append(c)
        return c


def _number_sites(classes, calls) -> list:
    """Give unlabeled calls the smallest unused positive ids, in source order."""
    used = {c.site for c in calls if c.labeled}
    mapping, nxt = {}, 1
    for c in calls:
        if c.labeled:
            continue
        while nxt in used:
            nxt += 1
        mapping[id(c)] = nxt
        used.add(nxt)

    def fix(body):
        out = []
        for s in body:
            if isinstance(s, Branch):
                out.append(Branch(fix(s.then), fix(s.orelse), s.loc))
            elif isinstance(s, Call) and id(s) in mapping:
                out.append(Call(mapping[id(s)], s.target, s.receiver, s.method, s.args,
                                s.loc, False))
            else:
                out.append(s)
        return tuple(out)

    out = []
    for c in classes:
        ms = tuple(MethodDecl(m.cls, m.name, m.ret_type, m.params, m.locals, fix(m.body),
                              m.ret_var, m.static, m.ret_quals, m.loc) for m in c.methods)
        out.append(ClassDecl(c.name, c.superclass, c.fields, ms, c.loc))
    return out


def parse_program(text: str, check: bool = True, allow_multi_param: bool = False) -> Program:
    """Parse source text; with ``check`` raise :class:`ProgramError` on errors."""
    p = _Parser(text)
    classes = _number_sites(p.program(), p.calls)
    prog = Program(tuple(classes), allow_multi_param)
    if check:
        errors = [d for d in check_well_formed(prog) if d.severity == "error"]
        if errors:
            raise ProgramError(errors)
    return prog


# -- well-formedness --------------------------------------------------------

def check_well_formed(p: Program) -> list:
    """Return diagnostics; an empty list means the program is well formed."""
    diags = []

    def err(loc, msg, severity="error"):
        diags.append(Diagnostic(loc, msg, severity))

    names = {}
    for c in p.classes:
        if c.name == PRIM:
            err(c.loc, f"class {PRIM} is built in")
        if c.name in names:
            err(c.loc, f"duplicate class {c.name}")
        names[c.name] = c
    known = set(names) | {PRIM}

    for c in p.classes:
        if c.superclass is not None and c.superclass not in names:
            err(c.loc, f"unresolved superclass {c.superclass}")
        cur, seen = c.name, set()
        while cur in names and cur not in seen:
            seen.add(cur)
            cur = names[cur].superclass
        if cur in seen:
            err(c.loc, f"inheritance cycle through {c.name}")
        members = set()
        for f in c.fields:
            if f.name in members:
                err(f.loc, f"duplicate field {c.name}.{f.name}")
            members.add(f.name)
            if f.type not in known:
                err(f.loc, f"unresolved class {f.type}")
            if "neg" in f.quals:
                err(f.loc, f"field {c.name}.{f.name} may not be annotated neg", "warning")
        mnames = set()
        for m in c.methods:
            if m.name in mnames:
                err(m.loc, f"duplicate method {m.qname}")
            mnames.add(m.name)
            if c.superclass and not m.static and p.lookup_method(c.superclass, m.name):
                err(m.loc, f"method {m.qname} overrides an inherited method")

    statics = [m for m in p.methods() if m.static]
    if len(statics) != 1 and p.classes:
        err(Loc(), f"expected exactly one static entry method, found {len(statics)}")
    for m in statics:
        if m.params or m.ret_var is not None:
            err(m.loc, f"entry method {m.qname} must take no parameters and return nothing")

    sites = {}
    for m in p.methods():
        _check_method(p, m, known, err)
        for s in iter_stmts(m.body):
            if isinstance(s, Call):
                if s.site in sites:
                    err(s.loc, f"duplicate call site label {s.site}")
                sites[s.site] = s
    return diags


def _check_method(p, m, known, err):
    if len(m.params) > 1:
        sev = "warning" if p.allow_multi_param else "error"
        err(m.loc, f"arity restriction violated: {m.qname} has {len(m.params)} parameters", sev)
    if m.ret_type is not None and m.ret_var is None and not m.static:
        err(m.loc, f"method {m.qname} must end with a return")
    if m.ret_type is None and m.ret_var is not None:
        err(m.loc, f"void method {m.qname} returns a value")
    seen = set() if m.static else {"this"}
    for d in m.params + m.locals:
        if d.name in seen:
            err(d.loc, f"duplicate variable {d.name} in {m.qname}")
        seen.add(d.name)
        if d.type not in known:
            err(d.loc, f"unresolved class {d.type}")
        if "sink" in d.roles and d.type != PRIM:
            err(d.loc, f"sink {d.name} is not of type {PRIM}", "warning")
    if m.ret_type is not None and m.ret_type not in known:
        err(m.loc, f"unresolved class {m.ret_type}")
    declared = m.declared()

    def use(name, loc):
        if name not in declared:
            err(loc, f"undeclared variable {name} in {m.qname}")
            return None
        return declared[name]

    if m.ret_var is not None:
        use(m.ret_var, m.loc)
    for s in iter_stmts(m.body):
        if isinstance(s, Assign):
            use(s.target, s.loc)
            use(s.source, s.loc)
        elif isinstance(s, Alloc):
            use(s.target, s.loc)
            if s.cls not in known:
                err(s.loc, f"unresolved class {s.cls}")
        elif isinstance(s, (Read, Write)):
            base, fname = (s.base, s.field)
            for v in ((s.target,) if isinstance(s, Read) else (s.value,)):
                use(v, s.loc)
            t = use(base, s.loc)
            if t is not None and p.lookup_field(t, fname) is None:
                err(s.loc, f"unresolved field {fname} on {t}")
        elif isinstance(s, Call):
            if s.target is not None:
                use(s.target, s.loc)
            for a in s.args:
                use(a, s.loc)
            t = use(s.receiver, s.loc)
            if t is None:
                continue
            callee = p.lookup_method(t, s.method)
            if callee is None:
                err(s.loc, f"unresolved callee {t}.{s.method} at site {s.site}")
                continue
            if len(callee.params) != len(s.args):
                err(s.loc, f"call at site {s.site} passes {len(s.args)} arguments, "
                           f"{callee.qname} expects {len(callee.params)}")
            if s.target is not None and callee.ret is None:
                err(s.loc, f"call at site {s.site} assigns the result of void {callee.qname}")


def resolve_calls(p: Program, strict: bool = True) -> dict:
    """Map each call site id to its callee, using the receiver's static type."""
    out = {}
    for m, c in p.calls():
        t = m.declared().get(c.receiver)
        callee = p.lookup_method(t, c.method) if t else None
        if callee is None:
            if strict:
                raise ProgramError([Diagnostic(c.loc, f"unresolved callee at site {c.site}")])
            continue
        out[c.site] = callee
    return out


def call_records(p: Program) -> list:
    """(caller, Call, callee) triples for resolved calls, by site id."""
    sites = resolve_calls(p, strict=False)
    return sorted(((m, c, sites[c.site]) for m, c in p.calls() if c.site in sites),
                  key=lambda r: r[1].site)


# -- printer ----------------------------------------------------------------

def _annots(quals, roles) -> str:
    parts = [f"@{q}" for q in QUALIFIERS if q in quals] + [f"@{r}" for r in ROLES if r in roles]
    return " ".join(parts) + (" " if parts else "")


def _print_stmt(s, indent) -> list:
    pad = "    " * indent
    if isinstance(s, Assign):
        return [f"{pad}{s.target} = {s.source};"]
    if isinstance(s, Alloc):
        return [f"{pad}{s.target} = new {s.cls};"]
    if isinstance(s, Read):
        return [f"{pad}{s.target} = {s.base}.{s.field};"]
    if isinstance(s, Write):
        return [f"{pad}{s.base}.{s.field} = {s.value};"]
    if isinstance(s, Call):
        lhs = f"{s.target} = " if s.target is not None else ""
        return [f"{pad}/*#{s.site}*/ {lhs}{s.receiver}.{s.method}({', '.join(s.args)});"]
    lines = [f"{pad}if (*) {{"]
    for t in s.then:
        lines += _print_stmt(t, indent + 1)
    lines.append(f"{pad}}} else {{")
    for t in s.orelse:
        lines += _print_stmt(t, indent + 1)
    lines.append(f"{pad}}}")
    return lines


def print_program(p: Program) -> str:
    lines = []
    for c in p.classes:
        ext = f" extends {c.superclass}" if c.superclass else ""
        lines.append(f"class {c.name}{ext} {{")
        for f in c.fields:
            lines.append(f"    {_annots(f.quals, f.roles)}{f.type} {f.name};")
        for m in c.methods:
            params = [] if m.static else [f"{m.cls} this"]
            params += [f"{_annots(d.quals, d.roles)}{d.type} {d.name}" for d in m.params]
            head = "static " if m.static else ""
            rq = _annots(m.ret_quals, ())
            lines.append(f"    {rq}{head}{m.ret_type or 'void'} {m.name}({', '.join(params)}) {{")
            for d in m.locals:
                lines.append(f"        {_annots(d.quals, d.roles)}{d.type} {d.name};")
            for s in m.body:
                lines += _print_stmt(s, 2)
            if m.ret_var is not None:
                lines.append(f"        return {m.ret_var};")
            lines.append("    }")
        lines.append("}")
    return "\n".join(lines) + "\n"


def load_program(path, **kw) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read(), **kw)
