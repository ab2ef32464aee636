"""Command-line driver.

Exit status: 0 clean, 1 source/sink conflicts or failed checks, 2 usage or
input errors.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

from .analysis import ENGINES, GRAPHS, MODES, SETTINGS, Config, analyze, make_graph
from .graphs import emit_dot
from .immutability import infer
from .lang import ParseError, ProgramError, check_well_formed, parse_program, print_program
from .oracle import DEFAULT_BOUND

DEFAULTS = {"setting": "neg", "graph": "ri", "engine": "cfl", "mode": "multi",
            "oracle_bound": DEFAULT_BOUND, "seed": 0, "random": 500,
            "allow_multi_param": False, "context_insensitive": False}
_BOOL = {"allow_multi_param", "context_insensitive"}
_INT = {"oracle_bound", "seed", "random"}


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """``key = value`` lines; dashes and underscores in keys are interchangeable."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string("[cfg]\n" + Path(path).read_text(encoding="utf-8"))
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    out = {}
    for k, v in cp["cfg"].items():
        key = k.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"unknown config key {k!r}")
        if key in _BOOL:
            out[key] = cp["cfg"].getboolean(k)
        elif key in _INT:
            out[key] = int(v)
        else:
            out[key] = v.strip()
    return out


def resolve(args) -> dict:
    """Flags win over the config file, which wins over defaults."""
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for k, d in DEFAULTS.items():
        flag = getattr(args, k, None)
        out[k] = flag if flag is not None else conf.get(k, d)
    return out


def _load(path: str, allow_multi_param: bool):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc}")
    try:
        return parse_program(text, allow_multi_param=allow_multi_param)
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}")
    except ProgramError as exc:
        raise UsageError("\n".join(f"{path}:{d}" for d in exc.diagnostics))


def _write(path, text: str):
    Path(path).write_text(text, encoding="utf-8")


def _config(opts) -> Config:
    try:
        return Config(opts["setting"], opts["graph"], opts["engine"], opts["mode"],
                      opts["context_insensitive"])
    except ValueError as exc:
        raise UsageError(str(exc))


# -- subcommands -----------------------------------------------------------------

def cmd_parse(args, opts, out) -> int:
    status = 0
    for path in args.files:
        try:
            text = Path(path).read_text(encoding="utf-8")
            p = parse_program(text, check=False, allow_multi_param=opts["allow_multi_param"])
        except (OSError, ParseError) as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            status = 2
            continue
        diags = check_well_formed(p)
        for d in diags:
            print(f"{path}:{d}", file=sys.stderr)
        if any(d.severity == "error" for d in diags):
            status = 2
            continue
        out.write(print_program(p))
    return status


def cmd_imm(args, opts, out) -> int:
    report = {}
    for path in args.files:
        p = _load(path, opts["allow_multi_param"])
        imm = infer(p)
        report[path] = {"variables": {str(v): q for v, q in sorted(imm.vars.items())},
                        "fields": {str(f): q for f, q in sorted(imm.fields.items())}}
        if not args.json:
            for line in imm.lines():
                out.write(line + "\n")
            for f, q in sorted(imm.fields.items()):
                out.write(f"{f}: {q}\n")
    if args.json:
        _write(args.json, json.dumps({"schema": 1, "files": report}, indent=2, sort_keys=True))
    return 0


def cmd_graph(args, opts, out) -> int:
    cfg = _config(opts)
    for path in args.files:
        p = _load(path, opts["allow_multi_param"])
        g = make_graph(p, infer(p), cfg)
        if args.emit_dot:
            _write(args.emit_dot, emit_dot(g))
        if args.json:
            _write(args.json, json.dumps(g.to_json(), indent=2, sort_keys=True))
        if not args.emit_dot and not args.json:
            for e in sorted(g.edges, key=lambda e: (str(e.src), str(e.dst), e.ann, e.inverse)):
                out.write(f"{e}\n")
    return 0


def cmd_analyze(args, opts, out) -> int:
    cfg = _config(opts)
    if cfg.graph == "bi" and cfg.mode != "multi":
        print("warning: adapter mode has no immutability input on the untrimmed graph",
              file=sys.stderr)
    status, reports = 0, {}
    for path in args.files:
        p = _load(path, opts["allow_multi_param"])
        a = analyze(p, cfg)
        reports[path] = a.to_json()
        for w in a.warnings:
            print(f"{path}: warning: {w}", file=sys.stderr)
        for c in a.conflicts:
            out.write(f"{path}: error: {c} [{c.engine}]\n")
            for step in c.witness:
                out.write(f"    {step}\n")
        if a.equivalence is not None:
            out.write(f"{path}: engines {a.equivalence.verdict}\n")
            for v, (cls, q, verdict) in sorted(a.equivalence.rows.items()):
                out.write(f"    {v}: {cls} / {q} ({verdict})\n")
        if args.emit_imm:
            for line in a.imm.lines():
                out.write(f"    {line}\n")
        if args.emit_dot:
            _write(args.emit_dot, emit_dot(a.graph))
        if a.conflicts:
            status = 1
        else:
            out.write(f"{path}: no conflicts\n")
    if args.json:
        _write(args.json, json.dumps({"schema": 1, "files": reports}, indent=2, sort_keys=True))
    return status


def cmd_validate(args, opts, out) -> int:
    from .validation import random_corpus, validate_corpus, fixture_corpus
    items = []
    if args.files:
        for path in args.files:
            items.append((path, _load(path, opts["allow_multi_param"]), ()))
    else:
        items = fixture_corpus()
    if opts["random"]:
        items += random_corpus(opts["random"], opts["seed"])
    rep = validate_corpus(items, bound=opts["oracle_bound"], seed=opts["seed"])
    summary = rep.summary()
    for k, v in summary.items():
        if k not in ("schema", "failing"):
            out.write(f"{k}: {v}\n")
    for r in rep.programs:
        for miss in r.witnesses.failures:
            out.write(f"{r.name}: unwitnessed chain {miss}\n")
        for miss in r.witnesses.inconclusive:
            out.write(f"{r.name}: inconclusive chain {miss}\n")
    if args.json:
        _write(args.json, json.dumps(summary, indent=2, sort_keys=True))
    if args.junit:
        _write(args.junit, junit_xml(rep))
    return 0 if rep.ok else 1


def junit_xml(rep) -> str:
    from xml.sax.saxutils import quoteattr
    fails = [r for r in rep.programs if not r.ok]
    lines = [f'<testsuite name="validate" tests="{len(rep.programs)}" failures="{len(fails)}">']
    for r in rep.programs:
        lines.append(f"  <testcase name={quoteattr(r.name)}>")
        if not r.ok:
            msg = "; ".join(str(m) for m in r.witnesses.failures) or "check failed"
            lines.append(f"    <failure message={quoteattr(msg)}/>")
        lines.append("  </testcase>")
    lines.append("</testsuite>")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="reachflow", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file mirroring the flags")
    common.add_argument("--allow-multi-param", action="store_true", default=None)
    common.add_argument("--json", metavar="PATH")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("parse", parents=[common], help="check and pretty-print programs")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("imm", parents=[common], help="reference immutability")
    p.add_argument("files", nargs="+")

    def engine_flags(sp):
        sp.add_argument("--setting", choices=SETTINGS)
        sp.add_argument("--graph", choices=GRAPHS)
        sp.add_argument("--emit-dot", metavar="PATH")
        sp.add_argument("--context-insensitive", action="store_true", default=None)

    p = sub.add_parser("graph", parents=[common], help="print or export a flow graph")
    engine_flags(p)
    p.add_argument("files", nargs="+")

    p = sub.add_parser("analyze", parents=[common], help="report source/sink conflicts")
    engine_flags(p)
    p.add_argument("--engine", choices=ENGINES)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--emit-imm", action="store_true")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("validate", parents=[common], help="run the cross-checks")
    p.add_argument("--oracle-bound", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--random", type=int, metavar="N", help="random programs to add (0 for none)")
    p.add_argument("--junit", metavar="PATH")
    p.add_argument("files", nargs="*")
    return ap


COMMANDS = {"parse": cmd_parse, "imm": cmd_imm, "graph": cmd_graph, "analyze": cmd_analyze,
            "validate": cmd_validate}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        opts = resolve(args)
        return COMMANDS[args.cmd](args, opts, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
