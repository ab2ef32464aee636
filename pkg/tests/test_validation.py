import pytest
from hypothesis import given, settings, strategies as st

from reachflow.analysis import Config, analyze, check_witness
from reachflow.cfl import REACHES_MC, REACHES_R_ONLY, UNREACHABLE, run_cfl
from reachflow.fixtures import FIXTURES, load
from reachflow.generator import generate
from reachflow.graphs import build_gri
from reachflow.immutability import infer
from reachflow.interp import Inst, Residual, run
from reachflow.oracle import (ABSENT, EXHAUSTED, FOUND, IGNORE, OracleQuery, PathOracle,
                              oracle_paths)
from reachflow.qualifiers import NEG, POLY, POS, infer_types
from reachflow.validation import (AGREE, PRECISION, SOUNDNESS, check_equivalence,
                                  check_chain_witnesses, compare_precision, validate_program)

from conftest import var


def gri(p):
    return build_gri(p, infer(p))


class TestOracle:
    def test_displayed_path(self, set_get):
        q = OracleQuery(gri(set_get), var(set_get, "A.set:p"), var(set_get, "A.get:ret"),
                        ")6 (7")
        ans = oracle_paths(q)
        assert ans.status == FOUND
        assert [e.ann for e in ans.witness] == ["w_f", ")6", "(7", "r_f"]

    def test_empty_path(self, set_get):
        a = var(set_get, "C.main:a")
        assert oracle_paths(OracleQuery(gri(set_get), a, a, "", bound=0)).found

    def test_distinct_calls(self, set_get):
        q = OracleQuery(gri(set_get), var(set_get, "C.main:a"), var(set_get, "C.main:d"), "")
        assert oracle_paths(q).status == ABSENT

    def test_bound_exhaustion(self, set_get):
        q = OracleQuery(gri(set_get), var(set_get, "C.main:a"), var(set_get, "C.main:b"), "",
                        bound=3)
        assert oracle_paths(q).status == EXHAUSTED

    def test_ignore_discipline(self, set_get):
        q = OracleQuery(gri(set_get), var(set_get, "C.main:a"), var(set_get, "C.main:d"), "",
                        discipline=IGNORE)
        assert oracle_paths(q).status == ABSENT  # still separated by call sites

    def test_cache(self, set_get):
        o = PathOracle(gri(set_get))
        a, b = var(set_get, "C.main:a"), var(set_get, "C.main:b")
        assert o.query(a, b).found and o.query(a, b, Residual()).found


class TestChainWitnesses:
    @pytest.mark.parametrize("name", sorted(set(FIXTURES) - {"shared_receiver"}))
    def test_fixture(self, name):
        p = load(name)
        rep = check_chain_witnesses(run(p, FIXTURES[name][1]), gri(p), infer(p), p)
        assert rep.checked and rep.failures == [] and rep.inconclusive == []

    def test_store_param_chain(self, store_param):
        res = run(store_param)
        x = Inst(var(store_param, "H.m:x"), (0, 1))
        y = Inst(var(store_param, "Main.main:y"), (0,))
        assert (x, y) in res.history
        ans = oracle_paths(OracleQuery(gri(store_param), x.var, y.var, ")7"))
        assert [e.ann for e in ans.witness] == ["d", ")7"]

    def test_empty_trace(self):
        from reachflow.lang import parse_program
        p = parse_program("class Main { static void main() { } }")
        rep = check_chain_witnesses(run(p), gri(p), infer(p), p)
        assert rep.ok and rep.checked == 0

    def test_shared_receiver_counterexample(self):
        # the only path leaves the frame through the argument and re-enters
        # through the receiver, so the residual is )1 (1 rather than empty
        p = load("shared_receiver")
        rep = check_chain_witnesses(run(p), gri(p), infer(p), p)
        assert [str(m) for m in rep.failures] == [
            "forward A.m:v^<0,1> -> A.m:w^<0,1> []: absent"]
        ans = PathOracle(gri(p)).query(var(p, "A.m:v"), var(p, "A.m:w"), ")1 (1")
        assert ans.found


class TestEquivalence:
    def test_set_get(self, set_get):
        b = var(set_get, "C.main:b")
        g = gri(set_get)
        rep = check_equivalence(run_cfl(g, [b]), infer_types(set_get, g, {b: NEG}),
                                set_get.variables())
        assert rep.ok
        assert rep.rows[var(set_get, "C.main:a")] == (REACHES_MC, NEG, AGREE)
        assert rep.rows[var(set_get, "A.get:this")] == (REACHES_R_ONLY, POLY, AGREE)
        assert rep.rows[var(set_get, "C.main:c")] == (UNREACHABLE, POS, AGREE)

    def test_no_sinks(self, set_get):
        g = gri(set_get)
        rep = check_equivalence(run_cfl(g, []), infer_types(set_get, g, {}), set_get.variables())
        assert {r for r in rep.rows.values()} == {(UNREACHABLE, POS, AGREE)}

    def test_adapter_program(self, adapter_prog):
        g = gri(adapter_prog)
        pins = {s: NEG for s in adapter_prog.sinks}
        rep = check_equivalence(run_cfl(g, adapter_prog.sinks),
                                infer_types(adapter_prog, g, pins), adapter_prog.variables())
        for n in ("x", "y", "a1", "y1", "x2", "y3"):
            assert rep.rows[var(adapter_prog, f"Main.main:{n}")][2] == AGREE

    def test_verdict_direction(self, set_get):
        b = var(set_get, "C.main:b")
        P = run_cfl(gri(set_get), [b])
        a, c = var(set_get, "C.main:a"), var(set_get, "C.main:c")
        rep = check_equivalence(P, {a: POS, c: NEG}, [a, c])
        assert rep.rows[a][2] == SOUNDNESS and rep.rows[c][2] == PRECISION

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_generated(self, seed):
        p = generate(seed).program
        g = gri(p)
        rep = check_equivalence(run_cfl(g, p.sinks), infer_types(p, g, {s: NEG for s in p.sinks}),
                                p.variables())
        assert rep.violations == {}

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_generated_positive(self, seed):
        from reachflow.cfl import run_cfl_positive
        p = generate(seed).program
        g = gri(p)
        rep = check_equivalence(run_cfl_positive(g, p.sources),
                                infer_types(p, g, {s: POS for s in p.sources}, setting="pos"),
                                p.variables(), "pos")
        assert rep.violations == {}


class TestPrecision:
    def test_branch(self):
        p = load("branch_merge")
        rep = compare_precision(p)
        b = var(p, "Main.main:b")
        assert rep.bi[(var(p, "Main.main:a"), b)] != UNREACHABLE
        assert rep.ri[(var(p, "Main.main:a"), b)] == UNREACHABLE
        assert rep.strict

    def test_no_inverse_edges(self):
        from reachflow.lang import parse_program
        p = parse_program("""class Main { static void main() { Prim a; @sink Prim b;
a = new Prim; b = a; } }""")
        rep = compare_precision(p)
        assert rep.extra == set() and rep.included

    def test_store_param(self, store_param):
        a, b = var(store_param, "Main.main:a"), var(store_param, "Main.main:b")
        rep = compare_precision(store_param, [a, b])
        assert rep.ri[(a, b)] != UNREACHABLE
        assert rep.ri[(b, a)] == UNREACHABLE and rep.bi[(b, a)] != UNREACHABLE
        assert rep.strict
        ri_b = {str(v) for (v, n), c in rep.ri.items() if n == b and c != UNREACHABLE}
        assert ri_b == {"Main.main:a", "Main.main:b", "Main.main:w", "Main.main:y",
                        "Main.main:z", "H.m:p", "H.m:x", "H.m:ret"}

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_inclusion(self, seed):
        assert compare_precision(generate(seed).program).included


class TestWitnesses:
    @pytest.mark.parametrize("setting", ["neg", "pos"])
    @pytest.mark.parametrize("engine", ["cfl", "types"])
    def test_leak_witness_replays(self, setting, engine):
        p = load("field_leak")
        a = analyze(p, Config(setting=setting, engine=engine))
        assert len(a.conflicts) == 1
        c = a.conflicts[0]
        fields = {e.label for e in a.graph.edges if e.kind in ("w", "r")}
        assert c.witness and check_witness(a.graph, c.witness, c.source, c.sink, fields)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_generated_witnesses(self, seed):
        p = generate(seed).program
        a = analyze(p, Config(engine="both"))
        for c in a.conflicts:
            assert check_witness(a.graph, c.witness, c.source, c.sink, a.cfl.fields)


class TestProgramGate:
    @pytest.mark.parametrize("name", sorted(set(FIXTURES) - {"shared_receiver"}))
    def test_fixture(self, name):
        p = load(name)
        assert validate_program(p, FIXTURES[name][1], name).ok
