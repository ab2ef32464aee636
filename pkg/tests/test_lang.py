from hypothesis import given, settings, strategies as st

from reachflow.fixtures import FIXTURES, load, text
from reachflow.generator import generate
from reachflow.lang import (Call, ParseError, ProgramError, check_well_formed, iter_stmts,
                            parse_program, print_program, resolve_calls)
import pytest


def _shape(p):
    return print_program(p)


class TestParse:
    def test_set_get_classes_and_sites(self, set_get):
        assert [c.name for c in set_get.classes] == ["A", "C"]
        assert sorted(set_get.call_sites) == [6, 7, 8, 9]

    def test_empty_program(self):
        p = parse_program("")
        assert len(p.classes) == 0 and p.call_sites == {}

    def test_annotated_leak_program(self):
        p = load("field_leak")
        assert "Data" in [c.name for c in p.classes]
        assert {str(v) for v in p.sources} == {"Leak.main:sim"}
        assert {str(v) for v in p.sinks} == {"Leak.main:sg"}
        sim = p.method("Leak.main").decl_of("sim")
        assert "pos" in sim.quals

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError) as exc:
            parse_program("class A { Prim f }")
        assert exc.value.loc.line == 1

    def test_unlabelled_calls_take_unused_ids(self):
        src = """class A { void m(A this) { } }
class Main { static void main() { A a; a = new A; a.m(); /*#1*/ a.m(); a.m(); } }"""
        p = parse_program(src)
        assert sorted(p.call_sites) == [1, 2, 3]

    def test_duplicate_site_label_rejected(self):
        src = """class A { void m(A this) { } }
class Main { static void main() { A a; a = new A; /*#1*/ a.m(); /*#1*/ a.m(); } }"""
        with pytest.raises((ParseError, ProgramError)):
            parse_program(src)


class TestWellFormed:
    def test_fixture_is_clean(self, set_get):
        assert check_well_formed(set_get) == []

    def test_two_parameters(self):
        src = """class A { Prim m(A this, Prim p, Prim q) { return p; } }
class Main { static void main() { } }"""
        diags = check_well_formed(parse_program(src, check=False))
        assert any("arity restriction violated" in d.message for d in diags)

    def test_two_parameters_allowed_as_warning(self):
        src = """class A { Prim m(A this, Prim p, Prim q) { return p; } }
class Main { static void main() { } }"""
        p = parse_program(src, allow_multi_param=True)
        assert all(d.severity == "warning" for d in check_well_formed(p))

    def test_unresolved_callee(self):
        src = """class A { }
class Main { static void main() { A a; a = new A; a.n(); } }"""
        diags = check_well_formed(parse_program(src, check=False))
        assert any("unresolved callee" in d.message for d in diags)

    def test_undeclared_variable(self):
        src = "class Main { static void main() { x = new Prim; } }"
        assert check_well_formed(parse_program(src, check=False))


class TestResolve:
    def test_set_get_sites(self, set_get):
        r = resolve_calls(set_get)
        assert r[6].qname == "A.set" and r[7].qname == "A.get"

    def test_inherited_method(self):
        src = """class B { Prim g(B this) { Prim r; r = new Prim; return r; } }
class D extends B { }
class Main { static void main() { D d; Prim x; d = new D; x = d.g(); } }"""
        assert resolve_calls(parse_program(src))[1].qname == "B.g"

    def test_store_param_site(self, store_param):
        assert resolve_calls(store_param)[7].name == "m"


class TestRoundTrip:
    @pytest.mark.parametrize("name", sorted(FIXTURES))
    def test_fixture(self, name):
        p = load(name)
        opts = FIXTURES[name][0]
        assert _shape(parse_program(print_program(p), **opts)) == _shape(p)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_generated(self, seed):
        p = generate(seed).program
        again = parse_program(print_program(p))
        assert _shape(again) == _shape(p)
        assert again.call_sites.keys() == p.call_sites.keys()

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_sites_match_call_statements(self, seed):
        p = generate(seed).program
        calls = [s for m in p.methods() for s in iter_stmts(m.body) if isinstance(s, Call)]
        assert sorted(c.site for c in calls) == sorted(p.call_sites)
        assert len(set(c.site for c in calls)) == len(calls)

    def test_fixture_text_is_shipped(self):
        assert "class" in text("branch_merge")
