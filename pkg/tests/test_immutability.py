import pytest
from hypothesis import given, settings, strategies as st

from reachflow.fixtures import FIXTURES, load
from reachflow.generator import generate
from reachflow.immutability import (MUTABLE, POLY, READONLY, adapt_ri, adapt_ri_seq,
                                    build_ri_graph, infer)
from reachflow.lang import FieldId
from reachflow.oracle import ri_oracle
from reachflow.validation import ri_vs_oracle

from conftest import var


class TestStoreParam:
    def test_variable_qualifiers(self, store_param):
        imm = infer(store_param)
        got = {str(v): q for v, q in imm.vars.items()}
        want = {"H.m:p": MUTABLE, "Main.main:y": MUTABLE, "Main.main:z": MUTABLE,
                "H.m:x": POLY, "H.m:ret": POLY,
                "Main.main:w": READONLY, "Main.main:a": READONLY, "Main.main:b": READONLY,
                "Main.main:h": READONLY, "H.m:this": READONLY}
        assert got == want

    def test_field_qualifiers(self, store_param):
        imm = infer(store_param)
        assert imm.of(FieldId("Y", "f")) == READONLY
        assert imm.of(FieldId("X", "g")) == READONLY


class TestOtherPrograms:
    def test_set_get(self, set_get):
        imm = infer(set_get)
        mutable = {str(v) for v, q in imm.vars.items() if q == MUTABLE}
        assert mutable == {"A.set:this", "C.main:e", "C.main:g"}
        assert {q for v, q in imm.vars.items() if str(v) not in mutable} == {READONLY}

    def test_identity_chain_is_poly(self):
        p = load("identity_chain")
        imm = infer(p)
        polys = {str(v) for v, q in imm.vars.items() if q == POLY}
        assert polys == {"I.id0:p0", "I.id1:p1", "I.id2:p2", "I.id0:ret", "I.id1:ret", "I.id2:ret"}
        assert imm.of(var(p, "Main.main:a")) == MUTABLE

    def test_identity_mutation(self):
        p = load("identity_mutation")
        assert infer(p).of(var(p, "Main.main:y")) == MUTABLE

    def test_no_writes_means_readonly(self):
        p = load("branch_merge")
        assert set(infer(p).vars.values()) == {READONLY}


class TestAdaptation:
    @pytest.mark.parametrize("ctx,q,want", [
        (MUTABLE, POLY, MUTABLE), (READONLY, POLY, READONLY), (POLY, POLY, POLY),
        (READONLY, MUTABLE, MUTABLE), (MUTABLE, READONLY, READONLY)])
    def test_table(self, ctx, q, want):
        assert adapt_ri(ctx, q) == want

    def test_sequence_folds_from_the_right(self):
        assert adapt_ri_seq([MUTABLE, POLY], POLY) == MUTABLE
        assert adapt_ri_seq([READONLY, POLY], POLY) == READONLY
        assert adapt_ri_seq([], POLY) == POLY


class TestAgainstEnumeration:
    @pytest.mark.parametrize("name", sorted(FIXTURES))
    def test_fixture(self, name):
        rep = ri_vs_oracle(load(name), bound=14)
        assert rep.disagreements == [] and rep.inconclusive == []

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_generated(self, seed):
        assert ri_vs_oracle(generate(seed).program, bound=14).disagreements == []

    def test_oracle_on_graph(self, store_param):
        g = build_ri_graph(store_param)
        imm = infer(store_param)
        assert ri_oracle(g, imm.updates)[var(store_param, "H.m:x")] == POLY
