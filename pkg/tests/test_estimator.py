import pytest
from sklearn.base import clone

from reachflow import FlowAnalyzer
from reachflow.cfl import REACHES_MC, REACHES_R_ONLY, UNREACHABLE
from reachflow.fixtures import load, text


class TestParams:
    def test_defaults(self):
        assert FlowAnalyzer().get_params() == {"setting": "neg", "graph": "ri", "engine": "cfl",
                                               "mode": "multi", "context_insensitive": False}

    def test_set_params_chains(self):
        est = FlowAnalyzer().set_params(engine="types", mode="single")
        assert est.engine == "types" and est.mode == "single"

    def test_clone_is_unfitted(self):
        est = FlowAnalyzer(graph="bi").fit(load("field_leak"))
        c = clone(est)
        assert c.get_params() == est.get_params()
        assert not hasattr(c, "analysis_")

    def test_invalid_param_raises_at_fit(self):
        est = FlowAnalyzer(setting="both")
        with pytest.raises(ValueError):
            est.fit(load("field_leak"))


class TestFit:
    def test_text_or_program(self):
        a = FlowAnalyzer().fit(text("field_leak")).predict()
        b = FlowAnalyzer().fit(load("field_leak")).predict()
        assert a == b

    def test_rejects_other(self):
        with pytest.raises(TypeError):
            FlowAnalyzer().fit(42)

    def test_conflicts(self):
        est = FlowAnalyzer().fit(load("field_leak"))
        assert [str(c) for c in est.conflicts_] == ["flow from Leak.main:sim to Leak.main:sg"]


class TestPredict:
    def test_classes(self, set_get):
        est = FlowAnalyzer().fit(set_get)
        got = est.predict(["C.main:a", "A.get:this", "C.main:c"])
        assert got[0] == REACHES_MC
        assert got[1] in (REACHES_R_ONLY, UNREACHABLE)

    def test_qualifiers(self):
        est = FlowAnalyzer(engine="types").fit(load("field_leak"))
        assert est.predict(["Leak.main:sim", "Data.get:this"]) == ["neg", "poly"]

    def test_transform_rows(self):
        est = FlowAnalyzer(engine="types").fit(load("field_leak"))
        rows = est.transform()
        assert len(rows) == len(est.program_.variables())
        assert dict(rows)["Leak.main:sg"] == "neg"

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            FlowAnalyzer().fit(load("field_leak")).predict(["Nope.x:y"])

    def test_engines_agree(self):
        cfl = FlowAnalyzer().fit(load("two_slot_adapter")).transform()
        typ = FlowAnalyzer(engine="types").fit(load("two_slot_adapter")).transform()
        to_q = {REACHES_MC: "neg", REACHES_R_ONLY: "poly", UNREACHABLE: "pos"}
        assert [(n, to_q[c]) for n, c in cfl] == typ
