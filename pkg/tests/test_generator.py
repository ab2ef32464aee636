from hypothesis import given, settings, strategies as st

from reachflow.generator import MAX_SITES, corpus, generate
from reachflow.interp import run
from reachflow.lang import check_well_formed


class TestGenerator:
    def test_reproducible(self):
        assert generate(17).text == generate(17).text
        assert [g.seed for g in corpus(5, 3)] == [g.seed for g in corpus(5, 3)]

    def test_corpus_seeds_differ(self):
        assert len({g.text for g in corpus(20, 0)}) == 20

    def test_bias_share(self):
        share = sum(g.biased for g in corpus(200, 0)) / 200
        assert 0.15 < share < 0.45

    def test_biased_plants_store(self):
        g = next(g for g in corpus(50, 0) if g.biased)
        assert "this.f" in g.text and "= p;" in g.text

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_well_formed_and_runs(self, seed):
        g = generate(seed)
        assert not [d for d in check_well_formed(g.program) if d.severity == "error"]
        assert g.program.sinks
        res = run(g.program, g.branch_script)
        assert not res.budget_exhausted
        assert res.error is None or "null receiver" in res.error

    def test_null_receiver_rate(self):
        # unset object fields can still be read and then used as receivers
        errs = [g for g in corpus(200, 0) if run(g.program, g.branch_script).error]
        assert len(errs) < 0.15 * 200

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_call_sites_bounded(self, seed):
        p = generate(seed).program
        assert len(p.call_sites) <= MAX_SITES + 1
