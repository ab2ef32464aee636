"""Estimator-style wrapper around the analysis pipeline."""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .analysis import Config, analyze
from .lang import Program, parse_program


class FlowAnalyzer(TransformerMixin, BaseEstimator, auto_wrap_output_keys=None):
    """Fit on one program; predict classifications for its variables.

    ``predict`` returns the reachability class (or qualifier, for the type
    engine) of each requested variable, ``transform`` the same as a list of
    ``(name, label)`` rows.
    """

    def __init__(self, setting="neg", graph="ri", engine="cfl", mode="multi",
                 context_insensitive=False):
        self.setting = setting
        self.graph = graph
        self.engine = engine
        self.mode = mode
        self.context_insensitive = context_insensitive

    def fit(self, program, y=None):
        if isinstance(program, str):
            program = parse_program(program)
        if not isinstance(program, Program):
            raise TypeError("fit expects a Program or program text")
        cfg = Config(self.setting, self.graph, self.engine, self.mode, self.context_insensitive)
        self.program_ = program
        self.analysis_ = analyze(program, cfg)
        self.conflicts_ = list(self.analysis_.conflicts)
        return self

    def _labels(self) -> dict:
        a = self.analysis_
        return a.qualifiers if self.engine == "types" else a.classes

    def _key(self, v):
        if not isinstance(v, str):
            return v
        by_name = {str(x): x for x in self.program_.variables()}
        if v not in by_name:
            raise KeyError(f"unknown variable {v!r}")
        return by_name[v]

    def predict(self, X=None) -> list:
        """Labels for ``X`` (variable ids or ``Method:name`` strings); all
        variables in sorted order when ``X`` is None."""
        labels = self._labels()
        keys = sorted(self.program_.variables()) if X is None else [self._key(v) for v in X]
        return [labels.get(k) for k in keys]

    def transform(self, X=None) -> list:
        keys = sorted(self.program_.variables()) if X is None else [self._key(v) for v in X]
        return [(str(k), lab) for k, lab in zip(keys, self.predict(keys))]
