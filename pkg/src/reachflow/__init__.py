"""Context-sensitive taint reachability for a small object language."""
from .analysis import Analysis, Config, analyze
from .cfl import run_cfl, run_cfl_positive
from .graphs import FlowEdge, FlowGraph, build_gbi, build_gri, emit_dot
from .immutability import infer as infer_immutability
from .interp import run
from .lang import Program, load_program, parse_program, print_program
from .qualifiers import infer_types

__all__ = ["Analysis", "Config", "FlowAnalyzer", "FlowEdge", "FlowGraph", "Program", "analyze",
           "build_gbi", "build_gri", "emit_dot", "infer_immutability", "infer_types",
           "load_program", "parse_program", "print_program", "run", "run_cfl",
           "run_cfl_positive"]


def __getattr__(name):
    # scikit-learn is only imported when the estimator is used
    if name == "FlowAnalyzer":
        from .estimator import FlowAnalyzer
        return FlowAnalyzer
    raise AttributeError(name)
