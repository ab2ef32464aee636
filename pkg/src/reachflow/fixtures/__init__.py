"""Small handwritten programs shipped with the package."""
from __future__ import annotations

from importlib import resources

from ..lang import Program, parse_program

# name -> (parser options, branch script)
FIXTURES = {
    "set_get_two_objects": ({}, ()),
    "field_leak": ({}, ()),
    "write_through_param": ({}, ()),
    "branch_merge": ({}, (True,)),
    "alias_then_get": ({}, ()),
    "two_slot_adapter": ({"allow_multi_param": True}, ()),
    "merged_fields": ({}, ()),
    "identity_mutation": ({}, ()),
    "identity_chain": ({}, ()),
    "identity_contexts": ({}, ()),
    "shared_receiver": ({}, ()),
}


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.fcfl").read_text(encoding="utf-8")


def load(name: str) -> Program:
    opts, _ = FIXTURES[name]
    return parse_program(text(name), **opts)


def load_all() -> list:
    """(name, program, branch script) for every fixture."""
    return [(n, load(n), FIXTURES[n][1]) for n in FIXTURES]
