import pytest

from reachflow.fixtures import load


def var(p, name):
    """Look up a variable by its ``Class.method:name`` spelling."""
    for v in p.variables():
        if str(v) == name:
            return v
    raise KeyError(name)


def names(vs):
    return {str(v) for v in vs}


@pytest.fixture
def set_get():
    return load("set_get_two_objects")


@pytest.fixture
def store_param():
    return load("write_through_param")


@pytest.fixture
def adapter_prog():
    return load("two_slot_adapter")
