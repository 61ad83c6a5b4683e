import warnings
from importlib import resources

import pytest

from traceblame import enumerate_semantics, parse
from traceblame.lattice import AnalysisWarning
from traceblame.specfile import build_behavior_lattice, load_spec

warnings.simplefilter("ignore", AnalysisWarning)


def example_text(name: str) -> str:
    return resources.files("traceblame.examples").joinpath(name).read_text(
        encoding="utf-8"
    )


def load_example(name: str):
    """Program + semantics + lattice for a bundled example pair."""
    program = parse(example_text(f"{name}.prog"))
    semantics = enumerate_semantics(program)
    spec = load_spec(example_text(f"{name}.spec.json"))
    lattice = build_behavior_lattice(spec, semantics)
    return program, semantics, lattice, spec


def prefix_by_texts(semantics, texts):
    """The unique valid prefix with the given event texts."""
    for prefix in semantics.valid_prefixes:
        if prefix.texts() == tuple(texts):
            return prefix
    raise AssertionError(f"no valid prefix {texts}")


def trace_by_texts(semantics, texts):
    for trace in semantics.traces:
        if trace.texts() == tuple(texts):
            return trace
    raise AssertionError(f"no complete trace {texts}")


@pytest.fixture(scope="session")
def access_control():
    return load_example("access_control")


@pytest.fixture(scope="session")
def house_fire():
    return load_example("house_fire")


@pytest.fixture(scope="session")
def negative_balance():
    return load_example("negative_balance")


@pytest.fixture(scope="session")
def leakage():
    return load_example("leakage")


@pytest.fixture(scope="session")
def diff_inputs():
    return load_example("diff_inputs")


@pytest.fixture(scope="session")
def prod_inputs():
    return load_example("prod_inputs")
