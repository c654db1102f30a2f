import numpy as np
import pytest

from quantree.graph import Edge, EdgeData, TreeGraph
from quantree.io import example1_spec, example2_spec, graph_from_dict
from quantree.local import SolverConfig
from quantree.pipeline import run_forward, run_inverse
from quantree.potentials import preset


def star(lengths, potentials, center="c"):
    """Star graph with leaves l1..lm; leaf edges have x = 0 at the leaf."""
    leaves = tuple(f"l{k}" for k in range(1, len(lengths) + 1))
    edges = tuple(Edge(k, leaves[k], center, float(L)) for k, L in enumerate(lengths))
    g = TreeGraph((center,) + leaves, edges, leaves)
    data = {e.index: EdgeData(e.index, e.length, q, e.a) for e, q in zip(edges, potentials)}
    return g, data


def zero_star(lengths):
    return star(lengths, [preset("zero")] * len(lengths))


@pytest.fixture(scope="session")
def example1():
    return graph_from_dict(example1_spec(), require_potentials=True)


@pytest.fixture(scope="session")
def example2():
    return graph_from_dict(example2_spec(), require_potentials=True)


@pytest.fixture(scope="session")
def example1_samples(example1):
    g, ed = example1
    return run_forward(g, ed, K=180, seed=1)


@pytest.fixture(scope="session")
def example2_samples(example2):
    g, ed = example2
    return run_forward(g, ed, K=180, seed=1)


@pytest.fixture(scope="session")
def example1_result(example1, example1_samples):
    return run_inverse(example1[0], example1_samples, SolverConfig())


@pytest.fixture(scope="session")
def example2_result(example2, example2_samples):
    return run_inverse(example2[0], example2_samples, SolverConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def report_criterion(name: str, ok: bool, detail: str) -> str:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
