import itertools

import numpy as np
import pytest

import gern
from gern.datasets import synth_clique_chain, synth_sbm


@pytest.fixture(scope="session")
def k4():
    return gern.build_graph(4, list(itertools.combinations(range(4), 2)))


@pytest.fixture(scope="session")
def path3():
    return gern.build_graph(3, [(0, 1), (1, 2)])


@pytest.fixture(scope="session")
def chain_bundle():
    """Three 3-cliques joined by bridges, one label per clique."""
    return synth_clique_chain(3, 3, gern.RngStream(0, 1))


@pytest.fixture(scope="session")
def sbm_bundle():
    return synth_sbm(4, 25, 0.5, 0.05, gern.RngStream(0, 5))


def random_connected_graph(n, extra, rng):
    """Random spanning tree plus `extra` chord attempts; always connected."""
    edges = []
    perm = rng.permutation(n)
    for i in range(1, n):
        j = int(rng.integers(i))
        edges.append((int(perm[i]), int(perm[j])))
    for _ in range(extra):
        u, v = int(rng.integers(n)), int(rng.integers(n))
        if u != v:
            edges.append((u, v))
    return gern.build_graph(n, edges)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
