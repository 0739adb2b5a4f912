import numpy as np
import pytest

from hypermap.graph import Topology

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def path_graph(n):
    return Topology.from_edges([(i, i + 1) for i in range(n - 1)])


def star_graph(leaves):
    return Topology.from_edges([(0, i) for i in range(1, leaves + 1)])


def complete_graph(n):
    return Topology.from_edges([(i, j) for i in range(n) for j in range(i + 1, n)])


def random_graph(n, p, seed):
    r = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    keep = r.random(len(iu[0])) < p
    return Topology(np.arange(n), np.stack([iu[0][keep], iu[1][keep]], axis=1))
