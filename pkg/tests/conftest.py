import itertools

import networkx as nx
import pytest

from dbfabric.fabric import build_debruijn_fabric
from dbfabric.labels import Label


def label(text, d=2):
    return Label.parse(text, d, len(text))


def debruijn_digraph(d, m, reverse=False):
    """Independent construction from digit strings, no library shift helpers."""
    g = nx.DiGraph()
    words = ["".join(map(str, w)) for w in itertools.product(range(d), repeat=m)]
    g.add_nodes_from(words)
    for w in words:
        for x in range(d):
            g.add_edge(w, str(x) + w[:-1] if reverse else w[1:] + str(x))
    return g


@pytest.fixture(scope="session")
def b23():
    return build_debruijn_fabric(2, 3, hosts_per_tor=2)


@pytest.fixture(scope="session")
def b23_bfs():
    g = debruijn_digraph(2, 3)
    return dict(nx.all_pairs_shortest_path_length(g))


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}")
