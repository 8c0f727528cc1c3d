import numpy as np
import pytest

from biasdisen.graph import AttributedGraph, edges_to_adjacency
from biasdisen.synthetic import biased_sbm


def make_graph(edges, n, x=None, s=None, y=None, mask=None, name="t"):
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if x is None:
        x = np.arange(n, dtype=float)[:, None] / max(n - 1, 1)
    if s is None:
        s = np.arange(n) % 2
    if y is None:
        y = (np.arange(n) // 2) % 2
    if mask is None:
        mask = np.ones(n, dtype=bool)
    return AttributedGraph(edges_to_adjacency(edges[:, 0], edges[:, 1], n), x, s, y, mask, name=name)


def central_difference(f, x, h=1e-5):
    """Numerical gradient of scalar ``f`` w.r.t. array ``x`` (modified in place, restored)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        fp = f()
        x[i] = old - h
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * h)
    return g


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-8))


@pytest.fixture(scope="session")
def small_graph():
    return biased_sbm(n=80, d=6, p_in=0.15, p_out=0.03, seed=3)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
