from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from roecoarse import ExtMetric, PointSet, SparseOp, validate_metric

FIXTURES = Path(__file__).parent / "fixtures"


def pts(n: int, prefix: str = "x") -> PointSet:
    return PointSet(tuple(f"{prefix}{i}" for i in range(n)))


def line_metric(n: int = 6) -> ExtMetric:
    P = PointSet(tuple(str(i) for i in range(n)))
    return validate_metric(P, {(str(i), str(j)): abs(i - j) for i in range(n) for j in range(i + 1, n)})


def clique_union(sizes, prefix="k") -> ExtMetric:
    ids, tab = [], {}
    for n in sizes:
        block = [f"{prefix}{n}_{i}" for i in range(n)]
        ids += block
        for i in range(n):
            for j in range(i + 1, n):
                tab[(block[i], block[j])] = 1
    return validate_metric(ids, tab)


def dijkstra_closure(W: np.ndarray) -> np.ndarray:
    """Shortest paths with ``inf`` meaning no edge (scipy Dijkstra, independent of the package)."""
    n = W.shape[0]
    G = np.where(np.isfinite(W), W, 0.0)
    np.fill_diagonal(G, 0.0)
    if n == 0:
        return G
    return shortest_path(G, method="D", directed=False)


def random_graph_metric(rng: np.random.Generator, n: int, p_edge: float | None = None,
                        max_w: int = 4, points: PointSet | None = None) -> ExtMetric:
    """Integer path metric of a random graph; disconnected parts are at ``inf``."""
    points = points or pts(n)
    p_edge = rng.uniform(0.05, 0.6) if p_edge is None else p_edge
    W = np.full((n, n), math.inf)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                W[i, j] = W[j, i] = rng.integers(1, max_w + 1)
    return ExtMetric(points, dijkstra_closure(W))


def random_dominated(rng: np.random.Generator, base: ExtMetric, keep: float | None = None) -> ExtMetric:
    """A metric in the directed set over ``base``: path metric of lengths >= max(1, d0 / c)."""
    n = len(base)
    c = int(rng.integers(1, 4))
    keep = rng.uniform(0.2, 1.0) if keep is None else keep
    W = np.full((n, n), math.inf)
    for i in range(n):
        for j in range(i + 1, n):
            d0 = base.matrix[i, j]
            if math.isfinite(d0) and rng.random() < keep:
                W[i, j] = W[j, i] = max(1, math.ceil(d0 / c)) + int(rng.integers(0, 3))
    return ExtMetric(base.points, dijkstra_closure(W))


def random_banded(rng: np.random.Generator, points: PointSet, k: int, allowed: np.ndarray | None = None,
                  integer: bool = False) -> SparseOp:
    """Sum of ``k`` random partial permutations restricted to ``allowed`` pairs."""
    n = len(points)
    A = np.zeros((n, n), dtype=complex)
    for _ in range(k):
        perm = rng.permutation(n)
        for i in range(n):
            j = perm[i]
            if (allowed is None or allowed[i, j]) and rng.random() < 0.8 and A[i, j] == 0:
                if integer:
                    A[i, j] = complex(int(rng.integers(-3, 4)) or 1, int(rng.integers(-2, 3)))
                else:
                    A[i, j] = complex(rng.normal(), rng.normal())
    return SparseOp.from_dense(points, A)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def line6():
    return line_metric(6)


@pytest.fixture
def abc_metrics():
    P = PointSet(("a", "b", "c"))
    d0 = validate_metric(P, {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1})
    d1 = validate_metric(P, {("a", "b"): 1, ("b", "c"): 5, ("a", "c"): 5})
    d2 = validate_metric(P, {("a", "b"): 5, ("b", "c"): 1, ("a", "c"): 5})
    return d0, d1, d2


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
