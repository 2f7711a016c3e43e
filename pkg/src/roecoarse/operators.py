"""Sparse operators on l^2 of a finite point set.

Entries are ``T[x, y] = <delta_x, T delta_y>``; a stored entry is never zero.
``propagation(T, d)`` is the largest ``d(x, y)`` over the support and
``T`` is in ``C^S`` when ``propagation(T, d) <= S``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .metric_order import MetricCert, check_membership, geodesic_closure
from .space import INF, ExtMetric, PointSet, diameter


class PropagationError(ValueError):
    """Operator has an entry beyond the allowed propagation; ``witness`` is the pair."""

    def __init__(self, message: str, witness: tuple[str, str], value: float):
        self.witness = witness
        self.value = value
        super().__init__(message)


class ConvergenceWarning(RuntimeWarning):
    pass


class SparseOp:
    """Immutable sparse complex matrix indexed by point ids."""

    __slots__ = ("points", "_entries")

    def __init__(self, points: PointSet, entries: Mapping[tuple[str, str], complex] | None = None):
        self.points = points
        clean: dict[tuple[str, str], complex] = {}
        for (x, y), v in (entries or {}).items():
            if x not in points or y not in points:
                raise KeyError(f"entry ({x}, {y}) outside the point set")
            v = complex(v)
            if v != 0:
                clean[(x, y)] = v
        # row-major in point order
        self._entries = dict(sorted(clean.items(), key=lambda kv: (points.index(kv[0][0]), points.index(kv[0][1]))))

    @property
    def entries(self) -> dict[tuple[str, str], complex]:
        return dict(self._entries)

    def items(self):
        return self._entries.items()

    def __getitem__(self, key: tuple[str, str]) -> complex:
        return self._entries.get(key, 0j)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseOp):
            return NotImplemented
        return self.points == other.points and self._entries == other._entries

    def __repr__(self) -> str:
        return f"SparseOp(n={len(self.points)}, nnz={len(self._entries)})"

    @classmethod
    def from_dense(cls, points: PointSet, A) -> "SparseOp":
        A = np.asarray(A)
        ids = points.ids
        return cls(points, {(ids[i], ids[j]): A[i, j] for i, j in zip(*np.nonzero(A))})

    @classmethod
    def identity(cls, points: PointSet, support: Iterable[str] | None = None) -> "SparseOp":
        xs = points.ids if support is None else support
        return cls(points, {(x, x): 1 for x in xs})

    def to_dense(self) -> np.ndarray:
        n = len(self.points)
        A = np.zeros((n, n), dtype=complex)
        idx = self.points.index
        for (x, y), v in self._entries.items():
            A[idx(x), idx(y)] = v
        return A

    def adjoint(self) -> "SparseOp":
        return SparseOp(self.points, {(y, x): v.conjugate() for (x, y), v in self._entries.items()})

    def _check(self, other: "SparseOp") -> None:
        if self.points != other.points:
            raise ValueError("operators act on different point sets")

    def __add__(self, other: "SparseOp") -> "SparseOp":
        self._check(other)
        out = dict(self._entries)
        for k, v in other.items():
            out[k] = out.get(k, 0j) + v
        return SparseOp(self.points, out)

    def __sub__(self, other: "SparseOp") -> "SparseOp":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "SparseOp":
        return SparseOp(self.points, {k: c * v for k, v in self._entries.items()})

    def __matmul__(self, other: "SparseOp") -> "SparseOp":
        self._check(other)
        rows: dict[str, list[tuple[str, complex]]] = {}
        for (y, z), v in other.items():
            rows.setdefault(y, []).append((z, v))
        out: dict[tuple[str, str], complex] = {}
        for (x, y), u in self._entries.items():
            for z, v in rows.get(y, ()):
                out[(x, z)] = out.get((x, z), 0j) + u * v
        return SparseOp(self.points, out)

    def max_abs(self) -> float:
        return max((abs(v) for v in self._entries.values()), default=0.0)


def _same_points(T: SparseOp, d: ExtMetric) -> None:
    if T.points != d.points:
        raise ValueError("operator and metric are defined on different point sets")


def propagation(T: SparseOp, d: ExtMetric) -> float:
    """Largest distance between the row and column of a nonzero entry (0 for none)."""
    return propagation_witness(T, d)[0]


def propagation_witness(T: SparseOp, d: ExtMetric) -> tuple[float, tuple[str, str] | None]:
    _same_points(T, d)
    best, where = 0.0, None
    for x, y in T._entries:
        v = d(x, y)
        if v > best:
            best, where = v, (x, y)
            if v == INF:
                break
    return best, where


def band_sparsity(T: SparseOp) -> int:
    """Largest number of nonzero entries in any row or column."""
    rows: dict[str, int] = {}
    cols: dict[str, int] = {}
    for x, y in T._entries:
        rows[x] = rows.get(x, 0) + 1
        cols[y] = cols.get(y, 0) + 1
    return max(max(rows.values(), default=0), max(cols.values(), default=0))


def support_metric(T: SparseOp, base: ExtMetric, S: float) -> ExtMetric:
    """Path metric of the graph joining ``x, y`` by a unit edge when ``T[x, y]`` or ``T[y, x]`` is nonzero.

    ``T`` then has propagation at most 1 in the new metric, and the new
    metric dominates ``base / S`` provided ``propagation(T, base) <= S``.
    """
    p, where = propagation_witness(T, base)
    if p > S:
        raise PropagationError(f"propagation {p} at {where} exceeds {S}", where, p)
    n = len(T.points)
    L = np.full((n, n), INF)
    idx = T.points.index
    for x, y in T._entries:
        if x != y:
            i, j = idx(x), idx(y)
            L[i, j] = L[j, i] = 1.0
    return ExtMetric(T.points, geodesic_closure(L))


@dataclass(frozen=True)
class MembershipCert:
    k: int
    S: float
    d: ExtMetric
    cert: MetricCert


def certify_membership(T: SparseOp, base: ExtMetric) -> MembershipCert:
    """Minimal band sparsity and propagation of ``T`` plus a metric in which it has propagation 1.

    Raises :class:`PropagationError` when some entry sits on an infinitely distant pair.
    """
    S, where = propagation_witness(T, base)
    if S == INF:
        raise PropagationError(f"entry at {where} joins points at infinite distance", where, S)
    d = support_metric(T, base, S)
    return MembershipCert(band_sparsity(T), S, d, check_membership(base, d))


# -- partial-isometry decomposition -------------------------------------------------


@dataclass(frozen=True)
class Term:
    """Diagonal ``f`` (indexed by rows) times a partial permutation ``v`` (column -> row)."""

    f: dict[str, complex]
    v: dict[str, str]

    def to_op(self, points: PointSet) -> SparseOp:
        return SparseOp(points, {(x, y): self.f[x] for y, x in self.v.items()})


@dataclass(frozen=True)
class Decomposition:
    points: PointSet
    terms: tuple[Term, ...]

    def __len__(self) -> int:
        return len(self.terms)

    def reconstruct(self) -> SparseOp:
        out: dict[tuple[str, str], complex] = {}
        for t in self.terms:
            for y, x in t.v.items():
                if (x, y) in out:
                    raise ValueError(f"entry ({x}, {y}) covered twice")
                out[(x, y)] = t.f[x]
        return SparseOp(self.points, out)

    def coefficient_sum(self) -> float:
        """``sum_i max |f_i|``."""
        return sum(max((abs(v) for v in t.f.values()), default=0.0) for t in self.terms)


def _perfect_matching(adj: list[dict[int, int]], n: int) -> list[int]:
    """Perfect matching of a regular bipartite multigraph via augmenting paths.

    ``adj[u]`` maps right vertices to edge multiplicities.  A greedy pass
    seeds the matching; remaining rows are matched along alternating paths
    found by an iterative depth-first search.  Returns ``match[u] = v``.
    """
    match_l = [-1] * n
    match_r = [-1] * n
    for u in range(n):
        for v in adj[u]:
            if match_r[v] < 0:
                match_l[u], match_r[v] = v, u
                break
    for root in range(n):
        if match_l[root] >= 0:
            continue
        seen = [False] * n
        parent = {}  # right vertex -> left vertex that reached it
        stack = [root]
        end = -1
        while stack and end < 0:
            u = stack.pop()
            for v in adj[u]:
                if seen[v]:
                    continue
                seen[v] = True
                parent[v] = u
                if match_r[v] < 0:
                    end = v
                    break
                stack.append(match_r[v])
        if end < 0:
            raise AssertionError("regular bipartite multigraph without a perfect matching")
        v = end
        while v >= 0:
            u = parent[v]
            prev = match_l[u]
            match_l[u], match_r[v] = v, u
            v = prev
    return match_l


def edge_coloring(n: int, edges: Sequence[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Split the edges of a bipartite graph (rows x cols, both ``range(n)``) into Δ matchings.

    The graph is padded with dummy edges to a Δ-regular multigraph; each
    round removes a perfect matching, which by Hall's theorem exists.  Real
    edges are preferred over parallel dummies.
    """
    if not edges:
        return []
    deg_r = [0] * n
    deg_c = [0] * n
    for u, v in edges:
        deg_r[u] += 1
        deg_c[v] += 1
    delta = max(max(deg_r), max(deg_c))
    real: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        real[u].add(v)
    dummy: list[dict[int, int]] = [dict() for _ in range(n)]
    v = 0
    for u in range(n):
        while deg_r[u] < delta:
            while deg_c[v] == delta:
                v += 1
            k = min(delta - deg_r[u], delta - deg_c[v])
            dummy[u][v] = dummy[u].get(v, 0) + k
            deg_r[u] += k
            deg_c[v] += k
    colors: list[list[tuple[int, int]]] = []
    for _ in range(delta):
        adj = []
        for u in range(n):
            a = {w: 1 for w in sorted(real[u])}
            for w, k in sorted(dummy[u].items()):
                a[w] = a.get(w, 0) + k
            adj.append(dict(sorted(a.items())))
        match = _perfect_matching(adj, n)
        color = []
        for u, w in enumerate(match):
            if w in real[u]:
                real[u].discard(w)
                color.append((u, w))
            else:
                dummy[u][w] -= 1
                if dummy[u][w] == 0:
                    del dummy[u][w]
        colors.append(color)
    return colors


def decompose_banded(T: SparseOp) -> Decomposition:
    """Write ``T`` as a sum of ``band_sparsity(T)`` terms ``f_i v_i``.

    Each ``v_i`` is a partial permutation (one matching of the support
    graph) and ``f_i`` copies the matched entries, so the sum is exact.
    """
    ids = T.points.ids
    idx = T.points.index
    edges = [(idx(x), idx(y)) for x, y in T._entries]
    terms = []
    for color in edge_coloring(len(ids), edges):
        f, v = {}, {}
        for i, j in sorted(color):
            x, y = ids[i], ids[j]
            f[x] = T[x, y]
            v[y] = x
        terms.append(Term(f, v))
    return Decomposition(T.points, tuple(terms))


# -- norms --------------------------------------------------------------------------


@dataclass(frozen=True)
class NormEstimate:
    value: float
    converged: bool
    iterations: int


def _block_power(A: np.ndarray, X: np.ndarray, tol: float, max_iter: int) -> NormEstimate:
    """Subspace power iteration on ``A* A`` with a Rayleigh-Ritz step.

    Stops once the top Ritz pair has eigen-residual at most ``tol`` times its
    value.  Using a block rather than one vector keeps clustered top singular
    values from stalling the iteration.
    """
    X, _ = np.linalg.qr(X)
    theta = 0.0
    for it in range(1, max_iter + 1):
        Y = A.conj().T @ (A @ X)
        H = X.conj().T @ Y
        w, V = np.linalg.eigh((H + H.conj().T) / 2)
        theta = float(w[-1])
        if theta <= 0:
            return NormEstimate(0.0, True, it)
        r = Y @ V[:, -1] - theta * (X @ V[:, -1])
        if np.linalg.norm(r) <= tol * theta:
            return NormEstimate(math.sqrt(theta), True, it)
        X, _ = np.linalg.qr(Y)
    return NormEstimate(math.sqrt(max(theta, 0.0)), False, max_iter)


def power_norm(T: SparseOp, tol: float = 1e-10, max_iter: int = 10_000, seed: int = 0,
               block: int = 4) -> NormEstimate:
    """Largest singular value by power iteration on ``T* T``.

    Operators with at most one entry per row and column are handled
    exactly (their norm is the largest entry modulus).  Otherwise the
    iteration runs on a block whose first column is the normalized all-ones
    vector and whose other columns are seeded random vectors; the random
    columns cover the case where all-ones is orthogonal to the top singular
    vector.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if len(T) == 0:
        return NormEstimate(0.0, True, 0)
    if band_sparsity(T) <= 1:
        return NormEstimate(T.max_abs(), True, 0)
    A = T.to_dense()
    n = A.shape[0]
    b = max(1, min(block, n))
    rng = np.random.default_rng(seed)
    X = np.empty((n, b), dtype=complex)
    X[:, 0] = 1.0
    if b > 1:
        X[:, 1:] = rng.standard_normal((n, b - 1))
    return _block_power(A, X, tol, max_iter)


def op_norm(T: SparseOp, tol: float = 1e-10, max_iter: int = 10_000, seed: int = 0) -> float:
    est = power_norm(T, tol, max_iter, seed)
    if not est.converged:
        warnings.warn(f"power iteration hit {max_iter} iterations; best estimate {est.value}",
                      ConvergenceWarning, stacklevel=2)
    return est.value


# -- finite groups and block permutation representations ---------------------------


@dataclass(frozen=True)
class FiniteGroup:
    """Element names with a multiplication table ``table[i][j] = index of e_i * e_j``."""

    elements: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]

    def index(self, g: str) -> int:
        try:
            return self.elements.index(g)
        except ValueError:
            raise KeyError(f"unknown group element {g!r}") from None

    def mul(self, g: str, h: str) -> str:
        return self.elements[self.table[self.index(g)][self.index(h)]]

    @property
    def identity(self) -> str:
        for i, g in enumerate(self.elements):
            if all(self.table[i][j] == j for j in range(len(self.elements))):
                return g
        raise ValueError("multiplication table has no identity")


def _perm_name(p: tuple[int, ...]) -> str:
    return "".join(str(i) for i in p) if len(p) <= 10 else ",".join(map(str, p))


def symmetric_group(n: int) -> FiniteGroup:
    """S_n on ``{0..n-1}``; elements are one-line images, ``(g*h)(i) = g(h(i))``."""
    from itertools import permutations

    perms = list(permutations(range(n)))
    where = {p: i for i, p in enumerate(perms)}
    table = tuple(tuple(where[tuple(g[h[i]] for i in range(n))] for h in perms) for g in perms)
    return FiniteGroup(tuple(_perm_name(p) for p in perms), table)


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup(tuple(str(i) for i in range(n)),
                       tuple(tuple((i + j) % n for j in range(n)) for i in range(n)))


def regular_action(group: FiniteGroup) -> dict[str, tuple[int, ...]]:
    """Left multiplication: element ``g`` sends position ``h`` to position ``g*h``."""
    return {g: tuple(group.table[i]) for i, g in enumerate(group.elements)}


def coset_action(group: FiniteGroup, subgroup: Sequence[str]) -> dict[str, tuple[int, ...]]:
    """Left action on the left cosets ``gH``, cosets numbered by first appearance."""
    H = [group.index(h) for h in subgroup]
    cosets: list[frozenset] = []
    for i in range(len(group.elements)):
        c = frozenset(group.table[i][h] for h in H)
        if c not in cosets:
            cosets.append(c)
    which = {i: k for k, c in enumerate(cosets) for i in c}
    out = {}
    for i, g in enumerate(group.elements):
        out[g] = tuple(which[group.table[i][min(c)]] for c in cosets)
    return out


def natural_action(group: FiniteGroup) -> dict[str, tuple[int, ...]]:
    """Symmetric-group elements acting on ``{0..n-1}`` by their one-line images."""
    return {g: tuple(int(c) for c in (g.split(",") if "," in g else g)) for g in group.elements}


class HomomorphismError(ValueError):
    pass


@dataclass(frozen=True)
class BlockRep:
    """Disjoint blocks of points, each carrying a permutation action of one group.

    ``actions[n][g][i]`` is the position that ``g`` sends position ``i`` of
    block ``n`` to.
    """

    points: PointSet
    blocks: tuple[tuple[str, ...], ...]
    group: FiniteGroup
    actions: tuple[dict[str, tuple[int, ...]], ...]

    def __post_init__(self):
        seen: set[str] = set()
        for b in self.blocks:
            for x in b:
                if x not in self.points:
                    raise KeyError(f"unknown point id {x!r}")
                if x in seen:
                    raise ValueError(f"point {x!r} lies in two blocks")
                seen.add(x)
        if len(self.actions) != len(self.blocks):
            raise ValueError("one action per block required")
        G = self.group.elements
        for n, (b, act) in enumerate(zip(self.blocks, self.actions)):
            for g in G:
                p = act.get(g)
                if p is None or sorted(p) != list(range(len(b))):
                    raise HomomorphismError(f"block {n}: {g!r} does not act by a permutation of {len(b)} points")
            for g in G:
                for h in G:
                    gh = self.group.mul(g, h)
                    if any(act[gh][i] != act[g][act[h][i]] for i in range(len(b))):
                        raise HomomorphismError(f"block {n}: action of {g}*{h} differs from composition")


def block_embedding(rep: BlockRep, g: str) -> SparseOp:
    """0/1 operator permuting each block by ``g`` and fixing points outside the blocks."""
    rep.group.index(g)
    entries: dict[tuple[str, str], int] = {}
    covered: set[str] = set()
    for b, act in zip(rep.blocks, rep.actions):
        p = act[g]
        for i, x in enumerate(b):
            entries[(b[p[i]], x)] = 1
            covered.add(x)
    for x in rep.points.ids:
        if x not in covered:
            entries[(x, x)] = 1
    return SparseOp(rep.points, entries)


def max_block_diameter(rep: BlockRep, d: ExtMetric) -> float:
    return max((diameter(d, b) for b in rep.blocks), default=0.0)
