"""Finite extended metric spaces.

Distances live in ``[0, inf]``; ``math.inf`` is an ordinary value and is
absorbing under addition.  Balls are closed: ``ball(d, x, R)`` is
``{y : d(x, y) <= R}`` everywhere in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

INF = math.inf


class MetricError(ValueError):
    """Raised when a distance table violates the metric axioms.

    ``violations`` holds every problem found, each as ``(rule, message, witness)``.
    """

    def __init__(self, violations: list[tuple[str, str, tuple]]):
        self.violations = violations
        head = violations[0][1] if violations else "invalid metric"
        more = f" (+{len(violations) - 1} more)" if len(violations) > 1 else ""
        super().__init__(head + more)


@dataclass(frozen=True)
class PointSet:
    """Ordered set of distinct string identifiers; the order fixes matrix indices."""

    ids: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        object.__setattr__(self, "ids", ids)
        index = {x: i for i, x in enumerate(ids)}
        if len(index) != len(ids):
            seen = set()
            dup = next(x for x in ids if x in seen or seen.add(x))
            raise ValueError(f"duplicate point id {dup!r}")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __contains__(self, x) -> bool:
        return x in self._index

    def index(self, x: str) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise KeyError(f"unknown point id {x!r}") from None

    def indices(self, xs: Iterable[str]) -> list[int]:
        return [self.index(x) for x in xs]

    def ordered(self, xs: Iterable[str]) -> tuple[str, ...]:
        """Return the given ids sorted into point order (duplicates removed)."""
        return tuple(self.ids[i] for i in sorted(set(self.indices(xs))))


class ExtMetric:
    """A validated extended metric on a :class:`PointSet`.

    The distance matrix is stored as a read-only float array with ``inf``
    for infinitely distant pairs.  Use :func:`validate_metric` to build one
    from a pair table.
    """

    __slots__ = ("points", "matrix")

    def __init__(self, points: PointSet, matrix: np.ndarray):
        m = np.array(matrix, dtype=float)
        if m.shape != (len(points), len(points)):
            raise ValueError(f"matrix shape {m.shape} does not match {len(points)} points")
        m.setflags(write=False)
        self.points = points
        self.matrix = m

    def __len__(self) -> int:
        return len(self.points)

    def __call__(self, x: str, y: str) -> float:
        return float(self.matrix[self.points.index(x), self.points.index(y)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtMetric):
            return NotImplemented
        return self.points == other.points and np.array_equal(self.matrix, other.matrix)

    def __repr__(self) -> str:
        return f"ExtMetric(n={len(self)})"

    def pairs(self) -> Iterable[tuple[str, str, float]]:
        """Off-diagonal pairs ``x < y`` (point order) with their distance."""
        ids = self.points.ids
        n = len(ids)
        for i in range(n):
            for j in range(i + 1, n):
                yield ids[i], ids[j], float(self.matrix[i, j])

    @classmethod
    def from_matrix(cls, points: PointSet, matrix, check: bool = True) -> "ExtMetric":
        m = np.array(matrix, dtype=float)
        if check:
            violations = metric_violations(points, m)
            if violations:
                raise MetricError(violations)
        return cls(points, m)


def metric_violations(points: PointSet, m: np.ndarray, limit: int = 50) -> list[tuple[str, str, tuple]]:
    """All axiom violations of a square distance matrix, capped at ``limit``."""
    ids = points.ids
    out: list[tuple[str, str, tuple]] = []
    n = len(ids)
    if np.isnan(m).any():
        i, j = map(int, np.argwhere(np.isnan(m))[0])
        out.append(("nan", f"distance ({ids[i]}, {ids[j]}) is NaN", (ids[i], ids[j])))
        return out
    for i in range(n):
        if m[i, i] != 0:
            out.append(("diagonal", f"d({ids[i]}, {ids[i]}) = {m[i, i]} != 0", (ids[i],)))
    for i, j in np.argwhere(np.triu(m != m.T, 1)):
        out.append(("symmetry", f"d({ids[i]}, {ids[j]}) = {m[i, j]} but d({ids[j]}, {ids[i]}) = {m[j, i]}",
                    (ids[i], ids[j])))
    off = ~np.eye(n, dtype=bool)
    for i, j in np.argwhere(np.triu((m <= 0) & off, 1)):
        rule = "zero" if m[i, j] == 0 else "negative"
        out.append((rule, f"d({ids[i]}, {ids[j]}) = {m[i, j]} must be positive", (ids[i], ids[j])))
    if out:
        return out[:limit]
    # d(x, y) <= d(x, z) + d(z, y); inf + a = inf in IEEE arithmetic
    for k in range(n):
        bad = m > m[:, k, None] + m[None, k, :]
        for i, j in np.argwhere(np.triu(bad, 1)):
            out.append(("triangle",
                        f"d({ids[i]}, {ids[j]}) = {m[i, j]} > d({ids[i]}, {ids[k]}) + d({ids[k]}, {ids[j]})"
                        f" = {m[i, k]} + {m[k, j]}",
                        (ids[i], ids[j], ids[k])))
            if len(out) >= limit:
                return out
    return out


def validate_metric(points: PointSet | Sequence[str],
                    raw: Mapping[tuple[str, str], float] | Iterable[tuple[str, str, float]]) -> ExtMetric:
    """Build an :class:`ExtMetric` from a table of pair distances.

    ``raw`` is a mapping ``(x, y) -> value`` or an iterable of ``(x, y, value)``.
    Missing pairs default to ``inf``; a pair may be listed in both orders
    only with equal values.  Raises :class:`MetricError` listing every
    violated axiom.
    """
    if not isinstance(points, PointSet):
        points = PointSet(tuple(points))
    items = raw.items() if isinstance(raw, Mapping) else raw
    n = len(points)
    m = np.full((n, n), INF)
    np.fill_diagonal(m, 0.0)
    seen: dict[tuple[int, int], float] = {}
    problems: list[tuple[str, str, tuple]] = []
    for entry in items:
        if isinstance(raw, Mapping):
            (x, y), v = entry
        else:
            x, y, v = entry
        for p in (x, y):
            if p not in points:
                problems.append(("unknown", f"unknown point id {p!r}", (p,)))
        if x not in points or y not in points:
            continue
        v = float(v)
        i, j = points.index(x), points.index(y)
        if i == j:
            if v != 0:
                problems.append(("diagonal", f"d({x}, {x}) = {v} != 0", (x,)))
            continue
        key = (min(i, j), max(i, j))
        if key in seen and seen[key] != v:
            problems.append(("symmetry", f"conflicting values {seen[key]} and {v} for pair ({x}, {y})", (x, y)))
            continue
        seen[key] = v
        m[i, j] = m[j, i] = v
    if problems:
        raise MetricError(problems)
    return ExtMetric.from_matrix(points, m)


def ball(d: ExtMetric, x: str, R: float) -> tuple[str, ...]:
    """Closed ball ``{y : d(x, y) <= R}`` in point order."""
    if R < 0:
        raise ValueError("radius must be nonnegative")
    row = d.matrix[d.points.index(x)]
    return tuple(d.points.ids[i] for i in np.flatnonzero(row <= R))


def ball_sizes(d: ExtMetric, R: float) -> np.ndarray:
    """``|ball(d, x, R)|`` for every x, in point order."""
    return np.count_nonzero(d.matrix <= R, axis=1)


@dataclass(frozen=True)
class GrowthProfile:
    """Step function ``R -> sup_x |B(x, R)|`` sampled at its breakpoints."""

    radii: tuple[float, ...]
    counts: tuple[int, ...]

    def __call__(self, R: float) -> int:
        if R < 0:
            raise ValueError("radius must be nonnegative")
        k = int(np.searchsorted(self.radii, R, side="right")) - 1
        return self.counts[k]

    def as_dict(self) -> dict[float, int]:
        return dict(zip(self.radii, self.counts))


def growth_profile(d: ExtMetric) -> GrowthProfile:
    """Largest ball size at every distinct finite distance value (0 included)."""
    values = np.unique(d.matrix[np.isfinite(d.matrix)])
    if len(values) == 0 or values[0] != 0:
        values = np.concatenate([[0.0], values])
    counts = tuple(int(ball_sizes(d, r).max()) if len(d) else 0 for r in values)
    return GrowthProfile(tuple(float(r) for r in values), counts)


def discreteness_gap(d: ExtMetric) -> float:
    """Smallest off-diagonal distance; ``inf`` for a singleton or an all-``inf`` metric."""
    n = len(d)
    if n < 2:
        return INF
    return float(d.matrix[~np.eye(n, dtype=bool)].min())


def diameter(d: ExtMetric, subset: Iterable[str] | None = None) -> float:
    idx = range(len(d)) if subset is None else d.points.indices(subset)
    idx = list(idx)
    if not idx:
        return 0.0
    return float(d.matrix[np.ix_(idx, idx)].max())


def coarse_components(d: ExtMetric) -> list[tuple[str, ...]]:
    """Classes of points at pairwise finite distance, ordered by first member.

    Finite distance is an equivalence relation for an extended metric
    (triangle inequality), so each class is read off one row.
    """
    ids = d.points.ids
    label = [-1] * len(ids)
    classes: list[tuple[str, ...]] = []
    for i in range(len(ids)):
        if label[i] >= 0:
            continue
        members = np.flatnonzero(np.isfinite(d.matrix[i]))
        for j in members:
            label[j] = len(classes)
        classes.append(tuple(ids[j] for j in members))
    return classes


@dataclass(frozen=True)
class NetData:
    """A maximal ``l``-separated subset together with a nearest-net assignment."""

    l: float
    net: tuple[str, ...]
    assign: dict[str, str]

    def p(self, x: str) -> str:
        return self.assign[x]


def greedy_net(d: ExtMetric, l: float) -> NetData:
    """Scan points in order, keeping each one farther than ``l`` from every kept point.

    Every point is then assigned the first net point (in net order) within ``l``.
    """
    if not l > 0:
        raise ValueError("net radius must be positive")
    chosen: list[int] = []
    for i in range(len(d)):
        if all(d.matrix[i, c] > l for c in chosen):
            chosen.append(i)
    ids = d.points.ids
    assign = {}
    for i in range(len(d)):
        c = next(c for c in chosen if d.matrix[i, c] <= l)
        assign[ids[i]] = ids[c]
    return NetData(float(l), tuple(ids[c] for c in chosen), assign)


@dataclass(frozen=True)
class ClusterChain:
    """Disjoint clusters of diameter at most ``2R`` with strictly growing sizes.

    Each cluster is the closed ``R``-ball around ``centers[i]``.
    """

    R: float
    centers: tuple[str, ...]
    clusters: tuple[tuple[str, ...], ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.clusters)


def greedy_clusters(d: ExtMetric, R: float) -> ClusterChain:
    """Extract a chain of disjoint ``R``-balls of strictly increasing size.

    A new center must lie outside the ``2R``-balls of all accepted centers,
    which makes the ``R``-balls pairwise disjoint.  Among the admissible
    centers whose ball beats the last accepted size, the one with the
    smallest ball is taken (ties broken by point order); this keeps the
    chain as long as possible.
    """
    if not R > 0:
        raise ValueError("cluster radius must be positive")
    sizes = ball_sizes(d, R)
    blocked = np.zeros(len(d), dtype=bool)
    centers: list[int] = []
    last = 0
    while True:
        candidates = [i for i in range(len(d)) if not blocked[i] and sizes[i] > last]
        if not candidates:
            break
        c = min(candidates, key=lambda i: (sizes[i], i))
        centers.append(c)
        last = int(sizes[c])
        blocked |= d.matrix[c] <= 2 * R
    ids = d.points.ids
    return ClusterChain(
        float(R),
        tuple(ids[c] for c in centers),
        tuple(ball(d, ids[c], R) for c in centers),
    )
