"""The directed set of bounded-geometry metrics dominating a base metric.

A metric ``d`` belongs to the set over ``d0`` when its discreteness gap is
at least 1 (D1), ``d >= d0 / C`` for some ``C`` with ``d0 = inf`` forcing
``d = inf`` (D2), and it has bounded geometry (D3).  At finite scale (D3)
is always true, so the certificate records the growth profile instead.
The order is reverse pointwise: ``d1 <= d2`` in the directed set iff
``d2(x, y) <= d1(x, y)`` everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .space import (
    INF,
    ExtMetric,
    GrowthProfile,
    ball_sizes,
    discreteness_gap,
    growth_profile,
)

MAX_GEODESIC_POINTS = 2048


class MembershipError(ValueError):
    """Candidate metric fails (D1) or (D2); ``rule`` and ``witness`` name the pair."""

    def __init__(self, rule: str, message: str, witness: tuple[str, str]):
        self.rule = rule
        self.witness = witness
        super().__init__(message)


@dataclass(frozen=True)
class MetricCert:
    base: ExtMetric
    candidate: ExtMetric
    gap: float
    C: float
    profile: GrowthProfile


@dataclass(frozen=True)
class EPair:
    """A subset ``Y`` paired with a metric on the whole point set."""

    Y: frozenset
    d: ExtMetric


def _same_points(a: ExtMetric, b: ExtMetric) -> None:
    if a.points != b.points:
        raise ValueError("metrics are defined on different point sets")


def _ratios(base: ExtMetric, d: ExtMetric) -> np.ndarray:
    """``d0 / d`` on off-diagonal pairs with finite ``d0``; 0 where ``d = inf``, nan elsewhere."""
    n = len(d)
    off = ~np.eye(n, dtype=bool)
    d0 = base.matrix
    with np.errstate(divide="ignore", invalid="ignore"):
        r = d0 / d.matrix
    r = np.where(off & np.isfinite(d0), r, np.nan)
    return r


def domination_constant(base: ExtMetric, d: ExtMetric) -> float:
    """Smallest ``C`` with ``d >= d0 / C`` on every pair with finite ``d0``.

    Returns 0.0 when every such ratio vanishes (then any positive ``C`` works).
    Pairs with ``d0 = inf`` are ignored here; see :func:`check_membership`.
    """
    _same_points(base, d)
    r = _ratios(base, d)
    finite = r[~np.isnan(r)]
    return float(finite.max()) if finite.size else 0.0


def dominates(base: ExtMetric, d: ExtMetric, C: float) -> bool:
    """Whether ``d(x, y) >= d0(x, y) / C`` for every pair, with ``inf`` handled exactly.

    The comparison is made on the ratio ``d0 / d`` so that no product is rounded.
    """
    _same_points(base, d)
    if np.any(np.isinf(base.matrix) & np.isfinite(d.matrix)):
        return False
    r = _ratios(base, d)
    finite = r[~np.isnan(r)]
    return bool(np.all(finite <= C))


def check_membership(base: ExtMetric, d: ExtMetric) -> MetricCert:
    """Certify that ``d`` lies in the directed set over ``base``.

    Raises :class:`MembershipError` on a (D1) gap below 1 or a pair with
    ``base = inf`` but finite ``d``.  The reported ``C`` is minimal.
    """
    _same_points(base, d)
    ids = d.points.ids
    gap = discreteness_gap(d)
    if gap < 1:
        i, j = np.argwhere(np.triu(d.matrix < 1, 1))[0]
        raise MembershipError("D1", f"d({ids[i]}, {ids[j]}) = {d.matrix[i, j]} < 1", (ids[i], ids[j]))
    bad = np.argwhere(np.triu(np.isinf(base.matrix) & np.isfinite(d.matrix), 1))
    if len(bad):
        i, j = bad[0]
        raise MembershipError(
            "D2", f"d0({ids[i]}, {ids[j]}) = inf but d({ids[i]}, {ids[j]}) = {d.matrix[i, j]}", (ids[i], ids[j])
        )
    return MetricCert(base, d, gap, domination_constant(base, d), growth_profile(d))


def precedes(d1: ExtMetric, d2: ExtMetric) -> bool:
    """``d1 <= d2`` in the directed set, i.e. ``d2 <= d1`` pointwise."""
    _same_points(d1, d2)
    return bool(np.all(d2.matrix <= d1.matrix))


def geodesic_closure(lengths: np.ndarray, max_points: int = MAX_GEODESIC_POINTS) -> np.ndarray:
    """All-pairs shortest path lengths of a complete graph with ``inf`` for absent edges.

    Floyd-Warshall over a dense matrix; the diagonal is forced to 0.
    """
    L = np.array(lengths, dtype=float)
    n = L.shape[0]
    if n > max_points:
        raise ValueError(f"{n} points exceeds the geodesic limit of {max_points}")
    np.fill_diagonal(L, 0.0)
    for k in range(n):
        np.minimum(L, L[:, k, None] + L[None, k, :], out=L)
    return L


def join_metric(base: ExtMetric, d1: ExtMetric, d2: ExtMetric,
                max_points: int = MAX_GEODESIC_POINTS) -> ExtMetric:
    """Common upper bound of ``d1`` and ``d2``: the path metric of edge lengths ``min(d1, d2)``."""
    check_membership(base, d1)
    check_membership(base, d2)
    lengths = np.minimum(d1.matrix, d2.matrix)
    return ExtMetric(d1.points, geodesic_closure(lengths, max_points))


def join_growth_bound(d1: ExtMetric, d2: ExtMetric, R: int) -> int:
    """Upper bound ``(2M)^(R+1)`` on ball sizes of the join at integer radius ``R``.

    ``M`` is the largest ``d1``/``d2`` ball of radius ``R + 1``: a path of
    total length at most ``R + 1`` has at most ``R + 1`` unit-or-longer steps.
    """
    M = max(int(ball_sizes(d1, R + 1).max()), int(ball_sizes(d2, R + 1).max()))
    return (2 * M) ** (R + 1)


def restriction_metric(base: ExtMetric, Y: Iterable[str]) -> ExtMetric:
    """``base`` on ``Y x Y``; every pair touching a point outside ``Y`` is at ``inf``."""
    idx = base.points.indices(Y)
    keep = np.zeros(len(base), dtype=bool)
    keep[idx] = True
    m = np.where(keep[:, None] & keep[None, :], base.matrix, INF)
    np.fill_diagonal(m, 0.0)
    return ExtMetric(base.points, m)


def epair_precedes(p1: EPair, p2: EPair) -> bool:
    return p1.Y <= p2.Y and precedes(p1.d, p2.d)
