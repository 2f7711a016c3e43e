"""Coarse maps between finite extended metric spaces and the fiber-counting bijection.

For a map ``f`` and a subset ``A``, the bijection
``(x, j) -> (f(x), pi(x) + j N(f(x)))`` identifies ``A x {0, 1, ...}`` with
``f(A) x {0, 1, ...}``; ``N(y)`` counts the fiber of ``y`` in ``A`` and
``pi`` numbers each fiber from 0.  Conjugating by it relabels operators on
``A x window`` as operators on ``f(A) x window``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .operators import SparseOp
from .space import INF, ExtMetric, PointSet, ball

WINDOW_SEP = "@"


@dataclass(frozen=True)
class CoarseMapData:
    """``f: X -> Y`` with an optional ``g: Y -> X`` and closeness bounds.

    ``C`` bounds ``d_X(g f x, x)``; ``C_Y`` (optional) bounds ``d_Y(f g y, y)``.
    """

    X: PointSet
    Y: PointSet
    f: Mapping[str, str]
    g: Mapping[str, str] | None = None
    C: float | None = None
    C_Y: float | None = None

    def __post_init__(self):
        for x, y in self.f.items():
            if x not in self.X or y not in self.Y:
                raise KeyError(f"f: {x} -> {y} leaves the declared point sets")
        missing = [x for x in self.X.ids if x not in self.f]
        if missing:
            raise ValueError(f"f is not defined at {missing}")
        if self.g is not None:
            for y, x in self.g.items():
                if y not in self.Y or x not in self.X:
                    raise KeyError(f"g: {y} -> {x} leaves the declared point sets")
            missing = [y for y in self.Y.ids if y not in self.g]
            if missing:
                raise ValueError(f"g is not defined at {missing}")


@dataclass(frozen=True)
class ExpansionProfile:
    """``S(R) = max d_Y(f x, f x')`` over ``d_X(x, x') <= R`` at each finite breakpoint."""

    radii: tuple[float, ...]
    bounds: tuple[float, ...]

    @property
    def infinite_at(self) -> tuple[float, ...]:
        return tuple(r for r, s in zip(self.radii, self.bounds) if s == INF)

    def __call__(self, R: float) -> float:
        k = int(np.searchsorted(self.radii, R, side="right")) - 1
        return self.bounds[k] if k >= 0 else 0.0


def _pull_back(f: Mapping[str, str], X: PointSet, dY: ExtMetric) -> np.ndarray:
    """``d_Y(f x, f x')`` as a matrix over X."""
    img = dY.points.indices(f[x] for x in X.ids)
    return dY.matrix[np.ix_(img, img)]


def expansion_profile(f: Mapping[str, str] | CoarseMapData, dX: ExtMetric, dY: ExtMetric) -> ExpansionProfile:
    fmap = f.f if isinstance(f, CoarseMapData) else f
    pulled = _pull_back(fmap, dX.points, dY)
    radii = np.unique(np.concatenate([[0.0], dX.matrix[np.isfinite(dX.matrix)]]))
    bounds = tuple(float(pulled[dX.matrix <= r].max()) for r in radii)
    return ExpansionProfile(tuple(float(r) for r in radii), bounds)


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    witnesses: list = field(default_factory=list)
    data: dict = field(default_factory=dict)


def check_coarse_equivalence(data: CoarseMapData, dX: ExtMetric, dY: ExtMetric,
                             surjective: bool = False) -> CheckReport:
    """Both maps coarse (finite expansion at every finite scale) and ``g f`` within ``C`` of the identity."""
    if data.g is None or data.C is None:
        raise ValueError("a coarse equivalence needs g and C")
    w = []
    pf = expansion_profile(data.f, dX, dY)
    pg = expansion_profile(data.g, dY, dX)
    for name, prof in (("f", pf), ("g", pg)):
        for r in prof.infinite_at:
            w.append(("coarse", f"{name} sends a pair at distance <= {r} to infinitely distant points",
                      {"map": name, "R": r}))
    for x in dX.points.ids:
        back = dX(data.g[data.f[x]], x)
        if back > data.C:
            w.append(("closeness", f"d_X(g f {x}, {x}) = {back} > C = {data.C}", {"x": x, "distance": back}))
    if data.C_Y is not None:
        for y in dY.points.ids:
            back = dY(data.f[data.g[y]], y)
            if back > data.C_Y:
                w.append(("closeness", f"d_Y(f g {y}, {y}) = {back} > C_Y = {data.C_Y}",
                          {"y": y, "distance": back}))
    if surjective:
        image = set(data.f.values())
        for y in dY.points.ids:
            if y not in image:
                w.append(("surjective", f"{y} is not in the image of f", {"y": y}))
    info = {
        "f_profile": dict(zip(pf.radii, pf.bounds)),
        "g_profile": dict(zip(pg.radii, pg.bounds)),
    }
    return CheckReport(not w, w, info)


def restrict_to_image(data: CoarseMapData, dY: ExtMetric) -> tuple[CoarseMapData, ExtMetric, tuple[str, ...]]:
    """Replace ``Y`` by ``f(X)``; returns the new data, metric and the dropped points.

    ``g`` is kept where it is defined on the image.
    """
    image = dY.points.ordered(set(data.f.values()))
    dropped = tuple(y for y in dY.points.ids if y not in set(image))
    Yn = PointSet(image)
    idx = dY.points.indices(image)
    dYn = ExtMetric(Yn, dY.matrix[np.ix_(idx, idx)])
    g = {y: data.g[y] for y in image} if data.g is not None else None
    return CoarseMapData(data.X, Yn, dict(data.f), g, data.C, data.C_Y), dYn, dropped


def image_bg_bound(data: CoarseMapData, A: Iterable[str], dX: ExtMetric, dY: ExtMetric,
                   R: float) -> CheckReport:
    """Compare ``|ball(f x, R) & f(A)|`` with ``|ball(x, rho_g(R) + 2C) & A|`` for every ``x`` in ``A``.

    ``rho_g`` is the expansion profile of ``g``.  The right side bounds the
    left whenever ``d_X(g f x, x) <= C`` for all ``x``.
    """
    if data.g is None or data.C is None:
        raise ValueError("the bound needs g and C")
    A = dX.points.ordered(A)
    Aset = set(A)
    fA = {data.f[x] for x in A}
    radius = expansion_profile(data.g, dY, dX)(R) + 2 * data.C
    rows, w = [], []
    for x in A:
        left = sum(1 for y in ball(dY, data.f[x], R) if y in fA)
        right = sum(1 for z in ball(dX, x, radius) if z in Aset)
        rows.append({"x": x, "image_count": left, "source_count": right})
        if left > right:
            w.append(("image_bg", f"{left} image points near f({x}) but only {right} source points near {x}",
                      {"x": x, "image_count": left, "source_count": right}))
    return CheckReport(not w, w, {"radius": radius, "rows": rows})


def choose_section(f: Mapping[str, str] | CoarseMapData, B: Iterable[str], X: PointSet | None = None) -> tuple[str, ...]:
    """One preimage per ``y`` in ``B`` (the first in X order); returned in X order."""
    if isinstance(f, CoarseMapData):
        X, f = f.X, f.f
    order = X.ids if X is not None else tuple(f)
    first: dict[str, str] = {}
    for x in order:
        first.setdefault(f[x], x)
    missing = [y for y in B if y not in first]
    if missing:
        raise ValueError(f"no preimage for {missing}")
    chosen = {first[y] for y in B}
    return tuple(x for x in order if x in chosen)


@dataclass(frozen=True)
class MoritaIndex:
    A: tuple[str, ...]
    f: dict[str, str]
    N: dict[str, int]
    pi: dict[str, int]

    @property
    def image(self) -> tuple[str, ...]:
        return tuple(self.N)

    def fiber(self, y: str) -> tuple[str, ...]:
        return tuple(sorted((x for x in self.A if self.f[x] == y), key=self.pi.__getitem__))


def morita_index(f: Mapping[str, str] | CoarseMapData, A: Iterable[str], X: PointSet | None = None) -> MoritaIndex:
    """Fiber sizes ``N`` and 0-based fiber numbering ``pi``, in X order."""
    if isinstance(f, CoarseMapData):
        X, f = f.X, f.f
    A = X.ordered(A) if X is not None else tuple(A)
    N: dict[str, int] = {}
    pi: dict[str, int] = {}
    for x in A:
        y = f[x]
        pi[x] = N.get(y, 0)
        N[y] = pi[x] + 1
    return MoritaIndex(A, {x: f[x] for x in A}, N, pi)


def morita_forward(idx: MoritaIndex, x: str, j: int) -> tuple[str, int]:
    if x not in idx.pi:
        raise KeyError(f"{x!r} is not in A")
    if j < 0:
        raise ValueError("j must be nonnegative")
    y = idx.f[x]
    return y, idx.pi[x] + j * idx.N[y]


def morita_inverse(idx: MoritaIndex, y: str, m: int) -> tuple[str, int]:
    if y not in idx.N:
        raise KeyError(f"{y!r} is not in f(A)")
    if m < 0:
        raise ValueError("m must be nonnegative")
    j, r = divmod(m, idx.N[y])
    return idx.fiber(y)[r], j


def window_id(x: str, j: int) -> str:
    return f"{x}{WINDOW_SEP}{j}"


def split_window_id(s: str) -> tuple[str, int]:
    x, _, j = s.rpartition(WINDOW_SEP)
    return x, int(j)


def window_points(base: Iterable[str], J: int) -> PointSet:
    """Ids ``x@j`` for ``x`` in ``base`` and ``j < J``, x-major."""
    return PointSet(tuple(window_id(x, j) for x in base for j in range(J)))


class WindowError(ValueError):
    pass


def induced_conjugation(idx: MoritaIndex, T: SparseOp, J: int, out_window: int | None = None) -> SparseOp:
    """``U T U*`` where ``U`` sends ``delta_(x, j)`` to ``delta_phi(x, j)``.

    ``T`` lives on ``window_points(A, J)``; the result on
    ``window_points(f(A), out_window)`` with ``out_window`` defaulting to
    ``J * max N``.  An image index outside the output window raises
    :class:`WindowError`.
    """
    if T.points != window_points(idx.A, J):
        raise ValueError("operator is not defined on the A x window point set")
    if out_window is None:
        out_window = J * max(idx.N.values(), default=1)
    target = window_points(idx.image, out_window)
    relabel = {}
    for x in idx.A:
        for j in range(J):
            y, m = morita_forward(idx, x, j)
            if m >= out_window:
                raise WindowError(f"phi({x}, {j}) = ({y}, {m}) is outside the window of size {out_window}")
            relabel[window_id(x, j)] = window_id(y, m)
    return SparseOp(target, {(relabel[a], relabel[b]): v for (a, b), v in T.items()})
