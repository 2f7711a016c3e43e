"""Higson-Roe families and the Schur multipliers they induce.

A family assigns to each point ``x`` a nonnegative unit vector ``xi_x``.
Its Gram kernel ``k(x, y) = <xi_x, xi_y>`` acts on operators entrywise,
``M_k(T)[x, y] = k(x, y) T[x, y]``.  Because the vectors are real and
nonnegative, ``1 - k(x, y) = |xi_x - xi_y|^2 / 2`` exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .operators import SparseOp, op_norm, propagation
from .space import INF, ExtMetric, NetData, PointSet, ball, coarse_components, diameter

UNIT_TOL = 1e-12


class HRFamilyError(ValueError):
    pass


class SupportRadiusError(ValueError):
    def __init__(self, x: str, radius: float, S: float):
        self.x = x
        self.radius = radius
        super().__init__(f"support of xi_{x} reaches distance {radius} > {S}")


@dataclass(frozen=True)
class HRParams:
    R: float | None = None
    eps: float | None = None
    S: float = INF


class HRFamily:
    """Point -> sparse nonnegative vector over the same point set."""

    __slots__ = ("points", "xi", "params")

    def __init__(self, points: PointSet, xi: Mapping[str, Mapping[str, float]], params: HRParams | None = None):
        clean: dict[str, dict[str, float]] = {}
        for x in points.ids:
            vec = xi.get(x)
            if vec is None:
                raise HRFamilyError(f"no vector for point {x!r}")
            row = {}
            for z in points.ids:
                v = float(vec.get(z, 0.0))
                if v < 0:
                    raise HRFamilyError(f"xi_{x}({z}) = {v} is negative")
                if v != 0:
                    row[z] = v
            extra = set(vec) - set(points.ids)
            if extra:
                raise HRFamilyError(f"xi_{x} has coordinates outside the point set: {sorted(extra)}")
            clean[x] = row
        for x in xi:
            if x not in points:
                raise HRFamilyError(f"vector given for unknown point {x!r}")
        self.points = points
        self.xi = clean
        self.params = params or HRParams()

    def matrix(self) -> np.ndarray:
        """Row ``x`` holds ``xi_x``."""
        n = len(self.points)
        M = np.zeros((n, n))
        idx = self.points.index
        for x, row in self.xi.items():
            for z, v in row.items():
                M[idx(x), idx(z)] = v
        return M

    def __eq__(self, other) -> bool:
        if not isinstance(other, HRFamily):
            return NotImplemented
        return self.points == other.points and self.xi == other.xi


@dataclass(frozen=True)
class HRReport:
    hr1: bool
    eps_star: float
    S_star: float
    passed: bool
    witnesses: list = field(default_factory=list)


def _pair_distances(M: np.ndarray) -> np.ndarray:
    """``|row_i - row_j|_2`` for all pairs, computed from differences (not the Gram identity)."""
    n = M.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        out[i] = np.linalg.norm(M - M[i], axis=1)
    return out


def hr_check(xi: HRFamily, d: ExtMetric, R: float, eps: float) -> HRReport:
    """Check the three Higson-Roe conditions at scale ``R`` with tolerance ``eps``.

    Reports the attained deviation ``max |xi_x - xi_y|`` over ``d(x, y) <= R``
    and the attained support radius; passes when the first is strictly
    below ``eps`` and the second is at most ``xi.params.S``.
    """
    if xi.points != d.points:
        raise ValueError("family and metric are defined on different point sets")
    ids = d.points.ids
    M = xi.matrix()
    witnesses = []
    norms = np.linalg.norm(M, axis=1)
    hr1 = True
    for i, x in enumerate(ids):
        if M[i].max(initial=0.0) > 1:
            hr1 = False
            witnesses.append(("HR1", f"xi_{x} has a value above 1", {"x": x}))
        if abs(norms[i] - 1) > UNIT_TOL:
            hr1 = False
            witnesses.append(("HR1", f"|xi_{x}| = {float(norms[i])} is not 1", {"x": x, "norm": float(norms[i])}))
    D = _pair_distances(M)
    close = d.matrix <= R
    eps_star = float(D[close].max()) if close.any() else 0.0
    support = np.where(M > 0, d.matrix, -INF)
    radii = support.max(axis=1) if len(ids) else np.zeros(0)
    S_star = float(max(radii.max(initial=0.0), 0.0))
    if not eps_star < eps:
        i, j = np.unravel_index(np.argmax(np.where(close, D, -1.0)), D.shape)
        witnesses.append(("HR2", f"|xi_{ids[i]} - xi_{ids[j]}| = {D[i, j]!r} >= {eps} with d = {d.matrix[i, j]}",
                          {"x": ids[i], "y": ids[j], "deviation": float(D[i, j])}))
    if S_star > xi.params.S:
        i = int(np.argmax(radii))
        witnesses.append(("HR3", f"support of xi_{ids[i]} reaches distance {S_star} > {xi.params.S}",
                          {"x": ids[i], "radius": S_star}))
    passed = hr1 and eps_star < eps and S_star <= xi.params.S
    return HRReport(hr1, eps_star, S_star, passed, witnesses)


def _normalized_indicator(members) -> dict[str, float]:
    v = 1.0 / math.sqrt(len(members))
    return {z: v for z in members}


def uniform_hr_family(d: ExtMetric, eps: float = 1e-9) -> HRFamily:
    """Each ``xi_x`` is the normalized indicator of the coarse component of ``x``.

    Vectors are constant on components, so the family meets the second
    condition for every ``R`` and every positive ``eps``.
    """
    xi = {}
    S = 0.0
    for comp in coarse_components(d):
        vec = _normalized_indicator(comp)
        for x in comp:
            xi[x] = vec
        S = max(S, diameter(d, comp))
    return HRFamily(d.points, xi, HRParams(INF, eps, S))


def ball_averaging_family(d: ExtMetric, net: NetData, S: float) -> HRFamily:
    """``xi_x`` is the normalized indicator of ``ball(d, x, S)`` intersected with the net."""
    if S < net.l:
        raise ValueError(f"S = {S} must be at least the net radius {net.l}")
    members = set(net.net)
    xi = {x: _normalized_indicator([z for z in ball(d, x, S) if z in members]) for x in d.points.ids}
    return HRFamily(d.points, xi, HRParams(None, None, float(S)))


def net_transport(xi_on_net: HRFamily | Mapping[str, Mapping[str, float]], net: NetData,
                  R: float, eps: float, S: float, points: PointSet | None = None) -> HRFamily:
    """Extend a net-supported family to every point: ``eta_x = xi_{p(x)}`` restricted to the net.

    If the net family meets the conditions at ``(R, eps, S)`` then the result
    meets them at ``(R - 2 l, eps, S + l)``.
    """
    if isinstance(xi_on_net, HRFamily):
        points = xi_on_net.points
        vectors = xi_on_net.xi
    else:
        vectors = xi_on_net
        if points is None:
            raise ValueError("points required when vectors are given as a mapping")
    members = set(net.net)
    eta = {}
    for x in points.ids:
        p = net.assign[x]
        if p not in vectors:
            raise HRFamilyError(f"no vector for net point {p!r}")
        eta[x] = {z: v for z, v in vectors[p].items() if z in members}
    return HRFamily(points, eta, HRParams(R - 2 * net.l, eps, S + net.l))


@dataclass(frozen=True)
class SchurKernel:
    points: PointSet
    k: np.ndarray
    derived_from: HRFamily | None = None

    def __call__(self, x: str, y: str) -> float:
        idx = self.points.index
        return float(self.k[idx(x), idx(y)])

    def min_eigenvalue(self) -> float:
        if self.k.size == 0:
            return 0.0
        return float(np.linalg.eigvalsh(self.k).min())


def gram_kernel(xi: HRFamily) -> SchurKernel:
    """Inner products of the family's vectors.

    Pairs with identical vectors get exactly 1 (their distance is exactly 0),
    so rounding in ``|xi_x|^2`` never leaves a residue on the diagonal or on
    blocks where the family is constant.
    """
    M = xi.matrix()
    k = M @ M.T
    k = (k + k.T) / 2
    same = (M[:, None, :] == M[None, :, :]).all(axis=2)
    k[same] = 1.0
    k.setflags(write=False)
    return SchurKernel(xi.points, k, xi)


def schur_apply(k: SchurKernel, T: SparseOp) -> SparseOp:
    """Entrywise product ``k(x, y) T[x, y]``; the support can only shrink."""
    if k.points != T.points:
        raise ValueError("kernel and operator are defined on different point sets")
    idx = T.points.index
    return SparseOp(T.points, {(x, y): k.k[idx(x), idx(y)] * v for (x, y), v in T.items()})


@dataclass(frozen=True)
class CPTerms:
    """Functions ``phi_z(x) = xi_x(z)`` with ``sum_z phi_z T phi_z = M_k(T)``.

    ``groups`` partitions the ``z`` into classes whose members are pairwise
    non-conflicting, so summing ``phi_z`` within a class gives
    ``group_count`` functions that reproduce ``M_k(T)`` for every ``T``
    with propagation at most ``propagation``.
    """

    points: PointSet
    phi: dict[str, dict[str, float]]
    groups: tuple[tuple[str, ...], ...]
    propagation: float
    coloring_bound: int

    @property
    def group_count(self) -> int:
        return len(self.groups)

    def grouped(self) -> list[dict[str, float]]:
        out = []
        for cls in self.groups:
            f: dict[str, float] = {}
            for z in cls:
                for x, v in self.phi[z].items():
                    f[x] = f.get(x, 0.0) + v
            out.append(f)
        return out

    @staticmethod
    def _sandwich(fs, T: SparseOp) -> SparseOp:
        out: dict[tuple[str, str], complex] = {}
        for f in fs:
            for (x, y), v in T.items():
                a = f.get(x)
                b = f.get(y)
                if a and b:
                    out[(x, y)] = out.get((x, y), 0j) + a * v * b
        return SparseOp(T.points, out)

    def apply(self, T: SparseOp) -> SparseOp:
        """``sum_z phi_z T phi_z`` over the raw terms."""
        return self._sandwich(self.phi.values(), T)

    def apply_grouped(self, T: SparseOp) -> SparseOp:
        return self._sandwich(self.grouped(), T)


def cp_decomposition(xi: HRFamily, d: ExtMetric, S: float, propagation: float = 0.0) -> CPTerms:
    """Split ``M_k`` into sandwiches ``phi T phi`` with ``0 <= phi <= 1``.

    Raw terms are indexed by support points ``z`` in point order.  Two
    terms conflict when some ``x`` in the support of one and ``y`` in the
    support of the other have ``d(x, y) <= propagation``; with the default
    ``propagation = 0`` this means a shared ``x``.  Classes are built first
    fit, and ``coloring_bound`` is one more than the largest conflict degree.
    """
    if xi.points != d.points:
        raise ValueError("family and metric are defined on different point sets")
    ids = d.points.ids
    M = xi.matrix()
    radii = np.where(M > 0, d.matrix, -INF).max(axis=1, initial=-INF)
    if len(ids) and radii.max() > S:
        i = int(np.argmax(radii))
        raise SupportRadiusError(ids[i], float(radii[i]), S)
    zs = [j for j in range(len(ids)) if M[:, j].any()]
    phi = {ids[j]: {ids[i]: float(M[i, j]) for i in np.flatnonzero(M[:, j])} for j in zs}
    supp = {j: M[:, j] > 0 for j in zs}
    near = d.matrix <= propagation
    conflict = {j: set() for j in zs}
    for a, ja in enumerate(zs):
        reach = near[supp[ja]].any(axis=0)
        for jb in zs[a + 1:]:
            if (reach & supp[jb]).any():
                conflict[ja].add(jb)
                conflict[jb].add(ja)
    classes: list[list[int]] = []
    for j in zs:
        for cls in classes:
            if not conflict[j] & set(cls):
                cls.append(j)
                break
        else:
            classes.append([j])
    bound = 1 + max((len(c) for c in conflict.values()), default=-1)
    return CPTerms(
        d.points,
        phi,
        tuple(tuple(ids[j] for j in cls) for cls in classes),
        float(propagation),
        bound,
    )


class StageFailure(ValueError):
    def __init__(self, stage: int, report: HRReport):
        self.stage = stage
        self.report = report
        super().__init__(f"stage {stage}: family fails the Higson-Roe check")


def convergence_run(d: ExtMetric, T: SparseOp,
                    schedule: Sequence[tuple[float, float, HRFamily]],
                    tol: float = 1e-10) -> list[float]:
    """``|M_k(T) - T|`` for the kernel of each stage's family.

    Every family must pass :func:`hr_check` at its stage's ``(R, eps)``.
    """
    if propagation(T, d) == INF:
        raise ValueError("operator has infinite propagation")
    out = []
    for n, (R, eps, family) in enumerate(schedule):
        rep = hr_check(family, d, R, eps)
        if not rep.passed:
            raise StageFailure(n, rep)
        out.append(op_norm(schur_apply(gram_kernel(family), T) - T, tol=tol))
    return out
