"""Command-line front end.

Every subcommand prints one JSON report on stdout::

    {"command": ..., "status": "pass" | "fail" | "error",
     "witnesses": [{"rule": ..., "message": ..., "payload": {...}}],
     "outputs": [...], "data": {...}}

Exit codes: 0 pass, 1 fail (violations found), 2 input or usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Any

import numpy as np

from . import formats
from .coarse import (
    CoarseMapData,
    WindowError,
    check_coarse_equivalence,
    image_bg_bound,
    induced_conjugation,
    morita_forward,
    morita_index,
    morita_inverse,
)
from .formats import ParseError
from .metric_order import (
    MembershipError,
    check_membership,
    dominates,
    join_growth_bound,
    join_metric,
    precedes,
    restriction_metric,
)
from .operators import (
    BlockRep,
    FiniteGroup,
    HomomorphismError,
    PropagationError,
    SparseOp,
    band_sparsity,
    block_embedding,
    certify_membership,
    coset_action,
    cyclic_group,
    decompose_banded,
    max_block_diameter,
    natural_action,
    power_norm,
    propagation_witness,
    regular_action,
    support_metric,
    symmetric_group,
)
from .schur import (
    HRFamily,
    HRFamilyError,
    HRParams,
    StageFailure,
    SupportRadiusError,
    convergence_run,
    cp_decomposition,
    gram_kernel,
    hr_check,
    schur_apply,
    uniform_hr_family,
)
from .space import (
    INF,
    ExtMetric,
    MetricError,
    PointSet,
    ball_sizes,
    coarse_components,
    discreteness_gap,
    greedy_clusters,
    greedy_net,
    growth_profile,
)


class InputError(Exception):
    """Bad input that is not a parse error (mismatched headers, unknown ids, ...)."""


class UsageError(Exception):
    pass


class Result:
    def __init__(self, command: str):
        self.command = command
        self.witnesses: list[dict] = []
        self.outputs: list[str] = []
        self.data: dict[str, Any] = {}

    def fail(self, rule: str, message: str, payload: dict | None = None) -> None:
        self.witnesses.append({"rule": rule, "message": message, "payload": payload or {}})

    @property
    def status(self) -> str:
        return "fail" if self.witnesses else "pass"


# -- report encoding ----------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(obj.real), _plain(obj.imag)]
    if isinstance(obj, dict):
        return {(k if isinstance(k, str) else formats.format_number(k) if isinstance(k, (int, float))
                 else str(k)): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_plain(v) for v in items]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return str(obj)


def encode_report(report: dict) -> str:
    return json.dumps(_plain(report), sort_keys=True, ensure_ascii=False) + "\n"


def render_pretty(report: dict) -> str:
    lines = [f"{report['command']}: {report['status']}"]
    for w in report["witnesses"]:
        lines.append(f"  [{w['rule']}] {w['message']}")
    for p in report["outputs"]:
        lines.append(f"  wrote {p}")
    if report.get("data"):
        body = json.dumps(_plain(report["data"]), sort_keys=True, indent=2, ensure_ascii=False)
        lines.extend("  " + s for s in body.splitlines())
    return "\n".join(lines) + "\n"


# -- input helpers ------------------------------------------------------------------


def _load(path: str, kind: str):
    if Path(path).suffix != kind:
        raise ParseError(f"expected a {kind} file", None, path)
    return formats.read(path)


def load_metric(path: str) -> ExtMetric:
    try:
        return _load(path, ".emx")
    except MetricError as e:
        raise InputError(f"{path}: invalid metric: {e}") from None


def load_op(path: str) -> SparseOp:
    return _load(path, ".smx")


def load_family(path: str) -> HRFamily:
    try:
        return _load(path, ".hrf")
    except HRFamilyError as e:
        raise InputError(f"{path}: {e}") from None


def same_points(*objs) -> PointSet:
    pts = objs[0].points
    for o in objs[1:]:
        if o.points != pts:
            raise InputError("'points:' headers differ between input files")
    return pts


def id_list(s: str, points: PointSet | None = None) -> tuple[str, ...]:
    ids = tuple(t for t in s.replace(",", " ").split() if t)
    if points is not None:
        for x in ids:
            if x not in points:
                raise InputError(f"unknown point id {x!r}")
    return ids


def positive(s: str) -> float:
    v = formats.parse_number(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{s} is not positive")
    return v


def nonneg(s: str) -> float:
    v = formats.parse_number(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"{s} is negative")
    return v


def write_output(res: Result, path: str | None, obj) -> None:
    if path:
        formats.write(path, obj)
        res.outputs.append(path)


def profile_data(d: ExtMetric) -> dict:
    return growth_profile(d).as_dict()


# -- subcommands --------------------------------------------------------------------


def cmd_check_metric(args, res: Result) -> None:
    try:
        d = _load(args.metric, ".emx")
    except MetricError as e:
        for rule, msg, wit in e.violations:
            res.fail(rule, msg, {"witness": list(wit)})
        return
    res.data.update(n=len(d), gap=discreteness_gap(d), profile=profile_data(d),
                    components=len(coarse_components(d)))
    if args.base:
        base = load_metric(args.base)
        same_points(base, d)
        try:
            cert = check_membership(base, d)
        except MembershipError as e:
            res.fail(e.rule, str(e), {"witness": list(e.witness)})
            return
        res.data["C"] = cert.C


def cmd_join(args, res: Result) -> None:
    base, d1, d2 = load_metric(args.base), load_metric(args.d1), load_metric(args.d2)
    same_points(base, d1, d2)
    certs = []
    for name, d in (("d1", d1), ("d2", d2)):
        try:
            certs.append(check_membership(base, d))
        except MembershipError as e:
            res.fail(e.rule, f"{name}: {e}", {"input": name, "witness": list(e.witness)})
    if res.witnesses:
        return
    j = join_metric(base, d1, d2)
    C = max(c.C for c in certs)
    cj = check_membership(base, j)
    res.data.update(C1=certs[0].C, C2=certs[1].C, C=cj.C, gap=cj.gap, profile=profile_data(j))
    if not (precedes(d1, j) and precedes(d2, j)):
        res.fail("order", "join is not above both inputs")
    if not dominates(base, j, C):
        res.fail("D2", f"join does not dominate base / {C}")
    for R in range(1, args.max_radius + 1):
        size = int(ball_sizes(j, R).max())
        bound = join_growth_bound(d1, d2, R)
        if size > bound:
            res.fail("growth", f"ball of radius {R} has {size} > {bound} points", {"R": R})
    write_output(res, args.output, j)


def cmd_restrict(args, res: Result) -> None:
    base = load_metric(args.base)
    Y = id_list(args.subset, base.points)
    d = restriction_metric(base, Y)
    res.data["subset"] = list(base.points.ordered(Y))
    try:
        cert = check_membership(base, d)
        res.data.update(C=cert.C, gap=cert.gap, profile=profile_data(d))
    except MembershipError as e:
        res.fail(e.rule, str(e), {"witness": list(e.witness)})
    write_output(res, args.output, d)


def cmd_propagation(args, res: Result) -> None:
    T, d = load_op(args.op), load_metric(args.metric)
    same_points(T, d)
    p, where = propagation_witness(T, d)
    res.data.update(propagation=p, witness=list(where) if where else None, band_sparsity=band_sparsity(T))
    if p == INF:
        res.fail("infinite", f"entry at {where} joins points at infinite distance", {"witness": list(where)})
    elif args.max is not None and p > args.max:
        res.fail("propagation", f"propagation {p} at {where} exceeds {args.max}", {"witness": list(where)})


def cmd_certify(args, res: Result) -> None:
    T, base = load_op(args.op), load_metric(args.base)
    same_points(T, base)
    try:
        mc = certify_membership(T, base)
    except PropagationError as e:
        res.fail("infinite", str(e), {"witness": list(e.witness)})
        return
    res.data.update(k=mc.k, S=mc.S, C=mc.cert.C, unit_ball_max=int(ball_sizes(mc.d, 1).max()) if len(T.points) else 0,
                    profile=mc.cert.profile.as_dict())
    write_output(res, args.output, mc.d)


def cmd_support_metric(args, res: Result) -> None:
    T, base = load_op(args.op), load_metric(args.base)
    same_points(T, base)
    try:
        d = support_metric(T, base, args.S)
    except PropagationError as e:
        res.fail("propagation", str(e), {"witness": list(e.witness), "propagation": e.value})
        return
    cert = check_membership(base, d)
    res.data.update(C=cert.C, profile=cert.profile.as_dict())
    write_output(res, args.output, d)


def cmd_decompose(args, res: Result) -> None:
    T = load_op(args.op)
    dec = decompose_banded(T)
    N = len(dec)
    norm = power_norm(T, tol=args.tol_norm)
    res.data.update(
        terms=[{"f": t.f, "v": t.v} for t in dec.terms],
        count=N,
        coefficient_sum=dec.coefficient_sum(),
        norm=norm.value,
    )
    if dec.reconstruct() != T:
        res.fail("reconstruct", "terms do not sum to the operator")
    if dec.coefficient_sum() > N * norm.value + args.tol:
        res.fail("bound", f"sum of max |f_i| exceeds {N} * |T|")
    if args.max_terms is not None and N > args.max_terms:
        res.fail("band", f"operator needs {N} terms, more than {args.max_terms}", {"band_sparsity": N})
    if args.output:
        out = Path(args.output)
        for i, t in enumerate(dec.terms):
            p = out.with_name(f"{out.stem}.{i}{out.suffix or '.smx'}")
            write_output(res, str(p), t.to_op(T.points))


def cmd_norm(args, res: Result) -> None:
    T = load_op(args.op)
    est = power_norm(T, tol=args.tol_norm, max_iter=args.max_iter, seed=args.seed)
    res.data.update(norm=est.value, converged=est.converged, iterations=est.iterations)
    if not est.converged:
        res.fail("convergence", f"no convergence within {args.max_iter} iterations", {"estimate": est.value})


def cmd_net(args, res: Result) -> None:
    d = load_metric(args.metric)
    net = greedy_net(d, args.l)
    res.data.update(l=net.l, net=list(net.net), assign=net.assign)
    if args.max_growth is not None:
        idx = d.points.indices(net.net)
        sub = d.matrix[np.ix_(idx, idx)]
        size = int(np.count_nonzero(sub <= args.radius, axis=1).max()) if idx else 0
        res.data["net_growth"] = size
        if size > args.max_growth:
            res.fail("growth", f"net ball of radius {args.radius} holds {size} > {args.max_growth} points",
                     {"radius": args.radius, "count": size})


def cmd_clusters(args, res: Result) -> None:
    d = load_metric(args.metric)
    chain = greedy_clusters(d, args.R)
    res.data.update(R=chain.R, centers=list(chain.centers), clusters=[list(c) for c in chain.clusters],
                    sizes=list(chain.sizes))
    if args.min_length is not None and len(chain.clusters) < args.min_length:
        res.fail("length", f"chain has {len(chain.clusters)} < {args.min_length} clusters",
                 {"length": len(chain.clusters)})


def _with_S(xi: HRFamily, S: float | None) -> HRFamily:
    if S is None:
        return xi
    return HRFamily(xi.points, xi.xi, HRParams(xi.params.R, xi.params.eps, S))


def cmd_hr_check(args, res: Result) -> None:
    xi, d = load_family(args.family), load_metric(args.metric)
    same_points(xi, d)
    rep = hr_check(_with_S(xi, args.S), d, args.R, args.eps)
    res.data.update(hr1=rep.hr1, eps_star=rep.eps_star, S_star=rep.S_star)
    for rule, msg, payload in rep.witnesses:
        res.fail(rule, msg, payload)


def _hr1(xi: HRFamily, res: Result) -> bool:
    d = ExtMetric(xi.points, np.zeros((len(xi.points),) * 2))
    rep = hr_check(xi, d, 0.0, INF)
    for rule, msg, payload in rep.witnesses:
        res.fail(rule, msg, payload)
    return rep.hr1


def cmd_gram(args, res: Result) -> None:
    xi = load_family(args.family)
    if not _hr1(xi, res):
        return
    k = gram_kernel(xi)
    ids = xi.points.ids
    res.data.update(min_eigenvalue=k.min_eigenvalue(),
                    kernel={x: {y: float(k.k[i, j]) for j, y in enumerate(ids) if k.k[i, j] != 0}
                            for i, x in enumerate(ids)})
    if k.min_eigenvalue() < -args.tol:
        res.fail("psd", f"Gram matrix has eigenvalue {k.min_eigenvalue()}")


def cmd_schur(args, res: Result) -> None:
    xi, T = load_family(args.family), load_op(args.op)
    same_points(xi, T)
    if not _hr1(xi, res):
        return
    out = schur_apply(gram_kernel(xi), T)
    res.data.update(nnz_in=len(T), nnz_out=len(out))
    if not set(k for k, _ in out.items()) <= set(k for k, _ in T.items()):
        res.fail("support", "Schur product grew the support")
    write_output(res, args.output, out)


def cmd_cp_decompose(args, res: Result) -> None:
    xi, d = load_family(args.family), load_metric(args.metric)
    tests = [load_op(p) for p in args.test or ()]
    same_points(xi, d, *tests)
    try:
        cp = cp_decomposition(xi, d, args.S, args.propagation)
    except SupportRadiusError as e:
        res.fail("support", str(e), {"x": e.x, "radius": e.radius})
        return
    res.data.update(raw_terms=len(cp.phi), group_count=cp.group_count, coloring_bound=cp.coloring_bound,
                    groups=[list(g) for g in cp.groups])
    k = gram_kernel(xi)
    for path, T in zip(args.test or (), tests):
        target = schur_apply(k, T).to_dense()
        err = float(np.abs(cp.apply(T).to_dense() - target).max(initial=0.0))
        if err > args.identity_tol:
            res.fail("identity", f"{path}: raw sum differs from M_k(T) by {err}", {"op": path, "error": err})
        p, _ = propagation_witness(T, d)
        if p <= cp.propagation:
            err = float(np.abs(cp.apply_grouped(T).to_dense() - target).max(initial=0.0))
            if err > args.identity_tol:
                res.fail("identity", f"{path}: grouped sum differs from M_k(T) by {err}", {"op": path, "error": err})


def cmd_converge(args, res: Result) -> None:
    d, T = load_metric(args.metric), load_op(args.op)
    same_points(d, T)
    schedule = []
    for R, eps, fam in args.stage:
        xi = uniform_hr_family(d) if fam == "uniform" else load_family(fam)
        same_points(xi, d)
        schedule.append((formats.parse_number(R), formats.parse_number(eps), xi))
    p, where = propagation_witness(T, d)
    if p == INF:
        res.fail("infinite", f"entry at {where} joins points at infinite distance", {"witness": list(where)})
        return
    try:
        devs = convergence_run(d, T, schedule, tol=args.tol_norm)
    except StageFailure as e:
        for rule, msg, payload in e.report.witnesses:
            res.fail(rule, f"stage {e.stage}: {msg}", dict(payload, stage=e.stage))
        return
    res.data["deviations"] = devs


def _coarse_inputs(args):
    dX, dY = load_metric(args.dx), load_metric(args.dy)
    m = _load(args.map, ".map")
    try:
        data = CoarseMapData(dX.points, dY.points, m.f, m.g, m.C)
    except (KeyError, ValueError) as e:
        raise InputError(f"{args.map}: {e.args[0]}") from None
    return dX, dY, data


def cmd_coarse_check(args, res: Result) -> None:
    dX, dY, data = _coarse_inputs(args)
    if data.g is None or data.C is None:
        raise InputError(f"{args.map}: a 'g:' section and 'C:' are required")
    rep = check_coarse_equivalence(data, dX, dY, surjective=args.surjective)
    res.data.update(rep.data)
    for rule, msg, payload in rep.witnesses:
        res.fail(rule, msg, payload)
    if args.bg_radius is not None:
        A = id_list(args.subset, dX.points) if args.subset else dX.points.ids
        bg = image_bg_bound(data, A, dX, dY, args.bg_radius)
        res.data["image_bound"] = bg.data
        for rule, msg, payload in bg.witnesses:
            res.fail(rule, msg, payload)


def cmd_morita(args, res: Result) -> None:
    dX, dY, data = _coarse_inputs(args)
    A = id_list(args.subset, dX.points) if args.subset else dX.points.ids
    idx = morita_index(data, A)
    J = args.J
    table = []
    for x in idx.A:
        for j in range(J):
            y, m = morita_forward(idx, x, j)
            table.append([x, j, y, m])
            if morita_inverse(idx, y, m) != (x, j):
                res.fail("roundtrip", f"inverse of ({x}, {j}) is wrong", {"x": x, "j": j})
    res.data.update(A=list(idx.A), N=idx.N, pi=idx.pi, forward=table)
    if args.op:
        T = load_op(args.op)
        try:
            out = induced_conjugation(idx, T, J, args.out_window)
        except WindowError as e:
            res.fail("window", str(e))
            return
        except ValueError as e:
            raise InputError(str(e)) from None
        write_output(res, args.output, out)


def _group(spec: str) -> FiniteGroup:
    kind, _, n = spec.partition(":")
    try:
        n = int(n)
    except ValueError:
        raise InputError(f"bad group spec {spec!r}") from None
    if kind == "sym" and 1 <= n <= 6:
        return symmetric_group(n)
    if kind == "cyc" and n >= 1:
        return cyclic_group(n)
    raise InputError(f"bad group spec {spec!r}; use sym:N (N <= 6) or cyc:N")


def _action(group: FiniteGroup, kind: str, size: int) -> dict:
    if kind == "regular":
        return regular_action(group)
    if kind == "natural":
        return natural_action(group)
    if kind == "trivial":
        return {g: tuple(range(size)) for g in group.elements}
    if kind.startswith("coset="):
        return coset_action(group, [s for s in kind[len("coset="):].split("+") if s])
    raise InputError(f"unknown action {kind!r}")


def cmd_block_embed(args, res: Result) -> None:
    group = _group(args.group)
    d = load_metric(args.metric) if args.metric else None
    blocks = [id_list(ids) for _, ids in args.block]
    if d is not None:
        points = d.points
    else:
        points = PointSet(tuple(x for b in blocks for x in b))
    try:
        actions = tuple(_action(group, kind, len(b)) for (kind, _), b in zip(args.block, blocks))
        rep = BlockRep(points, tuple(blocks), group, actions)
        U = block_embedding(rep, args.element)
    except (KeyError, ValueError) as e:
        if isinstance(e, HomomorphismError):
            res.fail("homomorphism", str(e))
            return
        raise InputError(str(e.args[0]) if e.args else str(e)) from None
    ident = SparseOp.identity(points)
    res.data.update(band_sparsity=band_sparsity(U), unitary=(U.adjoint() @ U) == ident)
    if (U.adjoint() @ U) != ident:
        res.fail("unitary", "embedding is not unitary")
    if d is not None:
        p, where = propagation_witness(U, d)
        res.data.update(propagation=p, max_block_diameter=max_block_diameter(rep, d))
        if args.max_propagation is not None and p > args.max_propagation:
            res.fail("propagation", f"propagation {p} at {where} exceeds {args.max_propagation}",
                     {"witness": list(where)})
    write_output(res, args.output, U)


# -- parser -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable report")
    common.add_argument("--tol", type=positive, default=1e-9, help="tolerance for norm comparisons")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized internals")

    p = _Parser(prog="roecoarse", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        s = sub.add_parser(name, parents=[common], help=help)
        s.set_defaults(func=func)
        return s

    s = add("check-metric", cmd_check_metric, "validate a metric; with --base, certify membership")
    s.add_argument("metric")
    s.add_argument("--base")

    s = add("join", cmd_join, "geodesic join of two metrics dominating a base")
    s.add_argument("--base", required=True)
    s.add_argument("d1")
    s.add_argument("d2")
    s.add_argument("--max-radius", type=int, default=6)
    s.add_argument("-o", "--output")

    s = add("restrict", cmd_restrict, "restriction metric of a subset")
    s.add_argument("--base", required=True)
    s.add_argument("--subset", required=True, help="comma-separated ids")
    s.add_argument("-o", "--output")

    s = add("propagation", cmd_propagation, "propagation of an operator")
    s.add_argument("op")
    s.add_argument("--metric", required=True)
    s.add_argument("--max", type=nonneg)

    s = add("certify", cmd_certify, "band sparsity, propagation and support metric")
    s.add_argument("op")
    s.add_argument("--base", required=True)
    s.add_argument("-o", "--output")

    s = add("support-metric", cmd_support_metric, "path metric of the operator's support graph")
    s.add_argument("op")
    s.add_argument("--base", required=True)
    s.add_argument("--S", type=nonneg, required=True)
    s.add_argument("-o", "--output")

    s = add("decompose", cmd_decompose, "split an operator into diagonal-times-partial-permutation terms")
    s.add_argument("op")
    s.add_argument("--max-terms", type=int)
    s.add_argument("--tol-norm", type=positive, default=1e-10)
    s.add_argument("-o", "--output", help="term i is written to STEM.i.smx")

    s = add("norm", cmd_norm, "operator norm by power iteration")
    s.add_argument("op")
    s.add_argument("--max-iter", type=int, default=10_000)
    s.add_argument("--tol-norm", type=positive, default=1e-10)

    s = add("net", cmd_net, "greedy l-net")
    s.add_argument("metric")
    s.add_argument("--l", type=positive, required=True)
    s.add_argument("--max-growth", type=int)
    s.add_argument("--radius", type=nonneg, default=1.0)

    s = add("clusters", cmd_clusters, "disjoint clusters of increasing size")
    s.add_argument("metric")
    s.add_argument("--R", type=positive, required=True)
    s.add_argument("--min-length", type=int)

    s = add("hr-check", cmd_hr_check, "check a Higson-Roe family")
    s.add_argument("family")
    s.add_argument("--metric", required=True)
    s.add_argument("--R", type=nonneg, required=True)
    s.add_argument("--eps", type=positive, required=True)
    s.add_argument("--S", type=nonneg)

    s = add("gram", cmd_gram, "Gram kernel of a family")
    s.add_argument("family")

    s = add("schur", cmd_schur, "apply the Schur multiplier of a family")
    s.add_argument("family")
    s.add_argument("op")
    s.add_argument("-o", "--output")

    s = add("cp-decompose", cmd_cp_decompose, "completely positive decomposition of a Schur multiplier")
    s.add_argument("family")
    s.add_argument("--metric", required=True)
    s.add_argument("--S", type=nonneg, required=True)
    s.add_argument("--propagation", type=nonneg, default=0.0)
    s.add_argument("--test", action="append", help="operator to verify the identity on (repeatable)")
    s.add_argument("--identity-tol", type=positive, default=1e-12)

    s = add("converge", cmd_converge, "deviation |M_k(T) - T| along a schedule of families")
    s.add_argument("metric")
    s.add_argument("op")
    s.add_argument("--stage", nargs=3, action="append", required=True, metavar=("R", "EPS", "FAMILY"),
                   help="FAMILY is an .hrf file or 'uniform'")
    s.add_argument("--tol-norm", type=positive, default=1e-10)

    s = add("coarse-check", cmd_coarse_check, "check a coarse equivalence")
    s.add_argument("dx")
    s.add_argument("dy")
    s.add_argument("map")
    s.add_argument("--surjective", action="store_true")
    s.add_argument("--bg-radius", type=nonneg)
    s.add_argument("--subset")

    s = add("morita", cmd_morita, "fiber-counting bijection and induced conjugation")
    s.add_argument("dx")
    s.add_argument("dy")
    s.add_argument("map")
    s.add_argument("--subset")
    s.add_argument("--J", type=int, default=4)
    s.add_argument("--op", help="operator on the A x window point set (ids x@j)")
    s.add_argument("--out-window", type=int)
    s.add_argument("-o", "--output")

    s = add("block-embed", cmd_block_embed, "block permutation operator of a group element")
    s.add_argument("--group", required=True, help="sym:N or cyc:N")
    s.add_argument("--block", nargs=2, action="append", required=True, metavar=("ACTION", "IDS"),
                   help="ACTION is regular, natural, trivial or coset=E1+E2+...")
    s.add_argument("--element", required=True)
    s.add_argument("--metric")
    s.add_argument("--max-propagation", type=nonneg)
    s.add_argument("-o", "--output")
    return p


def run(argv: list[str]) -> tuple[int, dict]:
    parser = build_parser()
    command = next((a for a in argv if not a.startswith("-")), None)
    pretty = "--pretty" in argv
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(str(e))
        return 2, {"command": command, "status": "error", "pretty": pretty,
                   "witnesses": [{"rule": "usage", "message": str(e).splitlines()[0], "payload": {}}],
                   "outputs": [], "data": {}}
    except SystemExit as e:  # --help
        return int(e.code or 0), {}
    res = Result(args.command)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            args.func(args, res)
    except (ParseError, InputError, MetricError, HRFamilyError, KeyError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else str(e)
        kind = "parse" if isinstance(e, ParseError) else "input"
        return 2, {"command": args.command, "status": "error", "pretty": args.pretty,
                   "witnesses": [{"rule": kind, "message": msg, "payload": {}}],
                   "outputs": res.outputs, "data": {}}
    report = {"command": args.command, "status": res.status, "witnesses": res.witnesses,
              "outputs": res.outputs, "data": res.data, "pretty": args.pretty}
    return (1 if res.witnesses else 0), report


def main(argv: list[str] | None = None) -> int:
    code, report = run(sys.argv[1:] if argv is None else argv)
    if not report:
        return code
    pretty = report.pop("pretty", False)
    sys.stdout.write(render_pretty(report) if pretty else encode_report(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
