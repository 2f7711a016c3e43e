"""Line-oriented exchange formats.

``.emx``  metric:    ``points: a b c`` then ``x y value`` (value decimal or ``inf``);
                     unlisted pairs are ``inf``.
``.smx``  operator:  ``points: ...`` then ``x y re [im]``.
``.hrf``  family:    ``points: ...`` then ``x z value`` meaning ``xi_x(z) = value``.
``.map``  coarse map: ``x -> y`` lines, optional ``C: value``, optional ``g:``
                     section of ``y -> x`` lines.

Lines starting with ``#`` and blank lines are ignored.  Serialization is
canonical, so parse followed by serialize is idempotent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .operators import SparseOp
from .schur import HRFamily
from .space import INF, ExtMetric, MetricError, PointSet, validate_metric


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = f"{source or '<input>'}" + (f":{line}" if line is not None else "")
        super().__init__(f"{where}: {message}")


def format_number(v: float) -> str:
    """Shortest round-trip decimal; integral values without a fractional part; ``inf``."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        raise ValueError("cannot serialize NaN")
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def parse_number(tok: str, line: int | None = None, source: str | None = None) -> float:
    t = tok.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return INF
    try:
        v = float(t)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", line, source) from None
    if math.isnan(v):
        raise ParseError("NaN is not allowed", line, source)
    return v


def _data_lines(text: str):
    for n, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        yield n, s


def _parse_header(lines, source) -> PointSet:
    try:
        n, s = next(lines)
    except StopIteration:
        raise ParseError("missing 'points:' header", None, source) from None
    if not s.startswith("points:"):
        raise ParseError("first data line must be 'points: ...'", n, source)
    try:
        return PointSet(tuple(s[len("points:"):].split()))
    except ValueError as e:
        raise ParseError(str(e), n, source) from None


def _check_ids(points: PointSet, ids, n, source) -> None:
    for x in ids:
        if x not in points:
            raise ParseError(f"unknown point id {x!r}", n, source)


def _header(points: PointSet) -> str:
    return "points: " + " ".join(points.ids) if len(points) else "points:"


# -- .emx ---------------------------------------------------------------------------


def parse_emx(text: str, source: str | None = None) -> ExtMetric:
    """Parse and validate a metric; axiom violations raise :class:`MetricError`."""
    lines = _data_lines(text)
    points = _parse_header(lines, source)
    table = []
    for n, s in lines:
        parts = s.split()
        if len(parts) != 3:
            raise ParseError("expected 'x y value'", n, source)
        _check_ids(points, parts[:2], n, source)
        table.append((parts[0], parts[1], parse_number(parts[2], n, source)))
    return validate_metric(points, table)


def serialize_emx(d: ExtMetric) -> str:
    out = [_header(d.points)]
    for x, y, v in d.pairs():
        if not math.isinf(v):
            out.append(f"{x} {y} {format_number(v)}")
    return "\n".join(out) + "\n"


# -- .smx ---------------------------------------------------------------------------


def parse_smx(text: str, source: str | None = None) -> SparseOp:
    lines = _data_lines(text)
    points = _parse_header(lines, source)
    entries: dict[tuple[str, str], complex] = {}
    for n, s in lines:
        parts = s.split()
        if len(parts) not in (3, 4):
            raise ParseError("expected 'x y re [im]'", n, source)
        _check_ids(points, parts[:2], n, source)
        re = parse_number(parts[2], n, source)
        im = parse_number(parts[3], n, source) if len(parts) == 4 else 0.0
        if math.isinf(re) or math.isinf(im):
            raise ParseError("operator entries must be finite", n, source)
        key = (parts[0], parts[1])
        if key in entries:
            raise ParseError(f"entry ({key[0]}, {key[1]}) listed twice", n, source)
        entries[key] = complex(re, im)
    return SparseOp(points, entries)


def serialize_smx(T: SparseOp) -> str:
    out = [_header(T.points)]
    for (x, y), v in T.items():
        line = f"{x} {y} {format_number(v.real)}"
        if v.imag != 0:
            line += f" {format_number(v.imag)}"
        out.append(line)
    return "\n".join(out) + "\n"


# -- .hrf ---------------------------------------------------------------------------


def parse_hrf(text: str, source: str | None = None) -> HRFamily:
    lines = _data_lines(text)
    points = _parse_header(lines, source)
    xi: dict[str, dict[str, float]] = {x: {} for x in points.ids}
    for n, s in lines:
        parts = s.split()
        if len(parts) != 3:
            raise ParseError("expected 'x z value'", n, source)
        _check_ids(points, parts[:2], n, source)
        v = parse_number(parts[2], n, source)
        if math.isinf(v):
            raise ParseError("family values must be finite", n, source)
        x, z = parts[:2]
        if z in xi[x]:
            raise ParseError(f"value xi_{x}({z}) listed twice", n, source)
        xi[x][z] = v
    return HRFamily(points, xi)


def serialize_hrf(xi: HRFamily) -> str:
    out = [_header(xi.points)]
    for x in xi.points.ids:
        row = xi.xi[x]
        for z in xi.points.ids:
            if z in row:
                out.append(f"{x} {z} {format_number(row[z])}")
    return "\n".join(out) + "\n"


# -- .map ---------------------------------------------------------------------------


@dataclass
class MapFile:
    f: dict[str, str]
    g: dict[str, str] | None = None
    C: float | None = None


def parse_map(text: str, source: str | None = None) -> MapFile:
    f: dict[str, str] = {}
    g: dict[str, str] | None = None
    C = None
    section = f
    for n, s in _data_lines(text):
        if s == "g:":
            if g is not None:
                raise ParseError("second 'g:' section", n, source)
            g = {}
            section = g
            continue
        if s.startswith("C:"):
            if C is not None:
                raise ParseError("'C:' given twice", n, source)
            C = parse_number(s[2:], n, source)
            if C < 0:
                raise ParseError("C must be nonnegative", n, source)
            continue
        parts = s.split()
        if len(parts) != 3 or parts[1] != "->":
            raise ParseError("expected 'a -> b'", n, source)
        if parts[0] in section:
            raise ParseError(f"{parts[0]!r} mapped twice", n, source)
        section[parts[0]] = parts[2]
    return MapFile(f, g, C)


def serialize_map(m: MapFile, X: PointSet | None = None, Y: PointSet | None = None) -> str:
    """``f`` lines (X order when given), then ``C``, then the ``g`` section (Y order when given)."""
    fx = X.ids if X is not None else tuple(m.f)
    out = [f"{x} -> {m.f[x]}" for x in fx]
    if m.C is not None:
        out.append(f"C: {format_number(m.C)}")
    if m.g is not None:
        out.append("g:")
        gy = Y.ids if Y is not None else tuple(m.g)
        out.extend(f"{y} -> {m.g[y]}" for y in gy)
    return "\n".join(out) + "\n"


# -- files --------------------------------------------------------------------------

_PARSERS = {".emx": parse_emx, ".smx": parse_smx, ".hrf": parse_hrf, ".map": parse_map}
_WRITERS = {".emx": serialize_emx, ".smx": serialize_smx, ".hrf": serialize_hrf, ".map": serialize_map}


def read(path: str | Path):
    p = Path(path)
    try:
        parser = _PARSERS[p.suffix]
    except KeyError:
        raise ParseError(f"unknown file type {p.suffix!r}", None, str(p)) from None
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(str(e), None, str(p)) from None
    return parser(text, str(p))


def write(path: str | Path, obj) -> None:
    p = Path(path)
    try:
        writer = _WRITERS[p.suffix]
    except KeyError:
        raise ValueError(f"unknown file type {p.suffix!r}") from None
    p.write_text(writer(obj), encoding="utf-8")


__all__ = [
    "MapFile", "MetricError", "ParseError", "format_number", "parse_emx", "parse_hrf", "parse_map",
    "parse_number", "parse_smx", "read", "serialize_emx", "serialize_hrf", "serialize_map",
    "serialize_smx", "write",
]
