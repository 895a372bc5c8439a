"""Text formats for geometries and morphisms.

Geometry files::

    points 7
    lines 7
    line 0: 0 1 2
    ...

Morphism files::

    morphism
    source fano.geom
    target plane:2
    point 0 -> 3
    line 0 -> 1

``#`` starts a comment and blank lines are ignored in both formats.
Sources and targets may be catalog ids or paths relative to the morphism file.
"""

from __future__ import annotations

import re
from pathlib import Path

from .catalog import is_catalog_id, parse_catalog_id
from .geometry import Geometry, GeometryError
from .morphisms import Morphism


class ParseError(GeometryError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


_LINE_RE = re.compile(r"^line\s+(\d+)\s*:\s*(.*)$")


def loads_geometry(text: str, name: str | None = None) -> Geometry:
    rows = list(_content_lines(text))
    if not rows:
        return Geometry.from_incidences(0, 0, [], name)
    counts = {}
    for key, (lineno, line) in zip(("points", "lines"), rows[:2]):
        parts = line.split()
        if len(parts) != 2 or parts[0] != key or not parts[1].isdigit():
            raise ParseError(lineno, f"expected '{key} <count>', got {line!r}")
        counts[key] = int(parts[1])
    if len(counts) < 2:
        raise ParseError(rows[-1][0], "missing 'lines <count>' header")
    n_points, n_lines = counts["points"], counts["lines"]
    lines: dict[int, list[int]] = {}
    for lineno, line in rows[2:]:
        match = _LINE_RE.match(line)
        if not match:
            raise ParseError(lineno, f"expected 'line <j>: <points>', got {line!r}")
        j = int(match.group(1))
        if j >= n_lines:
            raise ParseError(lineno, f"line index {j} out of range (0..{n_lines - 1})")
        if j in lines:
            raise ParseError(lineno, f"line {j} declared twice")
        try:
            pts = [int(tok) for tok in match.group(2).split()]
        except ValueError:
            raise ParseError(lineno, f"bad point list {match.group(2)!r}") from None
        for p in pts:
            if not 0 <= p < n_points:
                raise ParseError(lineno, f"point index {p} out of range (0..{n_points - 1})")
        if len(set(pts)) != len(pts):
            raise ParseError(lineno, f"duplicate incidence on line {j}")
        lines[j] = pts
    missing = sorted(set(range(n_lines)) - set(lines))
    if missing:
        raise ParseError(rows[-1][0], f"line {missing[0]} not declared")
    return Geometry.from_lines(n_points, [lines[j] for j in range(n_lines)], name)


def dumps_geometry(g: Geometry) -> str:
    out = [f"points {g.point_count}", f"lines {g.line_count}"]
    for j, row in enumerate(g.line_points):
        out.append(f"line {j}: {' '.join(map(str, row))}".rstrip())
    return "\n".join(out) + "\n"


def load_geometry(ref: str | Path) -> Geometry:
    """Read a geometry from a file path, a catalog id, or ``-`` (stdin)."""
    ref = str(ref)
    if ref == "-":
        import sys

        return loads_geometry(sys.stdin.read())
    if is_catalog_id(ref) and not Path(ref).exists():
        return parse_catalog_id(ref)
    path = Path(ref)
    return loads_geometry(path.read_text(encoding="utf-8"), path.stem)


def save_geometry(g: Geometry, path: str | Path) -> None:
    Path(path).write_text(dumps_geometry(g), encoding="utf-8")


_MAP_RE = re.compile(r"^(point|line)\s+(\d+)\s*->\s*(\d+)$")


def loads_morphism(text: str, base_dir: str | Path = ".") -> Morphism:
    rows = list(_content_lines(text))
    if not rows or rows[0][1] != "morphism":
        raise ParseError(rows[0][0] if rows else 1, "expected 'morphism' header")
    refs = {}
    for key, (lineno, line) in zip(("source", "target"), rows[1:3]):
        parts = line.split(None, 1)
        if len(parts) != 2 or parts[0] != key:
            raise ParseError(lineno, f"expected '{key} <file>', got {line!r}")
        refs[key] = parts[1]
    if len(refs) < 2:
        raise ParseError(rows[-1][0], "missing source/target lines")

    def resolve(ref: str) -> Geometry:
        if is_catalog_id(ref) and not (Path(base_dir) / ref).exists():
            return parse_catalog_id(ref)
        path = Path(ref) if Path(ref).is_absolute() else Path(base_dir) / ref
        return load_geometry(path)

    src, tgt = resolve(refs["source"]), resolve(refs["target"])
    maps = {"point": {}, "line": {}}
    for lineno, line in rows[3:]:
        match = _MAP_RE.match(line)
        if not match:
            raise ParseError(lineno, f"expected 'point|line <i> -> <j>', got {line!r}")
        kind, i, j = match.group(1), int(match.group(2)), int(match.group(3))
        if i in maps[kind]:
            raise ParseError(lineno, f"{kind} {i} mapped twice")
        maps[kind][i] = j
    pm, lm = maps["point"], maps["line"]
    if sorted(pm) != list(range(src.point_count)) or sorted(lm) != list(range(src.line_count)):
        raise ParseError(rows[-1][0], "maps are not total on the source")
    return Morphism(src, tgt, tuple(pm[i] for i in range(src.point_count)),
                    tuple(lm[i] for i in range(src.line_count)))


def dumps_morphism(m: Morphism, source_ref: str, target_ref: str) -> str:
    out = ["morphism", f"source {source_ref}", f"target {target_ref}"]
    out += [f"point {i} -> {j}" for i, j in enumerate(m.point_map)]
    out += [f"line {i} -> {j}" for i, j in enumerate(m.line_map)]
    return "\n".join(out) + "\n"


def load_morphism(path: str | Path) -> Morphism:
    path = Path(path)
    return loads_morphism(path.read_text(encoding="utf-8"), path.parent)
