"""Deterministic generators for the small geometries used throughout.

Points and lines of the classical examples are indexed in lexicographic order
of their normalized homogeneous coordinates, so every generator is
reproducible byte-for-byte.
"""

from __future__ import annotations

import re
from itertools import product

from .geometry import Geometry, GeometryError, dual

# GF(4) = {0, 1, w, w+1} encoded as 0..3; addition is XOR.
_GF4_MUL = (
    (0, 0, 0, 0),
    (0, 1, 2, 3),
    (0, 2, 3, 1),
    (0, 3, 1, 2),
)


class Field:
    """Arithmetic in the q-element field for q in {2, 3, 4}."""

    def __init__(self, q: int):
        if q not in (2, 3, 4):
            raise GeometryError(f"unsupported field order {q}")
        self.q = q

    def add(self, a: int, b: int) -> int:
        return a ^ b if self.q == 4 else (a + b) % self.q

    def mul(self, a: int, b: int) -> int:
        return _GF4_MUL[a][b] if self.q == 4 else (a * b) % self.q

    def neg(self, a: int) -> int:
        return a if self.q == 4 else (-a) % self.q

    def dot(self, u, v) -> int:
        acc = 0
        for a, b in zip(u, v):
            acc = self.add(acc, self.mul(a, b))
        return acc


def projective_points(dim: int, q: int) -> list[tuple[int, ...]]:
    """Normalized vectors (first nonzero coordinate 1) of GF(q)^dim, sorted."""
    return sorted(v for v in product(range(q), repeat=dim)
                  if any(v) and v[next(i for i, x in enumerate(v) if x)] == 1)


def gen_projective_plane(q: int) -> Geometry:
    """PG(2, q); lines are indexed by their normalized dual coordinates."""
    if q not in (2, 3, 4):
        raise GeometryError(f"projective plane of order {q} not supported (q in 2, 3, 4)")
    field = Field(q)
    pts = projective_points(3, q)
    lines = [[i for i, p in enumerate(pts) if field.dot(p, u) == 0] for u in pts]
    return Geometry.from_lines(len(pts), lines, f"plane:{q}")


def gen_symplectic_quadrangle(q: int) -> Geometry:
    """W(q): points of PG(3, q) with the totally isotropic lines of
    x0*y1 - x1*y0 + x2*y3 - x3*y2."""
    if q not in (2, 3):
        raise GeometryError(f"symplectic quadrangle W({q}) not supported (q in 2, 3)")
    field = Field(q)
    pts = projective_points(4, q)
    index = {p: i for i, p in enumerate(pts)}

    def form(x, y):
        t1 = field.add(field.mul(x[0], y[1]), field.neg(field.mul(x[1], y[0])))
        t2 = field.add(field.mul(x[2], y[3]), field.neg(field.mul(x[3], y[2])))
        return field.add(t1, t2)

    def normalize(v):
        lead = next(x for x in v if x)
        inv = next(c for c in range(1, q) if field.mul(c, lead) == 1)
        return tuple(field.mul(inv, x) for x in v)

    lines = set()
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            if form(x, y) != 0:
                continue
            span = {normalize(tuple(field.add(field.mul(a, xi), field.mul(b, yi))
                                    for xi, yi in zip(x, y)))
                    for a in range(q) for b in range(q) if a or b}
            lines.add(tuple(sorted(index[v] for v in span)))
    return Geometry.from_lines(len(pts), sorted(lines), f"gq:{q}")


def gen_ordinary(m: int) -> Geometry:
    """Ordinary m-gon: point i and point i+1 (mod m) lie on line i."""
    if m < 2:
        raise GeometryError("ordinary m-gon needs m >= 2")
    return Geometry.from_lines(m, [sorted((i, (i + 1) % m)) for i in range(m)], f"ordinary:{m}")


def gen_grid(s: int) -> Geometry:
    """(s+1) x (s+1) grid; rows are lines 0..s, columns lines s+1..2s+1."""
    if s < 1:
        raise GeometryError("grid needs s >= 1")
    k = s + 1
    rows = [[i * k + j for j in range(k)] for i in range(k)]
    cols = [[i * k + j for i in range(k)] for j in range(k)]
    return Geometry.from_lines(k * k, rows + cols, f"grid:{s}")


_THIN_BASES = {6: (gen_projective_plane, (1, 2, 3, 4)), 8: (gen_symplectic_quadrangle, (1, 2, 3))}


def gen_thin(m: int, s: int) -> Geometry:
    """Thin m-gon of order (s, 1): the dual of the double of a symmetric-order
    (m/2)-gon (planes for m = 6, W(s) for m = 8)."""
    from .transforms import double

    if m not in _THIN_BASES or s not in _THIN_BASES[m][1]:
        raise GeometryError(f"thin({m},{s}) not supported")
    if s == 1:
        return gen_ordinary(m).renamed(f"thin:{m}:1")
    base = _THIN_BASES[m][0](s)
    return dual(double(base)).renamed(f"thin:{m}:{s}")


def parse_catalog_id(text: str) -> Geometry:
    """Resolve ids such as ``plane:2``, ``gq:2``, ``ordinary:8``, ``grid:2``, ``thin:8:2``."""
    family, *params = text.split(":")
    try:
        args = [int(x) for x in params]
    except ValueError:
        raise GeometryError(f"bad catalog id {text!r}") from None
    makers = {
        "plane": (gen_projective_plane, 1),
        "gq": (gen_symplectic_quadrangle, 1),
        "ordinary": (gen_ordinary, 1),
        "grid": (gen_grid, 1),
        "thin": (gen_thin, 2),
    }
    if family not in makers or len(args) != makers[family][1]:
        raise GeometryError(f"unknown catalog id {text!r}")
    return makers[family][0](*args)


_ID_RE = re.compile(r"^(plane|gq|ordinary|grid):\d+$|^thin:\d+:\d+$")


def is_catalog_id(text: str) -> bool:
    """Whether ``text`` has the shape of a catalog id (parameters are checked on use)."""
    return bool(_ID_RE.match(text))


CATALOG_IDS = (
    "plane:2", "plane:3", "plane:4", "gq:2", "gq:3",
    "ordinary:2", "ordinary:3", "ordinary:4", "ordinary:6", "ordinary:8", "ordinary:9",
    "grid:1", "grid:2", "grid:3",
    "thin:6:1", "thin:6:2", "thin:6:3", "thin:8:1", "thin:8:2",
)
