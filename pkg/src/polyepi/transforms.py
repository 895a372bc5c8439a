"""Doubling, its inverse, and the line-parity quadrangle of a thin octagon."""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import (
    INF, Geometry, GeometryError, bfs_distances, check_weak_polygon, girth, is_connected, order_of,
)


class TransformError(GeometryError):
    pass


def _weak_gonality(g: Geometry) -> int:
    gi = girth(g)
    if gi is INF or not check_weak_polygon(g, gi // 2):
        raise TransformError(f"{g!r} is not a weak generalized polygon")
    return gi // 2


def double(g: Geometry) -> Geometry:
    """The double: points are all elements of ``g`` (points first), lines are its flags."""
    order = order_of(g)
    if order is None or order.s != order.t:
        raise TransformError("doubling needs a polygon of symmetric order (s, s)")
    _weak_gonality(g)
    n = g.point_count
    flags = g.flags()
    pairs = []
    for j, (p, l) in enumerate(flags):
        pairs.append((p, j))
        pairs.append((n + l, j))
    name = f"double({g.name})" if g.name else None
    return Geometry.from_incidences(g.point_count + g.line_count, len(flags), pairs, name)


def _parity_split(g: Geometry, start: int) -> tuple[list[int], list[int]]:
    dist = bfs_distances(g, start)
    same = [v for v, d in enumerate(dist) if d is not INF and d % 4 == 0]
    other = [v for v, d in enumerate(dist) if d is not INF and d % 4 == 2]
    return same, other


def undouble(g: Geometry) -> Geometry:
    """Inverse of :func:`double` for a thin 2n-gon of order (1, s).

    The parity class of point 0 becomes the point set; the other class the
    line set.  Choosing the other class would give the dual.
    """
    order = order_of(g)
    if order is None or order.s != 1:
        raise TransformError("undoubling needs a thin polygon of order (1, s)")
    gon = _weak_gonality(g)
    if gon % 2:
        raise TransformError(f"gonality {gon} is odd; not a double")
    pts, lns = _parity_split(g, 0)
    pos = {v: i for i, v in enumerate(pts)}
    pos.update({v: i for i, v in enumerate(lns)})
    in_pts = set(pts)
    pairs = []
    for a, b in g.line_points:
        p, l = (a, b) if a in in_pts else (b, a)
        pairs.append((pos[p], pos[l]))
    return Geometry.from_incidences(len(pts), len(lns), pairs)


@dataclass(frozen=True)
class ParityClasses:
    """Line classes U, V of a thin octagon of order (s, 1) and the quadrangle they span.

    ``derived`` has point i = line ``class_a[i]`` and line j = line
    ``class_b[j]`` of the thin polygon.  ``flag_map[x]`` is the (U-line,
    V-line) pair through point x, given as original line indices.
    """

    class_a: tuple[int, ...]
    class_b: tuple[int, ...]
    derived: Geometry
    flag_map: tuple[tuple[int, int], ...]

    @property
    def derived_quadrangle(self) -> Geometry:
        return self.derived


def line_parity(g: Geometry) -> ParityClasses:
    order = order_of(g)
    if order is None or order.t != 1:
        raise TransformError("line parity needs a thin polygon of order (s', 1)")
    if not is_connected(g):
        raise TransformError("geometry is not connected")
    gon = _weak_gonality(g)
    if gon != 8:
        raise TransformError(f"line parity needs a thin octagon, got gonality {gon}")
    n = g.point_count
    # line-graph distance is half the incidence distance
    same, other = _parity_split(g, n)
    class_a = tuple(v - n for v in same)
    class_b = tuple(v - n for v in other)
    pos_a = {l: i for i, l in enumerate(class_a)}
    pos_b = {l: i for i, l in enumerate(class_b)}
    pairs = []
    flag_map = []
    for x, (l1, l2) in enumerate(g.point_lines):
        u, v = (l1, l2) if l1 in pos_a else (l2, l1)
        if u not in pos_a or v not in pos_b:
            raise TransformError(f"point {x} is not on one line of each class")
        pairs.append((pos_a[u], pos_b[v]))
        flag_map.append((u, v))
    derived = Geometry.from_incidences(len(class_a), len(class_b), pairs)
    if not check_weak_polygon(derived, gon // 2):
        raise TransformError(f"derived structure is not a weak {gon // 2}-gon")
    return ParityClasses(class_a, class_b, derived, tuple(flag_map))
