"""Morphisms between geometries, epimorphism checks, and fibers."""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import INF, Element, Geometry, L, P, Verdict, distance_matrix, dual


class MorphismError(ValueError):
    """Malformed morphism data or a violated operation precondition."""


@dataclass(frozen=True)
class Morphism:
    """A pair of maps (points to points, lines to lines) from ``source`` to ``target``."""

    source: Geometry
    target: Geometry
    point_map: tuple[int, ...]
    line_map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "point_map", tuple(self.point_map))
        object.__setattr__(self, "line_map", tuple(self.line_map))
        if len(self.point_map) != self.source.point_count:
            raise MorphismError(f"point map has {len(self.point_map)} entries, "
                                f"source has {self.source.point_count} points")
        if len(self.line_map) != self.source.line_count:
            raise MorphismError(f"line map has {len(self.line_map)} entries, "
                                f"source has {self.source.line_count} lines")
        if any(not 0 <= x < self.target.point_count for x in self.point_map):
            raise MorphismError("point map leaves the target's point range")
        if any(not 0 <= x < self.target.line_count for x in self.line_map):
            raise MorphismError("line map leaves the target's line range")

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Canonical encoding used for set comparisons and sorting."""
        return self.point_map, self.line_map

    def __call__(self, e: Element) -> Element:
        if e.kind == "point":
            return P(self.point_map[e.index])
        return L(self.line_map[e.index])

    def vertex_map(self) -> list[int]:
        """The induced map on incidence-graph vertex ids."""
        n = self.target.point_count
        return list(self.point_map) + [n + l for l in self.line_map]

    def dual(self) -> "Morphism":
        return Morphism(dual(self.source), dual(self.target), self.line_map, self.point_map)

    def compose(self, after: "Morphism") -> "Morphism":
        """``after`` applied to the result of ``self``."""
        return Morphism(self.source, after.target,
                        tuple(after.point_map[x] for x in self.point_map),
                        tuple(after.line_map[x] for x in self.line_map))


def identity(g: Geometry) -> Morphism:
    return Morphism(g, g, tuple(range(g.point_count)), tuple(range(g.line_count)))


def verify_morphism(m: Morphism) -> Verdict:
    for p, l in m.source.flags():
        if not m.target.incident(m.point_map[p], m.line_map[l]):
            return Verdict(False, "incidence not preserved", (P(p), L(l)))
    return Verdict(True)


def is_epimorphism(m: Morphism) -> Verdict:
    v = verify_morphism(m)
    if not v:
        return v
    missing_p = set(range(m.target.point_count)) - set(m.point_map)
    if missing_p:
        return Verdict(False, "not surjective on points", (P(min(missing_p)),))
    missing_l = set(range(m.target.line_count)) - set(m.line_map)
    if missing_l:
        return Verdict(False, "not surjective on lines", (L(min(missing_l)),))
    return Verdict(True)


def is_injective(m: Morphism) -> bool:
    return (len(set(m.point_map)) == len(m.point_map)
            and len(set(m.line_map)) == len(m.line_map))


def is_bijective(m: Morphism) -> bool:
    return (is_injective(m) and m.source.point_count == m.target.point_count
            and m.source.line_count == m.target.line_count)


@dataclass(frozen=True)
class Fibering:
    point_fibers: dict[int, frozenset[int]]
    line_fibers: dict[int, frozenset[int]]


def fibers(m: Morphism) -> Fibering:
    if not is_epimorphism(m):
        raise MorphismError("fibers are defined for epimorphisms only")
    pf: dict[int, set] = {x: set() for x in range(m.target.point_count)}
    lf: dict[int, set] = {x: set() for x in range(m.target.line_count)}
    for p, x in enumerate(m.point_map):
        pf[x].add(p)
    for l, x in enumerate(m.line_map):
        lf[x].add(l)
    return Fibering({k: frozenset(v) for k, v in pf.items()},
                    {k: frozenset(v) for k, v in lf.items()})


def check_row_saturation(m: Morphism) -> Verdict:
    """Every point row maps onto the full row of its image line, and every
    pencil onto the full pencil of its image point."""
    if not is_epimorphism(m):
        raise MorphismError("row saturation is checked on epimorphisms only")
    src, tgt = m.source, m.target
    for l in range(src.line_count):
        image = {m.point_map[p] for p in src.line_points[l]}
        if image != set(tgt.line_points[m.line_map[l]]):
            return Verdict(False, "point row not saturated", (L(l),))
    for p in range(src.point_count):
        image = {m.line_map[l] for l in src.point_lines[p]}
        if image != set(tgt.point_lines[m.point_map[p]]):
            return Verdict(False, "pencil not saturated", (P(p),))
    return Verdict(True)


def nonexpansive_violations(m: Morphism, pairs=None, src_dist=None, tgt_dist=None) -> list:
    """Element pairs (as vertex ids) whose image distance exceeds their distance."""
    src_dist = src_dist or distance_matrix(m.source)
    tgt_dist = tgt_dist or distance_matrix(m.target)
    vmap = m.vertex_map()
    if pairs is None:
        n = len(vmap)
        pairs = ((a, b) for a in range(n) for b in range(a + 1, n))
    bad = []
    for a, b in pairs:
        d = src_dist[a][b]
        if d is not INF and tgt_dist[vmap[a]][vmap[b]] > d:
            bad.append((a, b))
    return bad
