"""Free construction of epimorphisms onto thin polygons, truncated to finite stages.

Each round snapshots the current geometry, finds every pair of elements at
distance n-1 and joins the pair by a brand-new path of length n+1.  The
epimorphism is extended over the new path: onto the unique shortest target
path (folded to the right length) when the images are closer than n-1, and
onto a seeded-random path of length n+1 when they are at distance n-1.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .geometry import (
    INF, Element, Geometry, _bfs, _shortest_cycle, check_weak_polygon, distance_matrix,
    find_ordinary_subpolygon, girth_at_least, is_connected, order_of,
)
from .morphisms import Morphism, is_epimorphism


class FreeBuildError(RuntimeError):
    """An invariant failed after a round (an implementation bug, never expected)."""


@dataclass(frozen=True)
class FreeCaps:
    max_elements: int = 200_000
    max_seconds: float = 60.0


@dataclass(frozen=True)
class PathRecord:
    endpoints: tuple[Element, Element]
    interior: tuple[Element, ...]
    image: tuple[Element, ...]
    target_distance: int

    def to_json(self) -> dict:
        return {
            "endpoints": [str(e) for e in self.endpoints],
            "interior": [str(e) for e in self.interior],
            "image": [str(e) for e in self.image],
            "target_distance": self.target_distance,
        }


@dataclass(frozen=True)
class SeedConfig:
    target: Geometry
    n: int
    cover_walk: tuple[Element, ...]
    thickness_gadget: tuple[Element, ...]  # image walk of the (n+1)-gon, cyclic


@dataclass(frozen=True)
class FreeState:
    stage: int
    n: int
    geometry: Geometry
    epi: Morphism
    added_paths: tuple[PathRecord, ...]
    rng_seed: int
    seed_config: SeedConfig | None = None
    stage0_counts: tuple[int, int] = (0, 0)
    partial: bool = False

    @property
    def target(self) -> Geometry:
        return self.epi.target

    def fingerprint(self):
        """Everything that identifies the state, for determinism checks."""
        return (self.stage, self.geometry.point_count, self.geometry.line_count,
                tuple(sorted(self.geometry.incidence)), self.epi.key, self.added_paths)


def fold_walk(path_length: int, target_path) -> list:
    """A walk of ``path_length`` steps covering ``target_path``: traverse it,
    then bounce on its last edge."""
    k = len(target_path) - 1
    if k < 0:
        raise ValueError("empty target path")
    if path_length < k or (path_length - k) % 2:
        raise ValueError(f"cannot fold a walk of length {path_length} onto a path of length {k}")
    walk = list(target_path)
    if path_length > k:
        if k == 0:
            raise ValueError("cannot fold onto a single element")
        walk += [target_path[-2], target_path[-1]] * ((path_length - k) // 2)
    return walk


class _Builder:
    """Mutable incidence lists indexed like the Geometry they will become."""

    def __init__(self, g: Geometry | None = None, point_image=(), line_image=()):
        self.point_lines = [list(r) for r in g.point_lines] if g else []
        self.line_points = [list(c) for c in g.line_points] if g else []
        self.point_image = list(point_image)
        self.line_image = list(line_image)

    def new(self, kind: str, image: int) -> Element:
        if kind == "point":
            self.point_lines.append([])
            self.point_image.append(image)
            return Element("point", len(self.point_lines) - 1)
        self.line_points.append([])
        self.line_image.append(image)
        return Element("line", len(self.line_points) - 1)

    def join(self, a: Element, b: Element) -> None:
        p, l = (a, b) if a.kind == "point" else (b, a)
        if p.kind != "point" or l.kind != "line":
            raise FreeBuildError(f"cannot join {a} and {b}: same kind")
        self.point_lines[p.index].append(l.index)
        self.line_points[l.index].append(p.index)

    def path(self, start: Element, end: Element, images) -> list[Element]:
        """Fresh interior elements between ``start`` and ``end`` with the given images."""
        kind = start.kind
        prev, interior = start, []
        for img in images:
            kind = "line" if kind == "point" else "point"
            e = self.new(kind, img)
            self.join(prev, e)
            interior.append(e)
            prev = e
        self.join(prev, end)
        return interior

    def size(self) -> int:
        return len(self.point_lines) + len(self.line_points)

    def freeze(self, target: Geometry) -> tuple[Geometry, Morphism]:
        pairs = [(p, l) for p, row in enumerate(self.point_lines) for l in row]
        g = Geometry.from_incidences(len(self.point_lines), len(self.line_points), pairs)
        return g, Morphism(g, target, tuple(self.point_image), tuple(self.line_image))


def _cover_walk(target: Geometry) -> list[int]:
    """Closed walk from point 0 visiting every vertex: a depth-first tour."""
    adj = target.adjacency()
    walk, seen = [0], {0}

    def visit(u):
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                walk.append(w)
                visit(w)
                walk.append(u)

    visit(0)
    if len(seen) != target.vertex_count:
        raise FreeBuildError("target is not connected; no cover walk")
    walk.pop()  # closing vertex equals the start
    return walk


def seed(target: Geometry, n: int, rng_seed: int = 0) -> FreeState:
    """Begin configuration: a circuit wrapped around a cover walk of the target,
    plus an ordinary (n+1)-gon, joined by a fresh bridge."""
    if n < 3:
        raise ValueError("n must be at least 3")
    if not check_weak_polygon(target, n):
        raise ValueError(f"target is not a weak generalized {n}-gon")
    order = order_of(target)
    if order is None or order.t != 1:
        raise ValueError("target must have an order (s', 1)")
    walk = _cover_walk(target)
    while len(walk) < 2 * n:
        walk = walk[:1] + walk[1:2] + walk
    gadget_cycle = find_ordinary_subpolygon(target, n)
    cyc = [target.vertex(e) for e in gadget_cycle]
    if cyc[0] >= target.point_count:
        cyc = cyc[1:] + cyc[:1]
    gadget = cyc + cyc[:2]

    tp = target.point_count
    b = _Builder()

    def make(v):
        return b.new("point", v) if v < tp else b.new("line", v - tp)

    circuit = [make(v) for v in walk]
    for i, e in enumerate(circuit):
        b.join(e, circuit[(i + 1) % len(circuit)])
    ring = [make(v) for v in gadget]
    for i, e in enumerate(ring):
        b.join(e, ring[(i + 1) % len(ring)])
    # bridge from the circuit's first element to the gadget's second one
    start, end = circuit[0], ring[1]
    dist = distance_matrix(target)
    d = dist[walk[0]][gadget[1]]
    route = _unique_shortest(target, walk[0], gadget[1], dist)
    images = fold_walk(d + 2, route)[1:-1]
    b.path(start, end, [v if v < tp else v - tp for v in images])
    geom, epi = b.freeze(target)

    config = SeedConfig(target, n, tuple(target.element(v) for v in walk),
                        tuple(target.element(v) for v in gadget))
    state = FreeState(0, n, geom, epi, (), rng_seed, config,
                      (geom.point_count, geom.line_count))
    _verify(state, None)
    return state


def _unique_shortest(target: Geometry, a: int, b: int, dist) -> list[int]:
    path = [a]
    adj = target.adjacency()
    while path[-1] != b:
        u = path[-1]
        path.append(min(w for w in adj[u] if dist[w][b] == dist[u][b] - 1))
    return path


def _paths_of_length(target: Geometry, a: int, b: int, length: int, dist) -> list[tuple[int, ...]]:
    """All simple paths with ``length`` edges from ``a`` to ``b``."""
    adj = target.adjacency()
    out = []
    path = [a]

    def rec(u):
        left = length - (len(path) - 1)
        if left == 0:
            if u == b:
                out.append(tuple(path))
            return
        for w in adj[u]:
            if w not in path and dist[w][b] <= left - 1:
                path.append(w)
                rec(w)
                path.pop()

    rec(a)
    return sorted(out)


def _pairs_at(g: Geometry, r: int) -> list[tuple[int, int]]:
    adj = g.adjacency()
    pairs = []
    for v in range(len(adj)):
        dist = _bfs(adj, v, r)
        pairs.extend((v, w) for w in range(v + 1, len(adj)) if dist[w] == r)
    return pairs


def extend_round(st: FreeState, caps: FreeCaps | None = None) -> FreeState:
    """One round: a new (n+1)-path for every stage-entry pair at distance n-1."""
    caps = caps or FreeCaps()
    t0 = time.monotonic()
    n, g, epi, target = st.n, st.geometry, st.epi, st.target
    tdist = distance_matrix(target)
    tp = target.point_count
    vmap = epi.vertex_map()
    rng = random.Random(st.rng_seed * 1_000_003 + st.stage)
    b = _Builder(g, epi.point_map, epi.line_map)
    records = []
    partial = False
    for x, y in _pairs_at(g, n - 1):
        if b.size() + n > caps.max_elements or time.monotonic() - t0 > caps.max_seconds:
            partial = True
            break
        ix, iy = vmap[x], vmap[y]
        k = tdist[ix][iy]
        if k > n - 1 or (n - 1 - k) % 2:
            raise FreeBuildError(f"pair {g.element(x)}, {g.element(y)}: image distance {k}")
        if k < n - 1:
            walk = fold_walk(n + 1, _unique_shortest(target, ix, iy, tdist))
        else:
            choices = _paths_of_length(target, ix, iy, n + 1, tdist)
            if not choices:
                raise FreeBuildError(f"no path of length {n + 1} between images of "
                                     f"{g.element(x)}, {g.element(y)}")
            walk = list(rng.choice(choices))
        inner = [v if v < tp else v - tp for v in walk[1:-1]]
        ex, ey = g.element(x), g.element(y)
        interior = b.path(ex, ey, inner)
        records.append(PathRecord((ex, ey), tuple(interior),
                                  tuple(target.element(v) for v in walk), k))
    geom, new_epi = b.freeze(target)
    new = FreeState(st.stage + 1, n, geom, new_epi, st.added_paths + tuple(records),
                    st.rng_seed, st.seed_config, st.stage0_counts, partial)
    _verify(new, st, records)
    return new


def _verify(st: FreeState, prev: FreeState | None, records=()) -> None:
    g, n = st.geometry, st.n
    v = is_epimorphism(st.epi)
    if not v:
        raise FreeBuildError(f"stage {st.stage}: epimorphism check failed: {v.reason} {v.witness}")
    if not girth_at_least(g, 2 * n):
        raise FreeBuildError(f"stage {st.stage}: girth below {2 * n}")
    if prev is None:
        return
    pg = prev.geometry
    if not (pg.incidence <= g.incidence and g.point_count >= pg.point_count
            and g.line_count >= pg.line_count):
        raise FreeBuildError(f"stage {st.stage}: earlier elements were modified")
    if st.epi.point_map[:pg.point_count] != prev.epi.point_map or \
            st.epi.line_map[:pg.line_count] != prev.epi.line_map:
        raise FreeBuildError(f"stage {st.stage}: epimorphism changed on earlier elements")
    seen = set()
    tdist = distance_matrix(st.target) if records else None
    for rec in records:
        for e in rec.interior:
            old = pg.point_count if e.kind == "point" else pg.line_count
            if e in seen or e.index < old:
                raise FreeBuildError(f"path {rec.endpoints}: element {e} is not fresh")
            seen.add(e)
        x, y = (g.vertex(e) for e in rec.endpoints)
        d = _bfs(g.adjacency(), x, n - 1)[y]
        if d != n - 1:
            raise FreeBuildError(f"treated pair {rec.endpoints} now at distance {d}")
        if rec.target_distance < n - 1:
            route = set(rec.image)
            a, bb = rec.image[0], rec.image[-1]
            shortest = _unique_shortest(st.target, st.target.vertex(a), st.target.vertex(bb), tdist)
            if route != {st.target.element(v) for v in shortest}:
                raise FreeBuildError(f"path {rec.endpoints}: image is not the shortest path")


def convergence(st: FreeState) -> float:
    """Fraction of stage-0 element pairs currently at distance at most n."""
    g, n = st.geometry, st.n
    p0, l0 = st.stage0_counts
    verts = list(range(p0)) + [g.point_count + j for j in range(l0)]
    adj = g.adjacency()
    total = close = 0
    for i, v in enumerate(verts):
        dist = _bfs(adj, v, n)
        for w in verts[i + 1:]:
            total += 1
            if dist[w] <= n:
                close += 1
    return close / total if total else 1.0


def round_report(st: FreeState, treated: int, elapsed: float) -> dict:
    g = st.geometry
    gi, _ = _shortest_cycle(g.adjacency())
    return {
        "round": st.stage,
        "points": g.point_count,
        "lines": g.line_count,
        "elements": g.vertex_count,
        "girth": None if gi is INF else gi,
        "girth_ok": gi >= 2 * st.n,
        "epimorphism": bool(is_epimorphism(st.epi)),
        "connected": is_connected(g),
        "treated_pairs": treated,
        "convergence": convergence(st),
        "partial": st.partial,
        "seconds": round(elapsed, 3),
    }


@dataclass
class FreeRun:
    state: FreeState
    report: list[dict] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return self.state.partial


def run(target: Geometry, n: int, rounds: int, caps: FreeCaps | None = None,
        rng_seed: int = 0) -> FreeRun:
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    caps = caps or FreeCaps()
    t0 = time.monotonic()
    st = seed(target, n, rng_seed)
    out = FreeRun(st, [round_report(st, 0, time.monotonic() - t0)])
    for _ in range(rounds):
        t0 = time.monotonic()
        before = len(st.added_paths)
        st = extend_round(st, caps)
        out.state = st
        out.report.append(round_report(st, len(st.added_paths) - before, time.monotonic() - t0))
        if out.report[-1]["convergence"] < out.report[-2]["convergence"]:
            raise FreeBuildError("convergence audit decreased")
        if st.partial:
            break
    return out
