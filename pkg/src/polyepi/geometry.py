"""Finite point-line geometries and their incidence-graph metrics.

A geometry is stored as a bipartite incidence graph.  Throughout the package
the incidence graph uses *vertex ids*: point ``p`` is vertex ``p`` and line
``L`` is vertex ``point_count + L``.  :class:`Element` is the public,
kind-tagged view of a vertex.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

INF = math.inf


class GeometryError(ValueError):
    """Raised for malformed geometry data (bad indices, duplicates, parse errors)."""


class Element(NamedTuple):
    kind: str  # "point" or "line"
    index: int

    def __str__(self) -> str:
        return f"{self.kind[0]}{self.index}"


def P(i: int) -> Element:
    return Element("point", i)


def L(i: int) -> Element:
    return Element("line", i)


class Order(NamedTuple):
    """Order (s, t): lines carry s+1 points, points lie on t+1 lines."""

    s: int
    t: int

    def swapped(self) -> "Order":
        return Order(self.t, self.s)


@dataclass(frozen=True, eq=False)
class Geometry:
    """Immutable finite incidence structure.

    ``incidence`` holds ``(point, line)`` pairs.  Use :meth:`from_lines` or
    :meth:`from_incidences` to build one; both validate indices and reject
    duplicate incidences.
    """

    point_count: int
    line_count: int
    incidence: frozenset
    name: str | None = None
    point_lines: tuple = field(default=(), repr=False)
    line_points: tuple = field(default=(), repr=False)

    @classmethod
    def from_incidences(cls, point_count: int, line_count: int,
                        pairs: Iterable[tuple[int, int]], name: str | None = None) -> "Geometry":
        if point_count < 0 or line_count < 0:
            raise GeometryError("counts must be nonnegative")
        rows: list[list[int]] = [[] for _ in range(point_count)]
        cols: list[list[int]] = [[] for _ in range(line_count)]
        seen = set()
        for p, l in pairs:
            if not (0 <= p < point_count):
                raise GeometryError(f"point index {p} out of range (0..{point_count - 1})")
            if not (0 <= l < line_count):
                raise GeometryError(f"line index {l} out of range (0..{line_count - 1})")
            if (p, l) in seen:
                raise GeometryError(f"duplicate incidence (point {p}, line {l})")
            seen.add((p, l))
            rows[p].append(l)
            cols[l].append(p)
        return cls(point_count, line_count, frozenset(seen), name,
                   tuple(tuple(sorted(r)) for r in rows),
                   tuple(tuple(sorted(c)) for c in cols))

    @classmethod
    def from_lines(cls, point_count: int, lines: Iterable[Iterable[int]],
                   name: str | None = None) -> "Geometry":
        lines = [list(row) for row in lines]
        pairs = [(p, j) for j, row in enumerate(lines) for p in row]
        return cls.from_incidences(point_count, len(lines), pairs, name)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Geometry):
            return NotImplemented
        return (self.point_count == other.point_count
                and self.line_count == other.line_count
                and self.incidence == other.incidence)

    def __hash__(self) -> int:
        return hash((self.point_count, self.line_count, self.incidence))

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return (f"<Geometry{label}: {self.point_count} points, {self.line_count} lines, "
                f"{len(self.incidence)} flags>")

    def renamed(self, name: str | None) -> "Geometry":
        return Geometry(self.point_count, self.line_count, self.incidence, name,
                        self.point_lines, self.line_points)

    # -- vertex-id helpers -------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return self.point_count + self.line_count

    def vertex(self, e: Element) -> int:
        self.check_element(e)
        return e.index if e.kind == "point" else self.point_count + e.index

    def element(self, v: int) -> Element:
        if v < self.point_count:
            return P(v)
        return L(v - self.point_count)

    def check_element(self, e: Element) -> None:
        if e.kind == "point":
            ok = 0 <= e.index < self.point_count
        elif e.kind == "line":
            ok = 0 <= e.index < self.line_count
        else:
            raise GeometryError(f"unknown element kind {e.kind!r}")
        if not ok:
            raise GeometryError(f"invalid element {e}")

    def neighbors(self, v: int) -> tuple:
        """Neighbours of vertex ``v`` in the incidence graph, as vertex ids."""
        n = self.point_count
        if v < n:
            return tuple(n + l for l in self.point_lines[v])
        return self.line_points[v - n]

    def adjacency(self) -> list[tuple]:
        return self._adjacency

    @cached_property
    def _adjacency(self) -> list[tuple]:
        return [self.neighbors(v) for v in range(self.vertex_count)]

    def incident(self, p: int, l: int) -> bool:
        return (p, l) in self.incidence

    def flags(self) -> list[tuple[int, int]]:
        """Incident (point, line) pairs in point-major order."""
        return [(p, l) for p in range(self.point_count) for l in self.point_lines[p]]

    def degrees(self) -> list[int]:
        return [len(r) for r in self.point_lines] + [len(c) for c in self.line_points]


# -- distances -------------------------------------------------------------

def bfs_distances(g: Geometry, source: int, limit: int | None = None) -> list:
    """Incidence-graph distances from vertex ``source`` (INF when unreachable)."""
    adj = g.adjacency()
    return _bfs(adj, source, limit)


def _bfs(adj, source, limit=None):
    dist: list = [INF] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        if limit is not None and du >= limit:
            continue
        for w in adj[u]:
            if dist[w] is INF:
                dist[w] = du + 1
                queue.append(w)
    return dist


def distance_matrix(g: Geometry) -> list[list]:
    """All-pairs incidence distances.  Intended for small geometries only."""
    adj = g.adjacency()
    return [_bfs(adj, v) for v in range(len(adj))]


def incidence_distance(g: Geometry, a: Element, b: Element):
    """Length of a shortest path between ``a`` and ``b`` in the incidence graph."""
    va, vb = g.vertex(a), g.vertex(b)
    return bfs_distances(g, va)[vb]


def diameter(g: Geometry):
    """Largest incidence distance; INF for disconnected geometries, 0 if empty."""
    adj = g.adjacency()
    best = 0
    for v in range(len(adj)):
        d = max(_bfs(adj, v), default=0)
        if d > best:
            best = d
            if d is INF:
                return INF
    return best


def is_connected(g: Geometry) -> bool:
    if g.vertex_count == 0:
        return True
    return INF not in bfs_distances(g, 0)


def shortest_path(g: Geometry, a: int, b: int) -> list[int] | None:
    """One shortest path of vertex ids from ``a`` to ``b``, or None."""
    adj = g.adjacency()
    parent = {a: None}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        if u == b:
            break
        for w in adj[u]:
            if w not in parent:
                parent[w] = u
                queue.append(w)
    if b not in parent:
        return None
    path = [b]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


# -- girth -----------------------------------------------------------------

def _shortest_cycle(adj, bound=INF):
    """Return (length, cycle) of a shortest circuit shorter than ``bound``.

    BFS from every vertex; the search from each root stops at depth bound/2,
    which keeps the cost near-linear on sparse graphs of large girth.
    """
    best, best_cycle = bound, None
    n = len(adj)
    for root in range(n):
        dist = {root: 0}
        parent = {root: None}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            du = dist[u]
            if 2 * du >= best:
                break
            for w in adj[u]:
                if w == parent[u]:
                    continue
                if w in dist:
                    length = du + dist[w] + 1
                    if length < best:
                        best = length
                        best_cycle = _close_cycle(parent, u, w)
                else:
                    dist[w] = du + 1
                    parent[w] = u
                    queue.append(w)
    return best, best_cycle


def _close_cycle(parent, u, w):
    left = [u]
    while parent[left[-1]] is not None:
        left.append(parent[left[-1]])
    right = [w]
    while parent[right[-1]] is not None:
        right.append(parent[right[-1]])
    # trim the shared tail so the closed walk is a circuit through the branch point
    while len(left) > 1 and len(right) > 1 and left[-2] == right[-2]:
        left.pop()
        right.pop()
    return left[::-1] + right[:-1]


def girth(g: Geometry):
    """Length of a minimal circuit of the incidence graph (INF if acyclic)."""
    length, _ = _shortest_cycle(g.adjacency())
    if length is not INF:
        assert length % 2 == 0, "bipartite graphs have even girth"
    return length


def short_circuit(g: Geometry, bound) -> list[Element] | None:
    """A circuit of length < ``bound``, as elements, or None."""
    _, cycle = _shortest_cycle(g.adjacency(), bound)
    if cycle is None:
        return None
    return [g.element(v) for v in cycle]


def girth_at_least(g: Geometry, bound: int) -> bool:
    return _shortest_cycle(g.adjacency(), bound)[1] is None


def gonality(g: Geometry):
    gi = girth(g)
    return INF if gi is INF else gi // 2


# -- local properties ------------------------------------------------------

def is_firm(g: Geometry) -> bool:
    return g.vertex_count > 0 and min(g.degrees()) >= 2


def is_thick(g: Geometry) -> bool:
    return g.vertex_count > 0 and min(g.degrees()) >= 3


def order_of(g: Geometry) -> Order | None:
    if g.point_count == 0 or g.line_count == 0:
        return None
    line_sizes = {len(c) for c in g.line_points}
    pencil_sizes = {len(r) for r in g.point_lines}
    if len(line_sizes) != 1 or len(pencil_sizes) != 1:
        return None
    s, t = line_sizes.pop() - 1, pencil_sizes.pop() - 1
    if s < 1 or t < 1:
        return None
    return Order(s, t)


def dual(g: Geometry) -> Geometry:
    """Point-line dual: points and lines swap roles, incidence is transposed."""
    name = None
    if g.name:
        name = g.name[5:-1] if g.name.startswith("dual(") and g.name.endswith(")") else f"dual({g.name})"
    return Geometry.from_incidences(g.line_count, g.point_count,
                                    ((l, p) for p, l in g.incidence), name)


# -- polygon axioms --------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def _first_low_degree(g: Geometry, minimum: int):
    for v, d in enumerate(g.degrees()):
        if d < minimum:
            return g.element(v)
    return None


def check_weak_polygon(g: Geometry, n: int) -> Verdict:
    """Firmness plus axioms (Ia) and (Ib) for a weak generalized n-gon.

    (Ia) is tested as girth >= 2n, (Ib) as every pair at distance <= n.
    Witnesses are reported in point-major, index-ascending order.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    bad = _first_low_degree(g, 2) if g.vertex_count else None
    if g.vertex_count == 0:
        return Verdict(False, "empty geometry is not firm")
    if bad is not None:
        return Verdict(False, "not firm", (bad,))
    if n == 2:
        for p in range(g.point_count):
            for l in range(g.line_count):
                if not g.incident(p, l):
                    return Verdict(False, "not a generalized digon: non-incident pair", (P(p), L(l)))
        return Verdict(True)
    cycle = short_circuit(g, 2 * n)
    if cycle is not None:
        return Verdict(False, f"circuit of length {len(cycle)} < {2 * n}", tuple(cycle))
    adj = g.adjacency()
    for v in range(len(adj)):
        dist = _bfs(adj, v)
        for w in range(v + 1, len(adj)):
            if dist[w] > n:
                return Verdict(False, f"pair at distance {dist[w]} > {n}", (g.element(v), g.element(w)))
    return Verdict(True)


def check_weak_polygon_metric(g: Geometry, n: int) -> bool:
    """Independent criterion: firm, girth exactly 2n and diameter exactly n."""
    return is_firm(g) and girth(g) == 2 * n and diameter(g) == n


def find_ordinary_subpolygon(g: Geometry, k: int) -> list[Element] | None:
    """A circuit of length exactly 2k (an ordinary sub k-gon), or None.

    Depth-first search for simple cycles rooted at their smallest vertex.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    adj = g.adjacency()
    target = 2 * k
    for root in range(len(adj)):
        # vertices of a 2k-circuit through root lie within distance k of it
        back = _bfs(adj, root, k)
        path = [root]
        on_path = {root}

        def extend(u):
            if len(path) == target:
                return root in adj[u]
            remaining = target - len(path)
            for w in adj[u]:
                if w > root and w not in on_path and back[w] <= remaining:
                    path.append(w)
                    on_path.add(w)
                    if extend(w):
                        return True
                    path.pop()
                    on_path.discard(w)
            return False

        if extend(root):
            return [g.element(v) for v in path]
    return None


def check_generalized_polygon(g: Geometry, n: int) -> Verdict:
    if n < 3:
        raise ValueError("n must be at least 3")
    weak = check_weak_polygon(g, n)
    if not weak:
        return weak
    if find_ordinary_subpolygon(g, n + 1) is None:
        return Verdict(False, f"thin: no ordinary sub {n + 1}-gon", (_first_low_degree(g, 3),))
    assert is_thick(g), "a weak polygon with an ordinary sub (n+1)-gon is thick"
    return Verdict(True)
