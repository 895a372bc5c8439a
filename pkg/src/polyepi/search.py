"""Backtracking oracles: epimorphism enumeration, isomorphism, induced embeddings.

All three searches share one engine.  Source elements are assigned in a fixed
BFS order; after each assignment the domains of the unassigned elements are
narrowed with precomputed target distance balls (bitmasks), which enforces
incidence preservation and distance nonexpansiveness between assigned and
unassigned elements at once.  Surjectivity is propagated by requiring that
every target element is either already hit or still in some open domain.
"""

from __future__ import annotations

import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .geometry import INF, Geometry, distance_matrix, dual, is_connected
from .morphisms import Morphism


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int = 50_000_000
    max_seconds: float = 600.0
    parallel_width: int = 1

    def __post_init__(self):
        if self.max_nodes <= 0 or self.max_seconds <= 0 or self.parallel_width <= 0:
            raise ValueError("budget fields must be positive")


@dataclass
class SearchResult:
    complete: bool
    count: int = 0
    nodes: int = 0
    elapsed: float = 0.0
    morphisms: list[Morphism] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "exhausted" if self.complete else "budget exceeded"


_BIG = 1 << 30


def _int_dist(rows):
    return [[_BIG if d is INF else d for d in row] for row in rows]


def _search_order(g: Geometry) -> list[int]:
    """BFS order of vertices from a line of maximum degree (a point if there are no lines)."""
    n = g.vertex_count
    if n == 0:
        return []
    adj = g.adjacency()
    degs = g.degrees()
    if g.line_count:
        start = max(range(g.point_count, n), key=lambda v: (degs[v], -v))
    else:
        start = 0
    order, seen = [], set()
    for root in [start] + list(range(n)):
        if root in seen:
            continue
        seen.add(root)
        queue = deque([root])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


class _Engine:
    """Shared state of one search.  ``mode`` is "epi", "iso" or "embed"."""

    def __init__(self, src: Geometry, tgt: Geometry, mode: str):
        self.src, self.tgt, self.mode = src, tgt, mode
        self.ns, self.nt = src.vertex_count, tgt.vertex_count
        self.ds = _int_dist(distance_matrix(src))
        dt = _int_dist(distance_matrix(tgt))
        self.order = _search_order(src)
        tp = tgt.point_count
        self.point_mask = (1 << tp) - 1
        self.line_mask = ((1 << self.nt) - 1) ^ self.point_mask
        self.full = (1 << self.nt) - 1
        # balls[v][r]: target vertices within distance r of v (exact spheres for iso)
        finite = [d for row in dt for d in row if d < _BIG]
        self.max_r = max(finite, default=0)
        self.balls = []
        for v in range(self.nt):
            spheres = [0] * (self.max_r + 2)
            for w, d in enumerate(dt[v]):
                spheres[d if d < _BIG else self.max_r + 1] |= 1 << w
            if mode == "iso":
                self.balls.append(spheres)
            else:
                acc, cumulative = 0, []
                for s in spheres:
                    acc |= s
                    cumulative.append(acc)
                self.balls.append(cumulative)
        self.adj_t = [0] * self.nt
        for v in range(self.nt):
            for w in tgt.neighbors(v):
                self.adj_t[v] |= 1 << w
        self.initial = self._initial_domains()

    def _initial_domains(self) -> list[int]:
        sp = self.src.point_count
        dom = [self.point_mask if x < sp else self.line_mask for x in range(self.ns)]
        if self.mode in ("iso", "embed"):
            ds, dt = self.src.degrees(), self.tgt.degrees()
            for x in range(self.ns):
                keep = 0
                for w in range(self.nt):
                    if (dom[x] >> w) & 1 and (dt[w] == ds[x] if self.mode == "iso" else dt[w] >= ds[x]):
                        keep |= 1 << w
                dom[x] = keep
        return dom

    def _constraint(self, x: int, v: int, y: int) -> int:
        d = self.ds[x][y]
        balls = self.balls[v]
        if d >= _BIG:
            return balls[self.max_r + 1] if self.mode == "iso" else self.full
        if self.mode == "iso":
            return balls[d] if d <= self.max_r else 0
        mask = balls[min(d, self.max_r)]
        if self.mode == "embed" and d > 1 and (d % 2 == 1):
            mask &= ~self.adj_t[v]
        return mask

    def propagate(self, dom: list[int], pos: int, v: int) -> list[int] | None:
        """Domains after assigning ``order[pos] := v``, or None on a wipe-out."""
        x = self.order[pos]
        new = list(dom)
        new[x] = 1 << v
        injective = self.mode != "epi"
        bit = 1 << v
        for y in self.order[pos + 1:]:
            nd = new[y] & self._constraint(x, v, y)
            if injective:
                nd &= ~bit
            if not nd:
                return None
            new[y] = nd
        if self.mode == "epi":
            reach = 0
            for y in range(self.ns):
                reach |= new[y]
            if reach != self.full:
                return None
        return new

    def run(self, dom, pos, emit, counter, deadline, max_nodes):
        if pos == self.ns:
            emit(dom)
            return
        x = self.order[pos]
        mask = dom[x]
        while mask:
            low = mask & -mask
            v = low.bit_length() - 1
            mask ^= low
            counter[0] += 1
            if counter[0] > max_nodes or (counter[0] & 1023 == 0 and time.monotonic() > deadline):
                raise SearchBudgetExceeded
            new = self.propagate(dom, pos, v)
            if new is not None:
                self.run(new, pos + 1, emit, counter, deadline, max_nodes)

    def prefixes(self, depth: int):
        """Consistent partial assignments of the first ``depth`` variables."""
        out = []

        def rec(dom, pos):
            if pos == depth or pos == self.ns:
                out.append((pos, dom))
                return
            mask = dom[self.order[pos]]
            while mask:
                low = mask & -mask
                mask ^= low
                new = self.propagate(dom, pos, low.bit_length() - 1)
                if new is not None:
                    rec(new, pos + 1)

        if self.mode != "epi" or self._start_ok():
            rec(self.initial, 0)
        return out

    def _start_ok(self) -> bool:
        reach = 0
        for d in self.initial:
            reach |= d
        return reach == self.full

    def decode(self, dom: list[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
        tp = self.tgt.point_count
        vals = [d.bit_length() - 1 for d in dom]
        sp = self.src.point_count
        return tuple(vals[:sp]), tuple(v - tp for v in vals[sp:])


def _run_subtrees(src, tgt, mode, tasks, max_nodes, deadline, keep, limit=None):
    """Run the listed (pos, dom) subtrees; returns (keys, count, nodes, complete)."""
    engine = _Engine(src, tgt, mode)
    keys, counter, count = [], [0], 0
    complete = True

    class _Enough(Exception):
        pass

    def emit(dom):
        nonlocal count
        count += 1
        if keep:
            keys.append(engine.decode(dom))
        if limit is not None and count >= limit:
            raise _Enough

    try:
        for pos, dom in tasks:
            engine.run(dom, pos, emit, counter, deadline, max_nodes)
    except SearchBudgetExceeded:
        complete = False
    except _Enough:
        pass
    return keys, count, counter[0], complete


def _worker(args):
    return _run_subtrees(*args)


def _search(src: Geometry, tgt: Geometry, mode: str, budget: SearchBudget,
            keep: bool = True, limit: int | None = None) -> SearchResult:
    t0 = time.monotonic()
    deadline = t0 + budget.max_seconds
    if src.vertex_count == 0:
        ok = mode != "epi" or tgt.vertex_count == 0
        res = SearchResult(True, int(ok), 0, 0.0)
        if ok and keep:
            res.morphisms.append(Morphism(src, tgt, (), ()))
        return res
    engine = _Engine(src, tgt, mode)
    width = budget.parallel_width
    if width == 1 or limit is not None:
        tasks = engine.prefixes(0)
        keys, count, nodes, complete = _run_subtrees(src, tgt, mode, tasks, budget.max_nodes,
                                                     deadline, keep, limit)
    else:
        depth, tasks = 1, engine.prefixes(1)
        while len(tasks) < 8 * width and depth < min(6, engine.ns):
            depth += 1
            tasks = engine.prefixes(depth)
        chunks = [tasks[i::width] for i in range(width)]
        jobs = [(src, tgt, mode, chunk, budget.max_nodes, deadline, keep) for chunk in chunks if chunk]
        keys, count, nodes, complete = [], 0, 0, True
        with ProcessPoolExecutor(max_workers=width) as pool:
            for k, c, n, ok in pool.map(_worker, jobs):
                keys.extend(k)
                count += c
                nodes += n
                complete = complete and ok
        if nodes > budget.max_nodes:
            complete = False
    keys.sort()
    morphisms = [Morphism(src, tgt, pm, lm) for pm, lm in keys]
    return SearchResult(complete, count, nodes, time.monotonic() - t0, morphisms)


def _require_connected(*gs: Geometry) -> None:
    for g in gs:
        if not is_connected(g):
            raise ValueError(f"{g!r} is not connected")


def enumerate_epimorphisms(src: Geometry, tgt: Geometry,
                           budget: SearchBudget | None = None) -> SearchResult:
    """Every incidence-preserving map surjective on points and lines, in canonical order."""
    _require_connected(src, tgt)
    return _search(src, tgt, "epi", budget or SearchBudget())


def count_epimorphisms(src: Geometry, tgt: Geometry,
                       budget: SearchBudget | None = None) -> SearchResult:
    _require_connected(src, tgt)
    return _search(src, tgt, "epi", budget or SearchBudget(), keep=False)


def _distance_profile(g: Geometry):
    rows = distance_matrix(g)
    n = g.point_count
    prof = [tuple(sorted(row)) for row in rows]
    return sorted(prof[:n]), sorted(prof[n:])


def is_isomorphic(g: Geometry, h: Geometry, budget: SearchBudget | None = None) -> Morphism | None:
    """An isomorphism g -> h (bijective, incidence preserving and reflecting), or None."""
    if g.point_count != h.point_count or g.line_count != h.line_count:
        return None
    if len(g.incidence) != len(h.incidence):
        return None
    if (sorted(len(r) for r in g.point_lines) != sorted(len(r) for r in h.point_lines)
            or sorted(len(c) for c in g.line_points) != sorted(len(c) for c in h.line_points)):
        return None
    if _distance_profile(g) != _distance_profile(h):
        return None
    res = _search(g, h, "iso", budget or SearchBudget(), limit=1)
    if res.morphisms:
        return res.morphisms[0]
    if not res.complete:
        raise SearchBudgetExceeded("isomorphism search exceeded its budget")
    return None


def iso_up_to_duality(g: Geometry, h: Geometry, budget: SearchBudget | None = None):
    """(morphism, dualized) for an isomorphism from g onto h or onto dual(h); None if neither."""
    found = is_isomorphic(g, h, budget)
    if found is not None:
        return found, False
    found = is_isomorphic(g, dual(h), budget)
    if found is not None:
        return found, True
    return None


def find_subgeometry_embedding(small: Geometry, big: Geometry,
                               budget: SearchBudget | None = None) -> Morphism | None:
    """Injective map onto an induced substructure of ``big``, or None."""
    if small.point_count > big.point_count or small.line_count > big.line_count:
        return None
    res = _search(small, big, "embed", budget or SearchBudget(), limit=1)
    if res.morphisms:
        return res.morphisms[0]
    if not res.complete:
        raise SearchBudgetExceeded("embedding search exceeded its budget")
    return None
