"""Epimorphisms of thick polygons onto ordinary polygons: builder and classifier.

Class (a) maps are determined by a base line L of the source and an ordered
partition (X, Y) of its point row.  Point fibers are grown layer by layer from
the two cells by collinearity; every source line then maps to the target line
joining the labels of its points.  Class (b) is class (a) applied to the dual.

Letters 0..m-1 stand for the target points a, b, c, ... in cyclic order.  The
per-gonality letter layout below puts the cells where the classical statements
put them: (A, B) on L for planes and quadrangles, (C, B) for hexagons and
octagons, with L mapped onto the line joining the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .catalog import gen_ordinary
from .geometry import Geometry, check_generalized_polygon, check_weak_polygon, dual, order_of
from .morphisms import Morphism, MorphismError, is_epimorphism

LETTERS = "abcdefghijklmnopqrstuvwxyz"

# gonality -> (letter of the first cell, direction in which its side grows)
_LAYOUT = {3: (0, -1), 4: (0, -1), 6: (2, 1), 8: (2, 1)}


class RecipeError(MorphismError):
    pass


@dataclass(frozen=True)
class ClassDescriptor:
    """Data fixing one epimorphism onto an ordinary m-gon.

    ``base_line`` is a line of the source for orientation "a" and a point
    for orientation "b".  ``partition`` is an ordered pair of cells covering
    the base element's point row (pencil for "b").  ``target_labeling[i]`` is
    the target point carrying letter i; for orientation "b" it labels target
    lines instead, since the recipe runs on the duals.
    """

    orientation: str
    base_line: int
    partition: tuple[frozenset[int], frozenset[int]]
    target_labeling: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "partition", tuple(frozenset(c) for c in self.partition))
        object.__setattr__(self, "target_labeling", tuple(self.target_labeling))

    def to_json(self) -> dict:
        return {
            "orientation": self.orientation,
            "base": self.base_line,
            "partition": [sorted(c) for c in self.partition],
            "target_labeling": list(self.target_labeling),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ClassDescriptor":
        return cls(data["orientation"], data["base"],
                   tuple(frozenset(c) for c in data["partition"]), tuple(data["target_labeling"]))


@lru_cache(maxsize=64)
def _is_generalized(g: Geometry, m: int) -> bool:
    return bool(check_generalized_polygon(g, m))


@lru_cache(maxsize=64)
def _is_ordinary(t: Geometry, m: int) -> bool:
    return (t.point_count == m and order_of(t) == (1, 1) and bool(check_weak_polygon(t, m)))


def cyclic_labelings(t: Geometry) -> list[tuple[int, ...]]:
    """All 2m labelings of an ordinary m-gon's points in cyclic order.

    They correspond one-to-one with its type-preserving automorphisms.
    """
    m = t.point_count
    start = 0
    nxt = t.line_points[t.point_lines[start][0]]
    second = nxt[0] if nxt[1] == start else nxt[1]
    cycle = [start, second]
    while len(cycle) < m:
        prev, cur = cycle[-2], cycle[-1]
        for l in t.point_lines[cur]:
            other = [x for x in t.line_points[l] if x != cur][0]
            if other != prev:
                cycle.append(other)
                break
    out = []
    for k in range(m):
        rot = cycle[k:] + cycle[:k]
        out.append(tuple(rot))
        out.append(tuple([rot[0]] + rot[1:][::-1]))
    return sorted(out)


def _joining_line(t: Geometry, x: int, y: int) -> int:
    common = set(t.point_lines[x]) & set(t.point_lines[y])
    if len(common) != 1:
        raise RecipeError(f"target points {x}, {y} are not joined by a unique line")
    return common.pop()


def shell_layers(g: Geometry, m: int, line: int, first, second) -> list[list[frozenset[int]]]:
    """Collinearity layers grown from the two cells on ``line``.

    Returns ``[first_side, second_side]``; each side is the list of its
    layers, depth 0 being the cell itself.  Layer j+1 of a side holds the
    points collinear with layer j that are in neither layer j nor layer j-1
    (for j = 0, not on ``line``).  For odd m each side also carries the
    shared opposite layer as its last entry.
    """
    row = frozenset(g.line_points[line])
    depth = m // 2 if m % 2 else m // 2 - 1
    sides = []
    for cell in (frozenset(first), frozenset(second)):
        layers = [cell]
        for _ in range(depth):
            prev = layers[-1]
            before = layers[-2] if len(layers) > 1 else row
            grown = {q for p in prev for l in g.point_lines[p] for q in g.line_points[l]}
            layers.append(frozenset(grown - prev - before))
        sides.append(layers)
    return sides


def point_letters(g: Geometry, m: int, line: int, first, second) -> list[int]:
    """Letter of every point under the class (a) recipe; raises if the layers
    fail to partition the point set."""
    start, step = _LAYOUT.get(m, (0, -1))
    sides = shell_layers(g, m, line, first, second)
    letters = [-1] * g.point_count
    for side, (origin, direction) in enumerate(((start, step), ((start - step) % m, -step))):
        for j, layer in enumerate(sides[side]):
            letter = (origin + direction * j) % m
            for p in layer:
                if letters[p] not in (-1, letter):
                    raise RecipeError(f"point {p} lies in two shells")
                letters[p] = letter
    if -1 in letters:
        raise RecipeError(f"point {letters.index(-1)} lies in no shell")
    return letters


def line_letters(g: Geometry, m: int, letters: list[int]) -> list[tuple[int, int]]:
    """The pair of adjacent letters carried by each line."""
    out = []
    for l, row in enumerate(g.line_points):
        seen = sorted({letters[p] for p in row})
        if len(seen) != 2 or (seen[1] - seen[0]) % m not in (1, m - 1):
            raise RecipeError(f"line {l} carries letters {seen}, not an edge of the {m}-gon")
        out.append((seen[0], seen[1]))
    return out


def validate_descriptor(g: Geometry, m: int, d: ClassDescriptor, target: Geometry) -> None:
    if d.orientation not in ("a", "b"):
        raise RecipeError(f"orientation must be 'a' or 'b', got {d.orientation!r}")
    src, tgt = (g, target) if d.orientation == "a" else (dual(g), dual(target))
    if not 0 <= d.base_line < src.line_count:
        raise RecipeError(f"base element {d.base_line} out of range")
    first, second = d.partition
    if not first or not second:
        raise RecipeError("partition cells must be nonempty")
    if first & second or (first | second) != set(src.line_points[d.base_line]):
        raise RecipeError("partition must split the base element's shadow into two disjoint cells")
    if d.target_labeling not in cyclic_labelings(tgt):
        raise RecipeError("target labeling is not a cyclic ordering of the target")


def _build_a(g: Geometry, m: int, line: int, first, second, labeling, target: Geometry) -> Morphism:
    letters = point_letters(g, m, line, first, second)
    edges = line_letters(g, m, letters)
    point_map = tuple(labeling[x] for x in letters)
    line_map = tuple(_joining_line(target, labeling[x], labeling[y]) for x, y in edges)
    return Morphism(g, target, point_map, line_map)


def build_recipe_epi(g: Geometry, m: int, d: ClassDescriptor, target: Geometry | None = None,
                     check: bool = True) -> Morphism:
    """The class (a) or (b) epimorphism of ``g`` onto an ordinary m-gon described by ``d``."""
    target = target if target is not None else gen_ordinary(m)
    if check:
        if not _is_generalized(g, m):
            raise RecipeError(f"source is not a thick generalized {m}-gon")
        if not _is_ordinary(target, m):
            raise RecipeError(f"target is not an ordinary {m}-gon")
    validate_descriptor(g, m, d, target)
    first, second = d.partition
    if d.orientation == "a":
        return _build_a(g, m, d.base_line, first, second, d.target_labeling, target)
    return _build_a(dual(g), m, d.base_line, first, second, d.target_labeling, dual(target)).dual()


def all_descriptors(g: Geometry, m: int, target: Geometry | None = None,
                    orientations=("a", "b")):
    """Every descriptor for ``g``: orientation x base x ordered partition x labeling."""
    target = target if target is not None else gen_ordinary(m)
    for orientation in orientations:
        src, tgt = (g, target) if orientation == "a" else (dual(g), dual(target))
        labelings = cyclic_labelings(tgt)
        for base in range(src.line_count):
            row = src.line_points[base]
            for size in range(1, len(row)):
                for cell in combinations(row, size):
                    first = frozenset(cell)
                    second = frozenset(row) - first
                    for lab in labelings:
                        yield ClassDescriptor(orientation, base, (first, second), lab)


def _match_a(mor: Morphism, m: int) -> ClassDescriptor | None:
    g, target = mor.source, mor.target
    labelings = set(cyclic_labelings(target))
    for line in range(g.line_count):
        cells: dict[int, set] = {}
        for p in g.line_points[line]:
            cells.setdefault(mor.point_map[p], set()).add(p)
        if len(cells) != 2:
            continue
        a, b = (frozenset(c) for c in cells.values())
        for first, second in ((a, b), (b, a)):
            try:
                letters = point_letters(g, m, line, first, second)
            except RecipeError:
                continue
            labeling = [-1] * m
            consistent = True
            for p, x in enumerate(letters):
                if labeling[x] == -1:
                    labeling[x] = mor.point_map[p]
                elif labeling[x] != mor.point_map[p]:
                    consistent = False
                    break
            if not consistent or tuple(labeling) not in labelings:
                continue
            try:
                built = _build_a(g, m, line, first, second, labeling, target)
            except RecipeError:
                continue
            if built.key == mor.key:
                return ClassDescriptor("a", line, (first, second), tuple(labeling))
    return None


def classify_epi(mor: Morphism) -> ClassDescriptor | None:
    """A descriptor whose recipe reproduces ``mor`` exactly, or None.

    Class (a) is tried first, then class (b) via the dual morphism.
    """
    m = mor.target.point_count
    if not is_epimorphism(mor):
        raise RecipeError("classification needs an epimorphism")
    if not _is_ordinary(mor.target, m):
        raise RecipeError("target is not an ordinary polygon")
    if not _is_generalized(mor.source, m):
        raise RecipeError(f"source is not a thick generalized {m}-gon")
    found = _match_a(mor, m)
    if found is not None:
        return found
    found = _match_a(mor.dual(), m)
    if found is not None:
        return ClassDescriptor("b", found.base_line, found.partition, found.target_labeling)
    return None


# -- the shell definitions exactly as stated, per gonality ---------------------

def _near(g: Geometry, pts) -> set[int]:
    """Points collinear with (and distinct from) some point of ``pts``."""
    return {q for p in pts for l in g.point_lines[p] for q in g.line_points[l] if q != p}


def _lines_through(g: Geometry, pts) -> set[int]:
    return {l for p in pts for l in g.point_lines[p]}


def literal_fibers(g: Geometry, m: int, line: int, first, second):
    """Point and line fibers of the class (a) map, keyed by letter and letter pair.

    A direct transcription of the plane, quadrangle, hexagon and octagon
    classifications; kept separate from :func:`point_letters` so the two can
    be checked against each other.
    """
    row = set(g.line_points[line])
    X, Y = set(first), set(second)
    allp = set(range(g.point_count))
    off = allp - row
    if m == 3:
        A, B = X, Y
        C = off
        pf = {"a": A, "b": B, "c": C}
        lf = {"ab": {line}, "bc": _lines_through(g, B) - {line}, "ac": _lines_through(g, A) - {line}}
    elif m == 4:
        A, B = X, Y
        C = _near(g, B) & off
        D = _near(g, A) & off
        pf = {"a": A, "b": B, "c": C, "d": D}
        lf = {
            "ab": {line},
            "bc": _lines_through(g, B) - {line},
            "ad": _lines_through(g, A) - {line},
            "cd": _lines_through(g, C) & _lines_through(g, D),
        }
    elif m == 6:
        C, B = X, Y
        D = _near(g, C) & off
        A = _near(g, B) & off
        E = _near(g, D) - C - D
        F = _near(g, A) - A - B
        bc = {line}
        cd = _lines_through(g, C) - {line}
        ab = _lines_through(g, B) - {line}
        de = _lines_through(g, D) - cd
        fa = _lines_through(g, A) - ab
        fe = _lines_through(g, F) - fa
        pf = {"a": A, "b": B, "c": C, "d": D, "e": E, "f": F}
        lf = {"bc": bc, "cd": cd, "ab": ab, "de": de, "af": fa, "ef": fe}
    elif m == 8:
        C, B = X, Y
        D = _near(g, C) & off
        A = _near(g, B) & off
        E = _near(g, D) - C - D
        H = _near(g, A) - A - B
        F = _near(g, E) - D - E
        G = _near(g, H) - A - H
        bc = {line}
        cd = _lines_through(g, C) - {line}
        ab = _lines_through(g, B) - {line}
        de = _lines_through(g, D) - cd
        ah = _lines_through(g, A) - ab
        ef = _lines_through(g, E) - de
        gh = _lines_through(g, H) - ah
        fg = _lines_through(g, G) - gh
        pf = {"a": A, "b": B, "c": C, "d": D, "e": E, "f": F, "g": G, "h": H}
        lf = {"bc": bc, "cd": cd, "ab": ab, "de": de, "ah": ah, "ef": ef, "gh": gh, "fg": fg}
    else:
        raise RecipeError(f"no literal recipe for gonality {m}")
    return ({k: frozenset(v) for k, v in pf.items()},
            {k: frozenset(v) for k, v in lf.items()})
