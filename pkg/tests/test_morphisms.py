import random

import pytest

from polyepi.catalog import CATALOG_IDS, gen_ordinary, parse_catalog_id
from polyepi.geometry import check_generalized_polygon, distance_matrix, dual, girth, is_thick
from polyepi.morphisms import (
    Morphism, MorphismError, check_row_saturation, fibers, identity, is_bijective, is_epimorphism,
    nonexpansive_violations, verify_morphism,
)
from polyepi.recipes import (
    LETTERS, ClassDescriptor, RecipeError, all_descriptors, build_recipe_epi, classify_epi,
    cyclic_labelings, literal_fibers, point_letters, shell_layers,
)

THICK = [(cid, girth(parse_catalog_id(cid)) // 2) for cid in CATALOG_IDS
         if is_thick(parse_catalog_id(cid))]


def first_descriptor(g, line=0, first_size=1, orientation="a", labeling_index=0):
    src = g if orientation == "a" else dual(g)
    row = src.line_points[line]
    m = girth(g) // 2
    tgt = gen_ordinary(m) if orientation == "a" else dual(gen_ordinary(m))
    first = frozenset(row[:first_size])
    return ClassDescriptor(orientation, line, (first, frozenset(row) - first),
                           cyclic_labelings(tgt)[labeling_index])


class TestVerify:
    def test_identity(self, fano, w2):
        assert verify_morphism(identity(fano))
        assert is_epimorphism(identity(w2))
        assert is_bijective(identity(w2))

    def test_constant_onto_flag(self):
        hexagon = gen_ordinary(6)
        p, l = hexagon.flags()[0]
        m = Morphism(hexagon, hexagon, (p,) * 6, (l,) * 6)
        assert verify_morphism(m)
        assert not is_epimorphism(m)

    def test_broken_row(self, fano):
        # send two points of line 0 to non-collinear images
        pm = list(range(7))
        a, b, c = fano.line_points[0]
        outside = next(x for x in range(7) if x not in (a, b, c))
        pm[c] = outside
        v = verify_morphism(Morphism(fano, fano, tuple(pm), tuple(range(7))))
        assert not v and v.witness

    def test_size_mismatch(self, fano):
        with pytest.raises(MorphismError):
            Morphism(fano, fano, (0,) * 6, tuple(range(7)))
        with pytest.raises(MorphismError):
            Morphism(fano, fano, (7,) * 7, tuple(range(7)))

    def test_inclusion_is_not_epi(self, triangle, fano):
        from polyepi.search import find_subgeometry_embedding
        m = find_subgeometry_embedding(triangle, fano)
        assert verify_morphism(m) and not is_epimorphism(m)


class TestFibers:
    def test_identity_singletons(self, fano):
        f = fibers(identity(fano))
        assert all(len(v) == 1 for v in f.point_fibers.values())
        assert all(len(v) == 1 for v in f.line_fibers.values())

    def test_recipe_fibers(self, fano, triangle):
        d = first_descriptor(fano, first_size=2)  # (A, B) with |B| = 1
        m = build_recipe_epi(fano, 3, d)
        lab = d.target_labeling
        f = fibers(m)
        assert f.point_fibers[lab[1]] == d.partition[1] and len(d.partition[1]) == 1
        ab_line = set(triangle.point_lines[lab[0]]) & set(triangle.point_lines[lab[1]])
        assert f.line_fibers[ab_line.pop()] == {0}

    def test_fibers_need_epi(self, fano):
        with pytest.raises(MorphismError):
            fibers(Morphism(fano, fano, (0,) * 7, (0,) * 7))


class TestRecipes:
    def test_fano_example(self, fano):
        m = build_recipe_epi(fano, 3, first_descriptor(fano))
        assert is_epimorphism(m)
        assert classify_epi(m) is not None

    def test_w2_fiber_sizes(self, w2):
        # brute-force shells: A = first cell, B = second, C and D the off-line
        # points collinear with B resp. A
        d = first_descriptor(w2, first_size=1)
        m = build_recipe_epi(w2, 4, d)
        assert is_epimorphism(m)
        f = fibers(m)
        lab = d.target_labeling
        A, B = d.partition
        row = set(w2.line_points[0])
        coll = lambda S: {q for p in S for l in w2.point_lines[p] for q in w2.line_points[l]} - row
        sizes = tuple(len(f.point_fibers[lab[i]]) for i in range(4))
        assert sizes == (len(A), len(B), len(coll(B)), len(coll(A))) == (1, 2, 8, 4)

    def test_empty_cell(self, w2):
        row = frozenset(w2.line_points[0])
        d = ClassDescriptor("a", 0, (frozenset(), row), cyclic_labelings(gen_ordinary(4))[0])
        with pytest.raises(RecipeError, match="nonempty"):
            build_recipe_epi(w2, 4, d)

    def test_wrong_partition(self, w2):
        d = ClassDescriptor("a", 0, (frozenset({0}), frozenset({1})),
                            cyclic_labelings(gen_ordinary(4))[0])
        with pytest.raises(RecipeError):
            build_recipe_epi(w2, 4, d)

    def test_thin_source_rejected(self, octagon, grid2):
        with pytest.raises(RecipeError):
            classify_epi(identity(octagon))
        with pytest.raises(RecipeError):
            build_recipe_epi(grid2, 4, first_descriptor(grid2))

    def test_non_epi_rejected_by_saturation(self, fano):
        with pytest.raises(MorphismError):
            check_row_saturation(Morphism(fano, fano, (0,) * 7, (0,) * 7))

    def test_labelings(self, octagon):
        labs = cyclic_labelings(octagon)
        assert len(labs) == len(set(labs)) == 16

    def test_descriptor_json(self, fano):
        d = first_descriptor(fano, orientation="b")
        assert ClassDescriptor.from_json(d.to_json()) == d


@pytest.mark.parametrize("cid,m", [(c, m) for c, m in THICK if m in (3, 4)])
def test_literal_shells_match_layers(cid, m):
    """The layer propagation reproduces the per-gonality definitions."""
    g = parse_catalog_id(cid)
    tgt = gen_ordinary(m)
    rng = random.Random(cid)
    descriptors = [d for d in all_descriptors(g, m, tgt, orientations=("a",))
                   if d.target_labeling == cyclic_labelings(tgt)[0]]
    for d in rng.sample(descriptors, min(40, len(descriptors))):
        first, second = d.partition
        letters = point_letters(g, m, d.base_line, first, second)
        pf, lf = literal_fibers(g, m, d.base_line, first, second)
        for i in range(m):
            assert {p for p, x in enumerate(letters) if x == i} == pf[LETTERS[i]]
        built = build_recipe_epi(g, m, d, tgt)
        lab = d.target_labeling
        for pair, lines in lf.items():
            x, y = (lab[LETTERS.index(c)] for c in pair)
            edge = (set(tgt.point_lines[x]) & set(tgt.point_lines[y])).pop()
            assert {l for l, t in enumerate(built.line_map) if t == edge} == lines


@pytest.mark.parametrize("cid,m", THICK)
def test_shells_partition_points(cid, m):
    g = parse_catalog_id(cid)
    rng = random.Random(0)
    for _ in range(20):
        line = rng.randrange(g.line_count)
        row = list(g.line_points[line])
        rng.shuffle(row)
        k = rng.randrange(1, len(row))
        first, second = frozenset(row[:k]), frozenset(row[k:])
        layers = [layer for side in shell_layers(g, m, line, first, second) for layer in side]
        union = set()
        if m % 2:
            # the shared opposite layer closes both sides
            assert layers[m // 2] == layers[-1]
            layers = layers[:-1]
        for layer in layers:
            assert union.isdisjoint(layer)
            union |= layer
        assert union == set(range(g.point_count))


@pytest.mark.parametrize("cid,m", [("plane:2", 3), ("gq:2", 4), ("plane:3", 3)])
def test_round_trip_every_descriptor(cid, m):
    g = parse_catalog_id(cid)
    tgt = gen_ordinary(m)
    for d in all_descriptors(g, m, tgt):
        built = build_recipe_epi(g, m, d, tgt)
        found = classify_epi(built)
        assert found is not None
        assert build_recipe_epi(g, m, found, tgt).key == built.key
        if d.orientation == "a":
            # the base line is the only preimage of the edge joining the two cells
            cells = {built.point_map[p] for p in g.line_points[d.base_line]}
            assert len(cells) == 2
            assert built.line_map.count(built.line_map[d.base_line]) == 1
            assert check_row_saturation(built)


def test_class_b_is_dual_of_class_a(w2):
    d = first_descriptor(w2, orientation="b")
    m_b = build_recipe_epi(w2, 4, d)
    d_a = ClassDescriptor("a", d.base_line, d.partition, d.target_labeling)
    m_a = build_recipe_epi(dual(w2), 4, d_a, dual(gen_ordinary(4)))
    assert m_b.dual().key == m_a.key


def test_nonexpansive(fano, w2):
    for g, m in ((fano, 3), (w2, 4)):
        d = first_descriptor(g)
        assert nonexpansive_violations(build_recipe_epi(g, m, d)) == []
    assert nonexpansive_violations(identity(w2)) == []


def test_nonexpansive_detects_stretching():
    # a genuine morphism never stretches, so feed a doctored source metric
    g = gen_ordinary(6)
    m = Morphism(g, g, tuple(range(6)), tuple(range(6)))
    d_src = distance_matrix(g)
    bad = [row[:] for row in d_src]
    bad[0][6] = bad[6][0] = 0  # pretend point 0 and line 0 coincide in the source
    assert nonexpansive_violations(m, src_dist=bad) == [(0, 6)]


def test_generalized_checks_are_cached_by_value(fano):
    # same geometry rebuilt by value works with the recipe precondition checks
    again = parse_catalog_id("plane:2")
    assert again == fano and hash(again) == hash(fano)
    assert check_generalized_polygon(again, 3)


@pytest.mark.parametrize("cid,m", [("thin:6:2", 6), ("thin:6:3", 6), ("thin:8:2", 8), ("thin:8:3", 8)])
def test_literal_shells_match_layers_hexagons_octagons(cid, m):
    """No thick hexagon or octagon is in the catalog, so the hexagon and octagon
    definitions are compared with the layers on thin polygons, every partition."""
    from itertools import combinations

    from polyepi.recipes import line_letters

    g = parse_catalog_id(cid)
    for line in range(g.line_count):
        row = g.line_points[line]
        for k in range(1, len(row)):
            for cell in combinations(row, k):
                first = frozenset(cell)
                second = frozenset(row) - first
                letters = point_letters(g, m, line, first, second)
                edges = line_letters(g, m, letters)
                pf, lf = literal_fibers(g, m, line, first, second)
                for i in range(m):
                    assert {p for p, x in enumerate(letters) if x == i} == pf[LETTERS[i]]
                for pair, lines in lf.items():
                    edge = tuple(sorted(LETTERS.index(c) for c in pair))
                    assert {l for l, e in enumerate(edges) if e == edge} == lines
