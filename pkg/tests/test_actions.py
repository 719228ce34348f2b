import random

import numpy as np
import pytest

import oracles
from pocmed.actions import (
    finite_shifts, fixed_cube, hilbert_embedding, hyperplane_orbits, hyperplane_quotient,
    load_action, orbits, pairing, pairing_identities, parse_action_source, shift_report,
    simple_analysis, to_action_source, validate_action, vertex_orbits,
)
from pocmed.bits import iter_bits, popcount
from pocmed.construct import SageevSpec, sageev_window
from pocmed.corpus import automorphisms, grid, random_action, random_tree_algebra
from pocmed.errors import LimitExceeded, ParseError, PreconditionError
from pocmed.median import cube, parse_median_source, path, star_tree, tripod


def load_med(path_):
    with open(path_) as fh:
        return parse_median_source(fh.read())


def swap(m, pairs):
    img = list(range(m.n))
    for a, b in pairs:
        x, y = m.element(a), m.element(b)
        img[x], img[y] = y, x
    return img


# -- validation and parsing ---------------------------------------------------------


def test_validate_square_swap():
    sq = cube(2)
    a = validate_action(sq, {"s": swap(sq, [("10", "01")])})
    assert a.order == 2
    assert a.word(0) == "1" and a.word(1) == "s"


def test_non_automorphism_rejected():
    t = tripod()
    # swapping the centre with a leaf breaks the median
    with pytest.raises(PreconditionError):
        validate_action(t, {"s": swap(t, [("c", "l0")])})
    with pytest.raises(PreconditionError):
        validate_action(t, {"s": [0, 0, 1, 2]})


def test_group_limit():
    m = cube(3)
    auts = automorphisms(m)
    assert len(auts) == 48
    with pytest.raises(LimitExceeded):
        validate_action(m, {f"g{i}": g for i, g in enumerate(auts)}, limit=3)


def test_parse_action_files(data_dir):
    a = load_action(str(data_dir / "square_d4.act"), load_med)
    assert a.order == 8 and a.gen_names == ("s", "t", "r")
    b = load_action(str(data_dir / "path4_flip.act"), load_med)
    assert b.order == 2
    text = to_action_source(a, "square.med")
    c = parse_action_source(text, lambda _: a.algebra)
    assert c.order == 8


@pytest.mark.parametrize("text,line", [
    ("gen s: 0->0\n", 1),
    ("action a on x\nfoo\n", 2),
    ("action a on x\ngen s: 0->1 1->0 2->2\n", 2),
    ("action a on x\ngen s: 0->1 0->0 2->2 3->3\n", 2),
    ("action a on x\ngen s: 0-1\n", 2),
])
def test_parse_action_errors(text, line):
    sq = parse_median_source("median-sub sq over 2\ngen 0\ngen 1\ngen 2\ngen 3\n")
    with pytest.raises(ParseError) as e:
        parse_action_source(text, lambda _: sq)
    assert e.value.line == line


def test_group_multiplication_is_composition():
    sq = cube(2)
    a = validate_action(sq, {"s": swap(sq, [("10", "01")]), "t": swap(sq, [("00", "10"), ("01", "11")])})
    for i in range(a.order):
        assert a.mul(i, a.inv(i)) == 0
        for j in range(a.order):
            g, h = a.elements[i], a.elements[j]
            assert a.elements[a.mul(i, j)] == tuple(g[x] for x in h)


# -- orbits -------------------------------------------------------------------------


def test_orbits_square_swap():
    sq = cube(2)
    a = validate_action(sq, {"s": swap(sq, [("10", "01")])})
    vo, ho = orbits(a)
    assert vo == [[0], [1, 2], [3]]
    assert ho == [[0, 1]]


def test_hyperplane_orbits_of_path_flip():
    p = path(4)
    a = validate_action(p, {"s": [3, 2, 1, 0]})
    assert hyperplane_orbits(a) == [[0, 2], [1]]
    assert vertex_orbits(a) == [[0, 3], [1, 2]]


# -- fixed cube ---------------------------------------------------------------------


def test_fixed_cube_path_swap_is_middle():
    p = path(3)
    a = validate_action(p, {"s": [2, 1, 0]})
    r = fixed_cube(a, 0)
    assert r.cube == 1 << p.element("p1")
    assert r.is_singleton


def test_fixed_cube_even_path_flip_is_an_edge():
    p = path(4)
    a = validate_action(p, {"s": [3, 2, 1, 0]})
    assert fixed_cube(a, 0).cube == 0b0110


def test_fixed_cube_square_rotation_is_whole_square():
    sq = cube(2)
    rot = [sq.element(x) for x in ("10", "11", "00", "01")]
    a = validate_action(sq, {"r": rot})
    assert fixed_cube(a, 0).cube == sq.full


def test_fixed_cube_matches_brute_force():
    rng = random.Random(12)
    algebras = [cube(3), grid(3, 3), star_tree(4), tripod(), path(5)]
    algebras += [random_tree_algebra(rng, rng.randint(3, 9)) for _ in range(4)]
    for m in algebras:
        a = random_action(rng, m)
        pts = [m.sig[x] for x in range(m.n)]
        for x in range(m.n):
            expect = oracles.brute_fixed_cube(pts, a.elements, x)
            assert set(iter_bits(fixed_cube(a, x).cube)) == expect


# -- simple actions -------------------------------------------------------------------


def test_simple_analysis():
    t = tripod()
    rot = [0, 2, 3, 1]
    r = simple_analysis(validate_action(t, {"r": rot}))
    assert r.is_simple and not r.is_cube and r.fixed_point == 0
    sq = cube(2)
    r = simple_analysis(validate_action(sq, {"s": swap(sq, [("10", "01")])}))
    assert r.is_simple and r.is_cube and r.fixed_point is None
    r = simple_analysis(validate_action(path(4), {"s": [3, 2, 1, 0]}))
    assert not r.is_simple


# -- pairing ----------------------------------------------------------------------------


def test_pairing_on_square_group():
    sq = cube(2)
    a = validate_action(sq, {"s": swap(sq, [("10", "01")]), "t": swap(sq, [("00", "10"), ("01", "11")])})
    for h in range(2, 2 * sq.k + 2):
        for x in range(sq.n):
            t = pairing(a, h, x)
            assert popcount(t.members) * 2 == a.order
            assert pairing_identities(a, h, x) is None
    with pytest.raises(PreconditionError):
        pairing(a, 0, 0)


def test_pairing_on_random_actions():
    rng = random.Random(21)
    for m in [cube(3), grid(2, 3), star_tree(3)]:
        a = random_action(rng, m, max_order=12)
        for h in range(2, 2 * m.k + 2):
            assert pairing_identities(a, h, rng.randrange(m.n)) is None


# -- hyperplane quotient ------------------------------------------------------------------


def test_hyperplane_quotient_of_path_flip():
    p = path(4)
    a = validate_action(p, {"s": [3, 2, 1, 0]})
    q = hyperplane_quotient(a, 2)
    assert q.orbit == [0, 2]
    assert q.quotient.n == 3
    assert q.action.order == 2
    assert int(q.d_h[0, 3]) == 2
    # the middle edge lies on the far side of both translates
    assert q.meet == 0 and q.meet_star == 0b0110
    assert not q.cuts_properly


def test_hyperplane_quotient_middle_hyperplane():
    p = path(4)
    a = validate_action(p, {"s": [3, 2, 1, 0]})
    q = hyperplane_quotient(a, 4)
    assert q.orbit == [1] and q.quotient.n == 2
    with pytest.raises(PreconditionError):
        hyperplane_quotient(a, 1)


# -- Hilbert vectors ----------------------------------------------------------------------


def test_hilbert_vectors():
    sq = cube(2)
    a = validate_action(sq, {"s": swap(sq, [("10", "01")]), "t": swap(sq, [("00", "10"), ("01", "11")])})
    r = hilbert_embedding(a)
    assert r.vectors.shape == (4, 2)
    assert not r.vectors[0].any()
    d = ((r.vectors[:, None] - r.vectors[None]) ** 2).sum(axis=2)
    assert np.array_equal(d, np.array([[0, 1, 1, 2], [1, 0, 2, 1], [1, 2, 0, 1], [2, 1, 1, 0]]))


def test_hilbert_on_random_actions():
    rng = random.Random(33)
    for m in [cube(3), star_tree(4), grid(3, 3)]:
        a = random_action(rng, m, max_order=16)
        hilbert_embedding(a, rng.randrange(m.n))


# -- shifts -------------------------------------------------------------------------------


def test_finite_groups_shift_nothing():
    for m in [cube(3), path(5), star_tree(3)]:
        for g in automorphisms(m)[:8]:
            a = validate_action(m, {"g": g})
            assert finite_shifts(a) == []


def test_shift_report_z():
    w = sageev_window(SageevSpec("z", "halfline", 3))
    rows = shift_report(w)
    assert ("1", "A", "shrinks") in rows and ("-1", "A", "grows") in rows
    assert all(d in ("shrinks", "grows") for _, _, d in rows)
    assert [r[0] for r in rows if r[2] == "shrinks"] == ["1", "2", "3"]


def test_fixed_cube_hyperplanes_pairwise_transverse():
    from pocmed.median import cutting_hyperplanes
    rng = random.Random(44)
    for m in [cube(3), grid(3, 3), star_tree(4), path(6)]:
        for _ in range(5):
            a = random_action(rng, m)
            w = fixed_cube(a, rng.randrange(m.n)).cube
            cut = list(iter_bits(cutting_hyperplanes(m, w)))
            for i in cut:
                for j in cut:
                    if i < j:
                        assert m.transverse_rows[i] >> j & 1
            # majority half spaces meet pairwise inside the hull
            r = fixed_cube(a, 0)
            hs = m.halfspace_masks
            maj = list(iter_bits(r.majority))
            for h1 in maj:
                for h2 in maj:
                    assert r.hull & hs[h1] & hs[h2]


def test_helly_on_ball_hull_traces():
    # graph balls need not be convex, so test traces on their hulls
    from pocmed.median import convex_hull, distance
    for m in [cube(3), grid(3, 4), star_tree(4)]:
        for v in range(m.n):
            for r in range(3):
                ball = convex_hull(m, sum(1 << x for x in range(m.n) if distance(m, v, x) <= r))
                traces = [h for h in m.halfspace_masks if h & ball]
                for i, h1 in enumerate(traces):
                    for h2 in traces[i:]:
                        for h3 in traces:
                            if h1 & h2 & ball and h2 & h3 & ball and h1 & h3 & ball:
                                assert h1 & h2 & h3 & ball
