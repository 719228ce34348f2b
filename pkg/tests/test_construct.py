import itertools
import random

import networkx as nx
import numpy as np
import pytest

import oracles
from pocmed.bits import iter_bits, mask_of
from pocmed.construct import (
    Representation, SageevSpec, Tree, dunwoody_realize, end_conditions, f2_inv, f2_mul,
    f2_reduce, incremental_ultrafilter, maximal_transverse_sets, parse_tree_source, pattern_check,
    poc_of_tree, realize_representation, sageev_window, shifts_in_window, to_tree_source,
    tree_algebra, well_foundedness, window_inclusion_ok,
)
from pocmed.corpus import all_pocsets, random_pocset, random_tree
from pocmed.errors import PocmedError, PreconditionError
from pocmed.graphs import is_isomorphic
from pocmed.median import median_graph, validate_median
from pocmed.pocset import (PocSet, classify_subset, enumerate_ultrafilters, orthogonal,
                           parse_poc_source, validate_poc)


def chain_ab():
    return parse_poc_source("pocset c\nelem a\nelem b\nle a b\n")


def path_tree(n):
    return Tree.from_edges(n, [(i, i + 1) for i in range(n - 1)])


# -- trees ------------------------------------------------------------------------


def test_tree_source_round_trip(data_dir):
    t = parse_tree_source((data_dir / "t5.tree").read_text())
    assert t.n == 5 and len(t.edges) == 4
    u = parse_tree_source(to_tree_source(t))
    assert u.edges == t.edges


def test_non_trees_rejected():
    with pytest.raises(PocmedError):
        Tree.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(PocmedError):
        Tree.from_edges(4, [(0, 1), (2, 3)])


def test_poc_of_path_is_a_chain():
    p = poc_of_tree(path_tree(3))
    assert validate_poc(p).ok
    # 1 -> 2 points into {2}, which lies inside {1, 2}
    assert p.le(4, 2) and p.le(3, 5)


def test_tree_poc_is_nested_and_has_vertex_ultrafilters():
    rng = random.Random(1)
    for n in range(1, 12):
        t = random_tree(rng, n)
        p = poc_of_tree(t)
        for a, b in itertools.combinations(range(2, p.size), 2):
            if a >> 1 != b >> 1:
                assert p.comparable[a] >> b & 1 or p.comparable[a] >> (b ^ 1) & 1
        assert len(enumerate_ultrafilters(p)) == n


def test_tree_algebra_graph_is_the_tree():
    rng = random.Random(2)
    for n in range(1, 10):
        t = random_tree(rng, n)
        m = tree_algebra(t)
        assert validate_median(m).ok
        assert median_graph(m).edges() == sorted(t.edges)


# -- foundedness ------------------------------------------------------------------


def test_finite_ultrafilters_are_well_founded():
    for n in range(4):
        for p in all_pocsets(n):
            for u in enumerate_ultrafilters(p):
                r = well_foundedness(p, u)
                assert r.founded and r.well_founded


def test_open_below_marks_infinite_descent():
    p = chain_ab()
    a, b = p.index("a"), p.index("b")
    u = 2 | 1 << a | 1 << b
    r = well_foundedness(p, u, open_below=1 << a)
    assert not r.well_founded
    assert r.offenders >> b & 1
    with pytest.raises(PreconditionError):
        well_foundedness(p, 1 << a)


# -- realization -------------------------------------------------------------------


def test_maximal_transverse_sets_examples():
    assert len(maximal_transverse_sets(orthogonal(3))) == 8
    assert len(maximal_transverse_sets(chain_ab())) == 4
    assert maximal_transverse_sets(PocSet([], [3, 2])) == [0]


def test_dunwoody_examples():
    r = dunwoody_realize(poc_of_tree(path_tree(3)))
    assert r.algebra.n == 3
    assert dunwoody_realize(orthogonal(3)).algebra.n == 8


def test_dunwoody_matches_ultrafilters_exhaustive():
    for n in range(5):
        for p in all_pocsets(n):
            r = dunwoody_realize(p)
            assert sorted(r.algebra.points) == oracles.brute_ultrafilters(p.up)


def test_dunwoody_round_trip_on_trees():
    rng = random.Random(3)
    for _ in range(10):
        t = random_tree(rng, rng.randint(2, 20))
        r = dunwoody_realize(poc_of_tree(t))
        assert is_isomorphic(median_graph(r.algebra), t.graph)


# -- incremental construction --------------------------------------------------------


def test_incremental_on_chain_in_reverse_order():
    p = chain_ab()
    u, steps = incremental_ultrafilter(p, [1, 0])
    assert [s.case for s in steps] == [1, 3]
    assert classify_subset(p, u).ultrafilter


def test_incremental_orthogonal_takes_every_pair():
    u, steps = incremental_ultrafilter(orthogonal(3))
    assert [s.case for s in steps] == [1, 1, 1]
    assert u == 2 | 1 << 2 | 1 << 4 | 1 << 6


def test_incremental_every_order_gives_an_ultrafilter():
    for n in range(4):
        for p in all_pocsets(n):
            us = set(oracles.brute_ultrafilters(p.up))
            for order in itertools.permutations(range(n)):
                u, steps = incremental_ultrafilter(p, order)
                assert u in us
                assert len(steps) == n


def test_incremental_bad_order():
    with pytest.raises(PreconditionError):
        incremental_ultrafilter(chain_ab(), [0, 0])


# -- representations -----------------------------------------------------------------


def test_star_representation():
    # edge i points from the centre to leaf i; send it to the singleton {x_i}
    p = poc_of_tree(Tree.from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]))
    rep = Representation.from_pairs(p, 4, [1 << i for i in range(4)])
    assert rep.embedding_witness() is None
    real = realize_representation(rep)
    assert real.algebra.n == 5


def test_even_weight_cube_representation():
    p = orthogonal(3)
    # points x0..x3; pairs a0 = {x1,x2}, a1 = {x1,x3}, a2 = {x2,x3}
    rep = Representation.from_pairs(p, 4, [0b0110, 0b1010, 0b1100])
    real = realize_representation(rep)
    assert real.algebra.n == 8
    assert len(set(real.iota)) == 4


def test_non_embedding_rejected():
    p = chain_ab()
    rep = Representation.from_pairs(p, 2, [0b01, 0b10])
    assert rep.embedding_witness() is not None
    with pytest.raises(PreconditionError):
        realize_representation(rep)


def test_realization_preserves_separation_counts():
    rng = random.Random(9)
    for _ in range(15):
        p = random_pocset(rng, rng.randint(1, 6))
        us = enumerate_ultrafilters(p)
        pts = us[: rng.randint(1, len(us))]
        reps = [mask_of(i for i, u in enumerate(pts) if u >> (2 * j + 2) & 1) for j in range(p.n_pairs)]
        rep = Representation.from_pairs(p, len(pts), reps)
        if rep.embedding_witness() is not None:
            continue
        real = realize_representation(rep)
        assert real.algebra.n == len(oracles.median_closure(pts))


def test_pattern_check():
    ok, w = pattern_check([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert ok and w is None
    ok, w = pattern_check([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert not ok and w == (0, 1, 2)
    with pytest.raises(PreconditionError):
        pattern_check([[0, 1], [2, 0]])
    with pytest.raises(PreconditionError):
        pattern_check([[0, 3, 1], [3, 0, 1], [1, 1, 0]])
    with pytest.raises(PreconditionError):
        pattern_check(np.zeros((2, 3), dtype=int))


def test_median_graph_distances_have_even_perimeter():
    for g in nx.graph_atlas_g()[1:200]:
        if not nx.is_connected(g) or not oracles.is_median_graph(g):
            continue
        d = dict(nx.all_pairs_shortest_path_length(g))
        nodes = list(g.nodes())
        table = [[d[x][y] for y in nodes] for x in nodes]
        assert pattern_check(table)[0]


# -- group windows -------------------------------------------------------------------


def test_f2_words():
    assert f2_reduce("aAb") == "b"
    assert f2_mul("ab", "Ba") == "aa"
    assert f2_inv("abA") == "aBA"
    with pytest.raises(PocmedError):
        f2_reduce("ac")


@pytest.mark.parametrize("r", [1, 2, 3, 5])
def test_z_halfline_window_is_a_path(r):
    w = sageev_window(SageevSpec("z", "halfline", r))
    assert w.algebra.n == 2 * r + 1
    assert w.algebra.k == 2 * r
    g = median_graph(w.algebra)
    assert max(len(list(iter_bits(a))) for a in g.adj) <= 2
    assert w.growth == [2 * i for i in range(1, r + 1)]
    assert 1 in w.shifts and -1 not in w.shifts
    assert w.ends.ok


def test_f2_prefix_window():
    w = sageev_window(SageevSpec("f2", "prefix:a", 2))
    assert len(w.ball) == 17
    assert w.algebra.n == 9
    assert "a" in w.shifts


def test_evens_rejected():
    spec = SageevSpec("z", "evens", 3)
    assert not end_conditions(spec).ok
    with pytest.raises(PreconditionError):
        sageev_window(spec)


def test_bad_specs():
    with pytest.raises(PreconditionError):
        sageev_window(SageevSpec("q", "halfline", 2))
    with pytest.raises(PreconditionError):
        sageev_window(SageevSpec("z", "halfline", 0))
    with pytest.raises(PreconditionError):
        sageev_window(SageevSpec("f2", "prefix:c", 2))


def test_window_inclusion():
    assert window_inclusion_ok(SageevSpec("z", "halfline", 3))
    assert window_inclusion_ok(SageevSpec("f2", "prefix:a", 1))


def test_shifts_are_translates_into_the_set():
    assert shifts_in_window(SageevSpec("z", "halfline", 3)) == [1, 2, 3]


def test_simplex_closures_are_five_or_eight():
    # every 4-point configuration in a 6-cube with all distances 2, x0 at the origin
    weight2 = [s for s in range(64) if bin(s).count("1") == 2]
    sizes = set()
    for a, b, c in itertools.combinations(weight2, 3):
        if all(bin(x ^ y).count("1") == 2 for x, y in ((a, b), (b, c), (a, c))):
            sizes.add(len(oracles.median_closure([0, a, b, c])))
    assert sizes == {5, 8}
