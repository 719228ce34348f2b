import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, strategies as st

import oracles
from pocmed.corpus import all_pocsets, random_pocset, random_tree
from pocmed.errors import LimitExceeded, ParseError, PreconditionError, ValidationError
from pocmed.graphs import SimpleGraph, is_isomorphic
from pocmed.pocset import (
    STAR_DUAL, PocSet, RelationKind, boolean_poc, classify_subset, dimension_length,
    enumerate_ultrafilters, extend_filter_base, is_binary, nesting_graph, orientation_code,
    orthogonal, parse_poc_source, poc_from_graph, poc_isomorphism, prime_summands, relation,
    starlet, to_poc_source, transversality_graph, transverse, tree_dimension, up_closure,
    validate_poc,
)


def chain_ab():
    return parse_poc_source("pocset c\nelem a\nelem b\nle a b\n")


# -- parsing ---------------------------------------------------------------------


def test_parse_chain():
    p = chain_ab()
    assert p.size == 6
    assert p.le(p.index("a"), p.index("b"))
    assert p.le(p.index("b^"), p.index("a^"))


def test_parse_rejects_poc2():
    with pytest.raises(ValidationError) as e:
        parse_poc_source("pocset bad\nelem a\nle a a^\n")
    assert "Poc 2" in e.value.report.axioms()


def test_parse_orthogonal():
    p = parse_poc_source("pocset o\nelem a\nelem b\nelem c\n")
    assert p.size == 8
    assert transversality_graph(p).edges() == [(0, 1), (0, 2), (1, 2)]


@pytest.mark.parametrize("text,line", [
    ("elem a\n", 1),
    ("pocset p\nelem a\nle a b\n", 3),
    ("pocset p\nelem a\nfoo\n", 3),
    ("pocset p\nelem a^\n", 2),
    ("pocset p\nelem a a\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as e:
        parse_poc_source(text)
    assert e.value.line == line


def test_source_round_trip():
    for p in all_pocsets(3):
        q = parse_poc_source(to_poc_source(p))
        assert q.up == p.up


def test_comments_and_blank_lines():
    p = parse_poc_source("# header\npocset p  # name\n\nelem a b\nle a b^ # nested\n")
    assert p.le(p.index("a"), p.index("b^"))


# -- validation ------------------------------------------------------------------


def test_two_element_poc_is_valid():
    p = PocSet([], [3, 2], "two")
    assert validate_poc(p).ok
    assert enumerate_ultrafilters(p) == [2]


def test_closure_repairs_duals():
    p = PocSet.from_relations(["a", "b"], [(2, 4)])
    assert p.le(5, 3)
    assert validate_poc(p).ok


def test_antisymmetry_reported():
    with pytest.raises(ValidationError) as e:
        PocSet.from_relations(["a", "b"], [(2, 4), (4, 2)])
    assert "antisymmetry" in e.value.report.axioms()


def test_validation_of_raw_rows():
    # a <= b but b* not below a*
    up = [63, 2, 4 | 16 | 2, 8 | 2, 16 | 2, 32 | 2]
    report = validate_poc(PocSet(["a", "b"], up))
    assert "Poc 1" in report.axioms()


# -- relations -------------------------------------------------------------------


def test_relation_kinds():
    p = chain_ab()
    a, b = p.index("a"), p.index("b")
    assert relation(p, a, b) is RelationKind.Below
    assert relation(p, b, a) is RelationKind.Above
    assert relation(p, a, a ^ 1) is RelationKind.StarEqual
    assert relation(p, a, b ^ 1) is RelationKind.BelowStar
    o = orthogonal(3)
    assert relation(o, 2, 4) is RelationKind.Transverse
    with pytest.raises(PreconditionError):
        relation(p, 0, a)


def test_relation_star_duality():
    for p in all_pocsets(3):
        for a, b in itertools.product(range(2, p.size), repeat=2):
            assert relation(p, b ^ 1, a ^ 1) is STAR_DUAL[relation(p, a, b)]


def test_at_most_one_nest_relation():
    for p in all_pocsets(3):
        for a, b in itertools.combinations(range(2, p.size), 2):
            if a >> 1 == b >> 1:
                continue
            held = [p.le(a, b), p.le(b, a), p.le(a, b ^ 1), p.le(b ^ 1, a)]
            assert sum(held) <= 1
            assert transverse(p, a, b) == (sum(held) == 0)


# -- filters ---------------------------------------------------------------------


def test_extension_cases():
    p = chain_ab()
    a, b = p.index("a"), p.index("b")
    r = extend_filter_base(p, 1 << a, b)
    assert r.case == 1 and r.bases == (1 << a | 1 << b,)
    r = extend_filter_base(p, 1 << b, a)
    assert r.case == 3
    o = orthogonal(3)
    r = extend_filter_base(o, 1 << 2, 4)
    assert r.case == 3 and r.bases == (1 << 2 | 1 << 4, 1 << 2 | 1 << 5)
    for base in r.bases:
        assert oracles.brute_filter_base(o.up, base)
    with pytest.raises(PreconditionError):
        extend_filter_base(p, 1 << a, a)
    with pytest.raises(PreconditionError):
        extend_filter_base(p, 1 << a | 1 << (b ^ 1), 2)


def test_extension_outputs_are_filter_bases():
    for p in all_pocsets(3):
        proper = list(range(2, p.size))
        for r in range(3):
            for base_elems in itertools.combinations(proper, r):
                base = sum(1 << e for e in base_elems)
                if not oracles.brute_filter_base(p.up, base):
                    continue
                for a in range(2, p.size, 2):
                    if base >> a & 1 or base >> (a ^ 1) & 1:
                        continue
                    res = extend_filter_base(p, base, a)
                    assert res.case in (1, 2, 3)
                    for out in res.bases:
                        assert oracles.brute_filter_base(p.up, out)


def test_up_closure():
    p = chain_ab()
    a, b = p.index("a"), p.index("b")
    assert up_closure(p, 1 << a) == 1 << a | 1 << b | 2
    o = orthogonal(3)
    assert up_closure(o, 1 << 2 | 1 << 4) == 1 << 2 | 1 << 4 | 2
    with pytest.raises(PreconditionError):
        up_closure(p, 0)


def test_up_closure_is_meet_of_ultrafilters():
    for p in all_pocsets(3):
        us = oracles.brute_ultrafilters(p.up)
        for e in range(1, p.size):
            contains = [u for u in us if u >> e & 1]
            meet = (1 << p.size) - 1
            for u in contains:
                meet &= u
            assert up_closure(p, 1 << e) == meet


def test_classify_subset():
    p = chain_ab()
    a, b = p.index("a"), p.index("b")
    c = classify_subset(p, 1 << a | 1 << b | 2)
    assert c.ultrafilter and c.filter and c.filter_base
    assert not classify_subset(p, 1 << a | 1 << (b ^ 1)).filter_base
    top = classify_subset(p, 2)
    assert top.filter and not top.ultrafilter


def test_classify_flags_are_consistent():
    p = chain_ab()
    for s in range(1 << p.size):
        c = classify_subset(p, s)
        assert not c.ultrafilter or c.filter
        assert not c.filter or c.filter_base
        assert c.ultrafilter == (c.orientation and c.upper_set)
        assert c.filter_base == oracles.brute_filter_base(p.up, s)


# -- ultrafilters ----------------------------------------------------------------


def test_ultrafilter_examples():
    assert len(enumerate_ultrafilters(orthogonal(3))) == 8
    assert len(enumerate_ultrafilters(chain_ab())) == 3


def test_ultrafilters_match_brute_force_exhaustive():
    for n in range(5):
        for p in all_pocsets(n):
            assert sorted(enumerate_ultrafilters(p)) == oracles.brute_ultrafilters(p.up)


def test_ultrafilter_order_is_orientation_code():
    rng = random.Random(3)
    for _ in range(20):
        p = random_pocset(rng, 6)
        codes = [orientation_code(p, u) for u in enumerate_ultrafilters(p)]
        assert codes == sorted(codes)


def test_ultrafilter_limit():
    with pytest.raises(LimitExceeded):
        enumerate_ultrafilters(orthogonal(5), limit=4)


# -- graphs, dimension, binary ---------------------------------------------------


def test_nested_poc_has_edgeless_transversality_graph():
    from pocmed.construct import Tree, poc_of_tree
    t = Tree.from_edges(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    p = poc_of_tree(t)
    assert transversality_graph(p).edges() == []
    assert prime_summands(p) == [[0, 1, 2, 3]]
    assert tree_dimension(p) == (1, True)


def test_chain_graphs():
    p = chain_ab()
    assert transversality_graph(p).n == 2 and transversality_graph(p).edges() == []
    assert nesting_graph(p).edges() == [(0, 1)]


def test_prime_summands():
    assert prime_summands(orthogonal(3)) == [[0], [1], [2]]
    assert prime_summands(PocSet([], [3, 2])) == []


def test_dimension_length():
    o = dimension_length(orthogonal(3))
    assert (o.dimension, o.length) == (3, 1)
    c = dimension_length(chain_ab())
    assert (c.dimension, c.length) == (1, 2)
    t = dimension_length(PocSet([], [3, 2]))
    assert (t.dimension, t.length) == (0, 0)


def test_tree_dimension_examples():
    assert tree_dimension(orthogonal(3)) == (3, True)
    c5 = SimpleGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
    p = poc_from_graph(c5)
    assert tree_dimension(p) == (3, True)
    assert dimension_length(p).dimension == 2
    value, exact = tree_dimension(p, "greedy")
    assert value >= 3 and not exact


def test_tree_dimension_matches_brute_chromatic():
    for n in range(4):
        for p in all_pocsets(n):
            g = transversality_graph(p)
            assert tree_dimension(p)[0] == oracles.brute_chromatic(g.n, g.edges())
            assert dimension_length(p).dimension <= tree_dimension(p)[0]


def test_poc_from_graph_examples():
    k2 = poc_from_graph(SimpleGraph.from_edges(2, [(0, 1)]))
    assert k2.n_pairs == 2 and transverse(k2, 2, 4)
    # three isolated vertices give the star tree poc set
    from pocmed.construct import Tree, poc_of_tree
    cone = poc_from_graph(SimpleGraph.from_edges(3, []))
    star = poc_of_tree(Tree.from_edges(4, [(0, 1), (0, 2), (0, 3)]))
    assert poc_isomorphism(cone, star) is not None


def test_poc_from_graph_round_trip_small_graphs():
    for g in nx.graph_atlas_g()[1:60]:
        sg = SimpleGraph.from_networkx(g)
        p = poc_from_graph(sg)
        assert is_isomorphic(transversality_graph(p), sg)


def test_binary():
    assert is_binary(chain_ab()).binary
    assert is_binary(orthogonal(3)).binary
    r = is_binary(starlet(3))
    assert not r.binary
    walk = r.odd_walk
    assert len(walk) % 2 == 1 and len(walk) == 3
    p = starlet(3)
    for x, y in zip(walk, walk[1:] + walk[:1]):
        assert p.comparable[x] >> (y ^ 1) & 1


def test_binary_partition_has_no_cross_comparabilities():
    for n in range(4):
        for p in all_pocsets(n):
            r = is_binary(p)
            if r.binary:
                o = r.part
                members = [e for e in range(2, p.size) if o >> e & 1]
                assert len(members) == p.n_pairs
                for x in members:
                    for y in members:
                        assert not p.comparable[x] >> (y ^ 1) & 1


def test_boolean_poc_size():
    p = boolean_poc(3)
    assert p.n_pairs == 3
    assert len(enumerate_ultrafilters(p)) == 4


@given(st.integers(0, 2**32), st.integers(1, 7), st.floats(0.1, 0.9))
def test_random_pocsets_valid_and_enumerated(seed, n, density):
    p = random_pocset(random.Random(seed), n, density)
    assert validate_poc(p).ok
    assert sorted(enumerate_ultrafilters(p)) == oracles.brute_ultrafilters(p.up)


def test_poc_from_graph_round_trip_all_atlas_and_random_8():
    graphs = list(nx.graph_atlas_g()[60:])
    rng = random.Random(8)
    graphs += [nx.gnp_random_graph(8, rng.random(), seed=rng.randrange(10**6)) for _ in range(40)]
    for g in graphs:
        sg = SimpleGraph.from_networkx(g)
        assert is_isomorphic(transversality_graph(poc_from_graph(sg)), sg)


def test_dimension_equals_tree_dimension_when_nested():
    from pocmed.construct import poc_of_tree
    rng = random.Random(4)
    for _ in range(10):
        p = poc_of_tree(random_tree(rng, rng.randint(2, 12)))
        assert dimension_length(p).dimension == tree_dimension(p)[0] == 1
