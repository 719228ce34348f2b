import random

import pytest

import oracles
from pocmed.corpus import all_pocsets, automorphisms, canonical_key, random_action, random_pocset, random_tree
from pocmed.median import cube, path, tripod
from pocmed.pocset import poc_isomorphism, validate_poc


@pytest.mark.parametrize("n,count", [(0, 1), (1, 1), (2, 2), (3, 5)])
def test_class_counts_match_oracle(n, count):
    assert len(all_pocsets(n)) == count
    assert oracles.poc_class_count(n) == count


def test_four_pairs_has_18_classes():
    # the oracle takes several seconds here, so the count is frozen
    assert len(all_pocsets(4)) == 18


def test_classes_are_valid_and_distinct():
    for n in range(4):
        ps = all_pocsets(n)
        assert all(validate_poc(p).ok for p in ps)
        for i, p in enumerate(ps):
            for q in ps[i + 1:]:
                assert not oracles.poc_isomorphic(p.up, q.up)


def test_canonical_key_is_invariant():
    rng = random.Random(6)
    for _ in range(20):
        p = random_pocset(rng, rng.randint(1, 4))
        q = random_pocset(rng, p.n_pairs)
        same = canonical_key(p) == canonical_key(q)
        assert same == oracles.poc_isomorphic(p.up, q.up)
        assert same == (poc_isomorphism(p, q) is not None)


def test_random_generators_are_seeded():
    a = random_pocset(random.Random(1), 6)
    b = random_pocset(random.Random(1), 6)
    assert a.up == b.up
    t = random_tree(random.Random(2), 10)
    assert t.n == 10 and len(t.edges) == 9


def test_automorphism_counts():
    assert len(automorphisms(cube(3))) == 48
    assert len(automorphisms(path(4))) == 2
    assert len(automorphisms(tripod())) == 6


def test_random_action_bounds():
    rng = random.Random(7)
    for _ in range(10):
        a = random_action(rng, cube(3))
        assert 1 <= a.order <= 48
