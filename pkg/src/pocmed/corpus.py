"""Seeded generators for poc sets, trees, median algebras and actions."""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from .actions import GroupAction, validate_action
from .construct import Tree, tree_algebra
from .errors import LimitExceeded, ValidationError
from .median import MedianAlgebra, cube, median_graph, path, product, star_tree
from .pocset import PocSet


def _relabel(up: tuple[int, ...], perm: tuple[int, ...], flips: int) -> tuple[int, ...]:
    """Rows of the order after sending pair i to pair perm[i], swapping the
    two members when bit i of flips is set."""
    size = len(up)
    img = [0, 1] + [0] * (size - 2)
    for i, j in enumerate(perm):
        f = flips >> i & 1
        img[2 * i + 2] = 2 * j + 2 + f
        img[2 * i + 3] = 2 * j + 3 - f
    out = [0] * size
    for e in range(size):
        row = 0
        r = up[e]
        while r:
            low = r & -r
            row |= 1 << img[low.bit_length() - 1]
            r ^= low
        out[img[e]] = row
    return tuple(out)


def canonical_key(p: PocSet) -> tuple[int, ...]:
    n = p.n_pairs
    return min(_relabel(p.up, perm, flips)
               for perm in itertools.permutations(range(n)) for flips in range(1 << n))


def _closed(up: list[int]) -> bool:
    for e, row in enumerate(up):
        acc = row
        r = row
        while r:
            low = r & -r
            acc |= up[low.bit_length() - 1]
            r ^= low
        if acc != row:
            return False
    return True


@lru_cache(maxsize=None)
def _exhaustive(n: int) -> tuple[tuple[int, ...], ...]:
    size = 2 * n + 2
    pairs = list(itertools.combinations(range(n), 2))
    found: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    # per pair of pairs: transverse, a<b, a<b*, a*<b, b<a
    for choice in itertools.product(range(5), repeat=len(pairs)):
        up = [1 << e | 2 for e in range(size)]
        up[0] = (1 << size) - 1
        for (i, j), c in zip(pairs, choice):
            if c == 0:
                continue
            a, b = 2 * i + 2, 2 * j + 2
            lo, hi = {1: (a, b), 2: (a, b ^ 1), 3: (a ^ 1, b), 4: (b, a)}[c]
            up[lo] |= 1 << hi
            up[hi ^ 1] |= 1 << (lo ^ 1)
        up_t = tuple(up)
        if up_t in seen or not _closed(up):
            continue
        images = {_relabel(up_t, perm, flips)
                  for perm in itertools.permutations(range(n)) for flips in range(1 << n)}
        seen |= images
        found.append(min(images))
    return tuple(sorted(found))


def all_pocsets(n: int) -> list[PocSet]:
    """Every poc set with n proper pairs, one per isomorphism class."""
    if n == 0:
        return [PocSet([], [3, 2], "poc0_0")]
    return [PocSet([f"a{i}" for i in range(n)], up, f"poc{n}_{k}") for k, up in enumerate(_exhaustive(n))]


def random_pocset(rng: random.Random, n: int, density: float = 0.5, name: str | None = None) -> PocSet:
    """Random poc set: pairs are added one relation at a time in random order,
    keeping a relation only when the closure stays a poc set."""
    names = [f"a{i}" for i in range(n)]
    rels: list[tuple[int, int]] = []
    pairs = list(itertools.combinations(range(n), 2))
    rng.shuffle(pairs)
    for i, j in pairs:
        if rng.random() >= density:
            continue
        a, b = 2 * i + 2 + rng.randrange(2), 2 * j + 2 + rng.randrange(2)
        if rng.random() < 0.5:
            a, b = b, a
        try:
            PocSet.from_relations(names, rels + [(a, b)])
        except ValidationError:
            continue
        rels.append((a, b))
    return PocSet.from_relations(names, rels, name or f"rand{n}")


def random_tree(rng: random.Random, n: int, name: str | None = None) -> Tree:
    labels = [f"v{i}" for i in range(n)]
    if n <= 2:
        return Tree.from_edges(labels, [(0, 1)] if n == 2 else [], name or f"tree{n}")
    seq = [rng.randrange(n) for _ in range(n - 2)]
    g = nx.from_prufer_sequence(seq)
    return Tree.from_edges(labels, sorted(tuple(sorted(e)) for e in g.edges()), name or f"tree{n}")


def grid(a: int, b: int) -> MedianAlgebra:
    return product(path(a), path(b), f"grid{a}x{b}")


def small_algebras() -> list[MedianAlgebra]:
    """Hand-picked algebras: cubes, paths, stars, grids and products."""
    out = [cube(0), cube(1), cube(2), cube(3), path(3), path(5), star_tree(3), star_tree(4),
           grid(2, 3), grid(3, 3), grid(3, 4), product(star_tree(3), path(2), "tripod_x_edge")]
    return out


def automorphisms(m: MedianAlgebra, limit: int = 2000) -> list[tuple[int, ...]]:
    """Automorphisms of m, found as graph automorphisms of its median graph."""
    g = median_graph(m).to_networkx()
    out = []
    for iso in GraphMatcher(g, g).isomorphisms_iter():
        out.append(tuple(iso[x] for x in range(m.n)))
        if len(out) >= limit:
            break
    return sorted(out)


def random_action(rng: random.Random, m: MedianAlgebra, max_order: int = 48, tries: int = 20) -> GroupAction:
    auts = automorphisms(m)
    if len(auts) > 1:
        auts = auts[1:]  # drop the identity, which sorts first
    for _ in range(tries):
        k = rng.randrange(1, 3)
        gens = {f"g{i}": rng.choice(auts) for i in range(k)}
        try:
            return validate_action(m, gens, f"G_{m.name}", limit=max_order)
        except LimitExceeded:
            continue
    return validate_action(m, {"g0": auts[0]}, f"G_{m.name}")


def random_tree_algebra(rng: random.Random, n: int) -> MedianAlgebra:
    return tree_algebra(random_tree(rng, n))
