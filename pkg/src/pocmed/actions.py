"""Finite group actions on finite median algebras.

A group is given by generating permutations of the carrier and realized as
the closure of those permutations; every element carries a word in the
generators. Composition reads right to left: ``(g*h)[x] = g[h[x]]``.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .bits import iter_bits, mask_of, popcount
from .construct import MARGIN
from .duality import congruence_quotient
from .errors import InternalError, LimitExceeded, ParseError, PocmedError, PreconditionError
from .median import MedianAlgebra, convex_hull, is_convex, is_cube

GROUP_LIMIT = 10080


class GroupAction:
    def __init__(self, algebra: MedianAlgebra, gen_names: Sequence[str], gens: Sequence[tuple[int, ...]],
                 elements: list[tuple[int, ...]], words: list[tuple[str, ...]], name: str = "G"):
        self.algebra = algebra
        self.gen_names = tuple(gen_names)
        self.gens = tuple(gens)
        self.elements = elements
        self.words = words
        self.name = name
        self.index = {g: i for i, g in enumerate(elements)}
        m = algebra
        pos = {h: i for i, h in enumerate(m.halfspace_masks)}
        self.hs_perm = []
        for g in elements:
            row = []
            for h in m.halfspace_masks:
                img = mask_of(g[x] for x in iter_bits(h))
                if img not in pos:
                    raise InternalError("group element does not map half spaces to half spaces")
                row.append(pos[img])
            self.hs_perm.append(tuple(row))

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, i: int, j: int) -> int:
        g, h = self.elements[i], self.elements[j]
        return self.index[tuple(g[x] for x in h)]

    def inv(self, i: int) -> int:
        g = self.elements[i]
        out = [0] * len(g)
        for x, y in enumerate(g):
            out[y] = x
        return self.index[tuple(out)]

    def word(self, i: int) -> str:
        return "*".join(self.words[i]) or "1"

    def gen_indices(self) -> list[int]:
        return [self.index[g] for g in self.gens]

    def hyperplane_perm(self, i: int) -> tuple[tuple[int, bool], ...]:
        """Per hyperplane j: the image hyperplane and whether the named side
        is sent to the named side."""
        row = self.hs_perm[i]
        return tuple(((row[2 * j + 2] >> 1) - 1, row[2 * j + 2] % 2 == 0) for j in range(self.algebra.k))


def automorphism_witness(m: MedianAlgebra, g: Sequence[int]) -> tuple[int, int, int] | None:
    for x, y, z in itertools.combinations(range(m.n), 3):
        if g[m.median(x, y, z)] != m.median(g[x], g[y], g[z]):
            return x, y, z
    return None


def validate_action(m: MedianAlgebra, generators: Mapping[str, Sequence[int]], name: str = "G",
                    limit: int = GROUP_LIMIT) -> GroupAction:
    names, gens = [], []
    for gname, img in generators.items():
        img = tuple(int(v) for v in img)
        if sorted(img) != list(range(m.n)):
            raise PreconditionError(f"generator {gname} is not a bijection of the carrier")
        w = automorphism_witness(m, img)
        if w is not None:
            raise PreconditionError(f"generator {gname} does not preserve the median at "
                                    f"({', '.join(m.labels[i] for i in w)})")
        names.append(gname)
        gens.append(img)
    identity = tuple(range(m.n))
    elements, words = [identity], [()]
    seen = {identity}
    k = 0
    while k < len(elements):
        e = elements[k]
        for gname, g in zip(names, gens):
            new = tuple(e[x] for x in g)
            if new not in seen:
                if len(elements) >= limit:
                    raise LimitExceeded(f"group has more than {limit} elements")
                seen.add(new)
                elements.append(new)
                words.append(words[k] + (gname,))
        k += 1
    return GroupAction(m, names, gens, elements, words, name)


def parse_action_source(text: str, loader: Callable[[str], MedianAlgebra]) -> GroupAction:
    """``action <name> on <med-file>`` then ``gen <g>: x->y ...`` lines."""
    header = None
    m = None
    gens: dict[str, list[int]] = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 4 or parts[0] != "action" or parts[2] != "on":
                raise ParseError("expected 'action <name> on <med-file>'", no)
            header = parts[1]
            m = loader(parts[3])
            continue
        if parts[0] != "gen" or len(parts) < 2 or not parts[1].endswith(":"):
            raise ParseError("expected 'gen <name>: x->y ...'", no)
        gname = parts[1][:-1]
        if gname in gens:
            raise ParseError(f"generator {gname} defined twice", no)
        img = [-1] * m.n
        for tok in parts[2:]:
            if "->" not in tok:
                raise ParseError(f"bad mapping {tok!r}", no)
            a, b = tok.split("->", 1)
            try:
                x, y = m.element(a), m.element(b)
            except PocmedError as e:
                raise ParseError(str(e), no) from None
            if img[x] != -1:
                raise ParseError(f"{a} mapped twice", no)
            img[x] = y
        if -1 in img:
            missing = [m.labels[x] for x, y in enumerate(img) if y == -1]
            raise ParseError(f"generator {gname} leaves {' '.join(missing)} unmapped", no)
        gens[gname] = img
    if header is None:
        raise ParseError("empty action file", 1)
    return validate_action(m, gens, header)


def load_action(path: str, med_loader: Callable[[str], MedianAlgebra]) -> GroupAction:
    base = os.path.dirname(os.path.abspath(path))
    with open(path) as fh:
        text = fh.read()
    return parse_action_source(text, lambda p: med_loader(p if os.path.isabs(p) else os.path.join(base, p)))


def to_action_source(a: GroupAction, med_file: str) -> str:
    lines = [f"action {a.name} on {med_file}"]
    labels = a.algebra.labels
    for gname, g in zip(a.gen_names, a.gens):
        lines.append(f"gen {gname}: " + " ".join(f"{labels[x]}->{labels[y]}" for x, y in enumerate(g)))
    return "\n".join(lines) + "\n"


# -- orbits ------------------------------------------------------------------------


def _orbit_partition(n: int, perms: Sequence[Sequence[int]]) -> list[list[int]]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in perms:
        for x, y in enumerate(p):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
    groups: dict[int, list[int]] = {}
    for x in range(n):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values())


def vertex_orbits(a: GroupAction) -> list[list[int]]:
    return _orbit_partition(a.algebra.n, a.gens)


def hyperplane_orbits(a: GroupAction) -> list[list[int]]:
    perms = [[j for j, _ in a.hyperplane_perm(i)] for i in a.gen_indices()]
    return _orbit_partition(a.algebra.k, perms)


def orbits(a: GroupAction) -> tuple[list[list[int]], list[list[int]]]:
    return vertex_orbits(a), hyperplane_orbits(a)


def orbit_of(a: GroupAction, x: int) -> int:
    return mask_of(g[x] for g in a.elements)


# -- fixed cube --------------------------------------------------------------------


@dataclass(frozen=True)
class FixedCubeResult:
    cube: int
    majority: int  # half-space indices with more than half of the hull
    hull: int
    point: int

    @property
    def is_singleton(self) -> bool:
        return popcount(self.cube) == 1


def fixed_cube(a: GroupAction, x: int = 0) -> FixedCubeResult:
    m = a.algebra
    c = convex_hull(m, orbit_of(a, x))
    size = popcount(c)
    hs = m.halfspace_masks
    maj = [h for h in range(len(hs)) if 2 * popcount(c & hs[h]) > size]
    for h1, h2 in itertools.combinations(maj, 2):
        if not c & hs[h1] & hs[h2]:
            raise InternalError("two majority half spaces miss each other inside the hull")
    w = c
    for h in maj:
        w &= hs[h]
    if not w:
        raise InternalError("fixed cube is empty")
    for g in a.gens:
        if mask_of(g[y] for y in iter_bits(w)) != w:
            raise InternalError("fixed cube is not invariant")
    if not is_convex(m, w) or not is_cube(m, w):
        raise InternalError("fixed cube is not a convex cube")
    return FixedCubeResult(w, mask_of(maj), c, x)


@dataclass(frozen=True)
class SimpleReport:
    is_simple: bool
    is_cube: bool
    fixed_point: int | None


def simple_analysis(a: GroupAction) -> SimpleReport:
    m = a.algebra
    simple = len(hyperplane_orbits(a)) == 1
    cube = is_cube(m, m.full)
    fixed = None
    if simple and not cube:
        pts = [x for x in range(m.n) if all(g[x] == x for g in a.gens)]
        if len(pts) != 1:
            raise InternalError(f"simple non-cube action has {len(pts)} fixed points")
        fixed = pts[0]
        w = fixed_cube(a).cube
        if w != 1 << fixed:
            raise InternalError("fixed cube differs from the fixed point")
    return SimpleReport(simple, cube, fixed)


# -- pairing -----------------------------------------------------------------------


def pairing_mask(a: GroupAction, h: int, x: int) -> int:
    """Group elements g (by index) with gx in half space h."""
    hm = a.algebra.halfspace_masks[h]
    return mask_of(i for i, g in enumerate(a.elements) if hm >> g[x] & 1)


def _left(a: GroupAction, i: int, s: int) -> int:
    return mask_of(a.mul(i, j) for j in iter_bits(s))


def _right(a: GroupAction, s: int, i: int) -> int:
    return mask_of(a.mul(j, i) for j in iter_bits(s))


@dataclass(frozen=True)
class PairingTable:
    halfspace: int
    point: int
    members: int  # bitset over group element indices


def pairing(a: GroupAction, h: int, x: int) -> PairingTable:
    m = a.algebra
    if not 2 <= h < 2 * m.k + 2:
        raise PreconditionError("pairing needs a proper half space")
    table = PairingTable(h, x, pairing_mask(a, h, x))
    failure = pairing_identities(a, h, x)
    if failure:
        raise InternalError(f"pairing identity fails: {failure}")
    return table


def pairing_identities(a: GroupAction, h: int, x: int) -> str | None:
    """Check equivariance, the poc and median morphism properties and the
    symmetric-difference formula at (h, x); return the first failure."""
    m = a.algebra
    base = pairing_mask(a, h, x)
    full = (1 << a.order) - 1
    for i, g in enumerate(a.elements):
        if _left(a, i, base) != pairing_mask(a, a.hs_perm[i][h], x):
            return f"left translate by {a.word(i)}"
        if _right(a, base, a.inv(i)) != pairing_mask(a, h, g[x]):
            return f"right translate by {a.word(i)}"
    hs = m.halfspace_masks
    masks = [pairing_mask(a, e, x) for e in range(len(hs))]
    for e in range(len(hs)):
        if masks[e ^ 1] != full ^ masks[e]:
            return f"complement at half space {e}"
        for f in range(len(hs)):
            if hs[e] & ~hs[f] == 0 and masks[e] & ~masks[f]:
                return f"order at half spaces {e}, {f}"
    pts = [pairing_mask(a, h, y) for y in range(m.n)]
    for y, z, w in itertools.combinations(range(m.n), 3):
        py, pz, pw = pts[y], pts[z], pts[w]
        if pts[m.median(y, z, w)] != (py & pz) | (pz & pw) | (pw & py):
            return f"median at ({m.labels[y]}, {m.labels[z]}, {m.labels[w]})"
    # A g1 + A g2 = {g : g^-1 H in the separator of g1^-1 x and g2^-1 x}
    invs = [a.inv(i) for i in range(a.order)]
    for i1, i2 in itertools.combinations_with_replacement(range(a.order), 2):
        lhs = _right(a, base, i1) ^ _right(a, base, i2)
        sep = m.sig[a.elements[invs[i1]][x]] ^ m.sig[a.elements[invs[i2]][x]]
        rhs = mask_of(g for g in range(a.order) if sep >> ((a.hs_perm[invs[g]][h] >> 1) - 1) & 1)
        if lhs != rhs:
            return f"symmetric difference at ({a.word(i1)}, {a.word(i2)})"
    return None


# -- hyperplane quotient -------------------------------------------------------------


@dataclass
class HyperplaneQuotient:
    halfspace: int
    orbit: list[int]  # hyperplane indices in the orbit
    quotient: MedianAlgebra
    projection: tuple[int, ...]
    action: GroupAction
    d_h: np.ndarray
    meet: int  # intersection of all translates of H
    meet_star: int  # intersection of all translates of the complement

    @property
    def cuts_properly(self) -> bool:
        return not self.meet and not self.meet_star


def hyperplane_quotient(a: GroupAction, h: int) -> HyperplaneQuotient:
    m = a.algebra
    if not 2 <= h < 2 * m.k + 2:
        raise PreconditionError("needs a proper half space")
    orbit = sorted({(a.hs_perm[i][h] >> 1) - 1 for i in range(a.order)})
    on = mask_of(orbit)
    u = mask_of(e for l in range(m.k) if not on >> l & 1 for e in (2 * l + 2, 2 * l + 3))
    q = congruence_quotient(m, u)
    proj = q.projection
    gens = {}
    for gname, g in zip(a.gen_names, a.gens):
        img = [-1] * q.algebra.n
        for x in range(m.n):
            c, d = proj[x], proj[g[x]]
            if img[c] not in (-1, d):
                raise InternalError("action does not descend to the quotient")
            img[c] = d
        gens[gname] = img
    qa = validate_action(q.algebra, gens, f"{a.name}_H")
    d_h = np.zeros((m.n, m.n), dtype=np.int64)
    for x in range(m.n):
        for y in range(m.n):
            d_h[x, y] = popcount((m.sig[x] ^ m.sig[y]) & on)
            if popcount(q.algebra.sig[proj[x]] ^ q.algebra.sig[proj[y]]) != d_h[x, y]:
                raise InternalError("quotient metric differs from the orbit metric")
    hs = m.halfspace_masks
    meet, meet_star = m.full, m.full
    for i in range(a.order):
        meet &= hs[a.hs_perm[i][h]]
        meet_star &= hs[a.hs_perm[i][h ^ 1]]
    return HyperplaneQuotient(h, orbit, q.algebra, proj, qa, d_h, meet, meet_star)


# -- Hilbert space vectors --------------------------------------------------------------


@dataclass
class HilbertReport:
    base: int
    vectors: np.ndarray  # one row per element, one column per hyperplane


def _act_on_vectors(a: GroupAction, i: int, s: np.ndarray, base: int) -> np.ndarray:
    """Twisted action: coordinate H of g.s is s(g^-1 H), flipped when H
    separates the base point from its image."""
    m = a.algebra
    gi = a.inv(i)
    perm = [j for j, _ in a.hyperplane_perm(gi)]
    out = s[..., perm]
    flip = m.sig[base] ^ m.sig[a.elements[i][base]]
    cols = [l for l in range(m.k) if flip >> l & 1]
    if cols:
        out = out.copy()
        out[..., cols] = 1 - out[..., cols]
    return out


def hilbert_embedding(a: GroupAction, v: int = 0, check_all_pairs: bool = True) -> HilbertReport:
    m = a.algebra
    s = np.array([[(m.sig[x] ^ m.sig[v]) >> l & 1 for l in range(m.k)] for x in range(m.n)], dtype=np.int64)
    if s[v].any():
        raise InternalError("base vector is not zero")
    diff = s[:, None, :] - s[None, :, :]
    norms = (diff * diff).sum(axis=2)
    for x in range(m.n):
        for y in range(m.n):
            if norms[x, y] != popcount(m.sig[x] ^ m.sig[y]):
                raise InternalError("squared distance of vectors differs from the median metric")
    moved = [_act_on_vectors(a, i, s, v) for i in range(a.order)]
    for i, g in enumerate(a.elements):
        if not np.array_equal(moved[i], s[list(g)]):
            raise InternalError(f"{a.word(i)} does not send s_x to s_gx")
    pairs = itertools.product(range(a.order), repeat=2) if check_all_pairs else \
        itertools.product(a.gen_indices(), range(a.order))
    for i1, i2 in pairs:
        lhs = _act_on_vectors(a, i1, moved[i2], v)
        if not np.array_equal(lhs, moved[a.mul(i1, i2)]):
            raise InternalError("twisted action is not associative")
    return HilbertReport(v, s)


# -- shifts ----------------------------------------------------------------------------


def finite_shifts(a: GroupAction) -> list[tuple[int, int]]:
    """Pairs (g, H) with gH a proper subset of H; always empty for finite groups."""
    hs = a.algebra.halfspace_masks
    out = []
    for i in range(a.order):
        for h in range(2, len(hs)):
            img = hs[a.hs_perm[i][h]]
            if img != hs[h] and img & ~hs[h] == 0:
                out.append((i, h))
    if out:
        raise InternalError("a finite group shifts a half space")
    return out


def shift_report(window) -> list[tuple[str, str, str]]:
    """(g, set, direction) for ball elements whose translate of A is strictly
    inside A (shrinks) or strictly contains it (grows)."""
    g, a_set = window.spec.resolve()
    big = g.ball(window.spec.radius + MARGIN)
    in_a = [a_set(h) for h in big]
    out = []
    for t in window.ball:
        ti = g.inv(t)
        inside = [a_set(g.mul(ti, h)) for h in big]
        sub = all(y for x, y in zip(inside, in_a) if x)
        sup = all(x for x, y in zip(inside, in_a) if y)
        if sub and not sup:
            out.append((g.label(t), "A", "shrinks"))
        elif sup and not sub:
            out.append((g.label(t), "A", "grows"))
    if out and any(b <= a for a, b in zip(window.growth, window.growth[1:])):
        raise InternalError("shift found but hyperplane count does not grow with the radius")
    return out
