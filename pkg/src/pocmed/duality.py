"""Duality between finite median algebras and finite poc sets.

A median algebra M has the poc set M° of its half spaces; a poc set P has the
median algebra P° of its ultrafilters. Both evaluation maps into the double
dual are checked explicitly. Also here: dual maps, free median algebras, the
generation criterion and congruences.

Congruences are described by symmetric sets U of proper half spaces. Every
subset of a finite dual is open, so no topological condition appears.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from . import kernels
from .bits import iter_bits, majority, mask_of
from .errors import InternalError, PocmedError, PreconditionError
from .median import MedianAlgebra, is_convex, median_closure, tau
from .pocset import (ENUMERATION_LIMIT, PocSet, boolean_poc, classify_subset, enumerate_ultrafilters,
                     star_mask)


def dual_of_median(m: MedianAlgebra) -> PocSet:
    return PocSet.from_sets(m.n, m.hyperplanes, [f"h{j}" for j in range(m.k)], f"{m.name}_dual")


def dual_of_poc(p: PocSet, limit: int = ENUMERATION_LIMIT) -> MedianAlgebra:
    us = enumerate_ultrafilters(p, limit)
    return MedianAlgebra.from_sets(us, [f"u{i}" for i in range(len(us))], f"{p.name}_dual", ground=p.size)


@dataclass(frozen=True)
class DualityCertificate:
    direction: str
    ev_map: tuple[int | None, ...]
    is_injective: bool
    is_surjective: bool
    preserves_structure: bool
    missed: tuple[int, ...] = ()
    source_labels: tuple[str, ...] = field(default=(), compare=False)

    @property
    def is_isomorphism(self) -> bool:
        return self.is_injective and self.is_surjective and self.preserves_structure

    def report(self) -> str:
        lines = [f"direction: {self.direction}", f"iso: {'yes' if self.is_isomorphism else 'no'}"]
        lines.append(f"injective: {'yes' if self.is_injective else 'no'}")
        lines.append(f"surjective: {'yes' if self.is_surjective else 'no'}")
        for x, img in enumerate(self.ev_map):
            lab = self.source_labels[x] if self.source_labels else str(x)
            lines.append(f"{lab} -> {'-' if img is None else img}")
        if self.missed:
            lines.append("missed: " + " ".join(map(str, self.missed)))
        return "\n".join(lines) + "\n"


def double_dual_check(obj: MedianAlgebra | PocSet, strict: bool = True) -> DualityCertificate:
    """Evaluate into the double dual and certify the result.

    With ``strict`` a failure raises :class:`InternalError`, because for
    finite objects the evaluation map is always an isomorphism.
    """
    if isinstance(obj, MedianAlgebra):
        cert = _median_double_dual(obj)
    elif isinstance(obj, PocSet):
        cert = _poc_double_dual(obj)
    else:
        raise PocmedError("expected a median algebra or a poc set")
    if strict and not cert.is_isomorphism:
        raise InternalError(f"evaluation into the double dual is not an isomorphism:\n{cert.report()}")
    return cert


def _median_double_dual(m: MedianAlgebra) -> DualityCertificate:
    p = dual_of_median(m)
    mm = dual_of_poc(p)
    pos = {u: i for i, u in enumerate(mm.points)}
    ev = tuple(pos.get(m.ev(x)) for x in range(m.n))
    hit = {i for i in ev if i is not None}
    injective = None not in ev and len(hit) == m.n
    missed = tuple(i for i in range(mm.n) if i not in hit)
    ok = injective
    if ok:
        for x, y, z in itertools.combinations(range(m.n), 3):
            if ev[m.median(x, y, z)] != mm.median(ev[x], ev[y], ev[z]):
                ok = False
                break
    return DualityCertificate("median->poc->median", ev, injective, not missed, ok, missed, m.labels)


def _poc_double_dual(p: PocSet) -> DualityCertificate:
    m = dual_of_poc(p)
    pp = dual_of_median(m)
    pos = {s: i for i, s in enumerate(pp.members)}
    images = [mask_of(x for x, u in enumerate(m.points) if u >> a & 1) for a in range(p.size)]
    ev = tuple(pos.get(s) for s in images)
    hit = {i for i in ev if i is not None}
    injective = None not in ev and len(hit) == p.size
    missed = tuple(i for i in range(pp.size) if i not in hit)
    ok = injective
    if ok:
        for a in range(p.size):
            if ev[a ^ 1] != ev[a] ^ 1:
                ok = False
            for b in range(p.size):
                if p.le(a, b) != pp.le(ev[a], ev[b]):
                    ok = False
    labels = tuple(p.token(a) for a in range(p.size))
    return DualityCertificate("poc->median->poc", ev, injective, not missed, ok, missed, labels)


# -- morphisms --------------------------------------------------------------


def median_morphism_witness(f: Sequence[int], m1: MedianAlgebra, m2: MedianAlgebra) -> tuple[int, int, int] | None:
    if len(f) != m1.n or any(not 0 <= y < m2.n for y in f):
        raise PreconditionError("map does not go from the first algebra to the second")
    for x, y, z in itertools.combinations_with_replacement(range(m1.n), 3):
        if f[m1.median(x, y, z)] != m2.median(f[x], f[y], f[z]):
            return x, y, z
    return None


def poc_morphism_witness(g: Sequence[int], p1: PocSet, p2: PocSet) -> tuple[str, tuple[int, ...]] | None:
    if len(g) != p1.size or any(not 0 <= b < p2.size for b in g):
        raise PreconditionError("map does not go from the first poc set to the second")
    if g[0] != 0:
        return "bottom", (0,)
    for a in range(p1.size):
        if g[a ^ 1] != g[a] ^ 1:
            return "star", (a,)
        for b in iter_bits(p1.up[a]):
            if not p2.le(g[a], g[b]):
                return "order", (a, b)
    return None


def is_poc_embedding(g: Sequence[int], p1: PocSet, p2: PocSet) -> bool:
    return all(p1.le(a, b) == p2.le(g[a], g[b]) for a in range(p1.size) for b in range(p1.size))


def dual_of_median_map(f: Sequence[int], m1: MedianAlgebra, m2: MedianAlgebra) -> list[int]:
    """Preimage map from the half spaces of m2 to those of m1 (indices)."""
    w = median_morphism_witness(f, m1, m2)
    if w is not None:
        raise PreconditionError(f"not a median morphism at {tuple(m1.labels[i] for i in w)}")
    pos = {h: i for i, h in enumerate(m1.halfspace_masks)}
    out = []
    for h in m2.halfspace_masks:
        pre = mask_of(x for x in range(m1.n) if h >> f[x] & 1)
        if pre not in pos:
            raise InternalError("preimage of a half space is not a half space")
        out.append(pos[pre])
    # f injective iff dual surjective; f surjective iff dual an embedding
    p1, p2 = dual_of_median(m1), dual_of_median(m2)
    injective = len(set(f)) == m1.n
    surjective = len(set(f)) == m2.n
    if injective != (len(set(out)) == p1.size):
        raise InternalError("injectivity of f does not match surjectivity of its dual")
    if surjective != is_poc_embedding(out, p2, p1):
        raise InternalError("surjectivity of f does not match the dual being an embedding")
    return out


def dual_of_poc_map(g: Sequence[int], p1: PocSet, p2: PocSet,
                    d1: MedianAlgebra | None = None, d2: MedianAlgebra | None = None) -> list[int]:
    """Preimage map from the ultrafilters of p2 to those of p1 (indices into
    ``dual_of_poc``)."""
    w = poc_morphism_witness(g, p1, p2)
    if w is not None:
        raise PreconditionError(f"not a poc morphism ({w[0]} fails at {[p1.token(a) for a in w[1]]})")
    d1 = d1 or dual_of_poc(p1)
    d2 = d2 or dual_of_poc(p2)
    pos = {u: i for i, u in enumerate(d1.points)}
    out = []
    for u in d2.points:
        pre = mask_of(a for a in range(p1.size) if u >> g[a] & 1)
        if pre not in pos:
            raise InternalError("preimage of an ultrafilter is not an ultrafilter")
        out.append(pos[pre])
    if is_poc_embedding(g, p1, p2) != (len(set(out)) == d1.n):
        raise InternalError("g is an embedding but its dual is not surjective, or conversely")
    if (len(set(g)) == p2.size) != (len(set(out)) == d2.n):
        raise InternalError("surjectivity of g does not match injectivity of its dual")
    return out


# -- free median algebras ---------------------------------------------------


@dataclass
class FreeMedian:
    algebra: MedianAlgebra
    generators: list[int]
    boolean: PocSet

    def census(self) -> list[tuple[str, int]]:
        return free_median_census(self)


FREE_LIMIT = 5


def free_median(n: int) -> FreeMedian:
    """Free median algebra on n generators, built inside the dual of the
    Boolean poc set on n points as the closure of the principal ultrafilters."""
    if not 1 <= n <= FREE_LIMIT:
        raise PreconditionError(f"generator count must be between 1 and {FREE_LIMIT}")
    p = boolean_poc(n)
    members = p.members
    principal = [mask_of(e for e, s in enumerate(members) if s >> i & 1) for i in range(n)]
    elems, parents = kernels.median_closure(principal, p.size, 1 << 12)
    for u in elems:
        if not classify_subset(p, u).ultrafilter:
            raise InternalError("closure left the ultrafilters")
    order = sorted(range(len(elems)), key=lambda i: elems[i])
    rank = {i: r for r, i in enumerate(order)}
    gens = [rank[i] for i in range(n)]
    labels = [""] * len(elems)
    for r, i in enumerate(order):
        labels[r] = f"g{i}" if i < n else f"x{r}"
    m = MedianAlgebra.from_sets([elems[i] for i in order], labels, f"free{n}", ground=p.size)
    fm = FreeMedian(m, gens, p)
    # discovery order, so parents always come first
    steps = [(rank[i], None if par is None else tuple(rank[j] for j in par)) for i, par in enumerate(parents)]
    _check_free(fm, steps)
    return fm


def _check_free(fm: FreeMedian, steps: list) -> None:
    m, gens = fm.algebra, fm.generators
    n = len(gens)
    # restriction to generators identifies half spaces with subsets of n
    traces = [mask_of(i for i, g in enumerate(gens) if h >> g & 1) for h in m.halfspace_masks]
    if sorted(traces) != list(range(1 << n)):
        raise InternalError("half spaces do not correspond to subsets of the generators")
    for a, ta in enumerate(traces):
        for b, tb in enumerate(traces):
            sub = m.halfspace_masks[a] & ~m.halfspace_masks[b] == 0
            if sub != (ta & ~tb == 0):
                raise InternalError("trace map is not an order isomorphism")
    # every map from the generators to 2 extends along the closure terms
    hs = set(m.halfspace_masks)
    for phi in range(1 << n):
        val = [None] * m.n
        for i, g in enumerate(gens):
            val[g] = phi >> i & 1
        for x, par in steps:
            if par is not None:
                a, b, c = par
                val[x] = majority(val[a], val[b], val[c])
        if mask_of(x for x in range(m.n) if val[x]) not in hs:
            raise InternalError("extension to 2 is not a median morphism")


def canonical_vertex(fm: FreeMedian) -> int:
    """Vertex on the majority side of every hyperplane (odd generator count)."""
    m, gens = fm.algebra, fm.generators
    if len(gens) % 2 == 0:
        raise PreconditionError("a canonical vertex needs an odd number of generators")
    sig = 0
    for j, h in enumerate(m.hyperplanes):
        if 2 * sum(h >> g & 1 for g in gens) > len(gens):
            sig |= 1 << j
    return m.index[sig]


_LETTERS = "xyzstuvw"


def _shape(sets: list[int], n: int) -> tuple:
    best = None
    for perm in itertools.permutations(range(n)):
        img = tuple(sorted(tuple(sorted(perm[i] for i in iter_bits(s))) for s in sets))
        key = (len(img), tuple(sorted(len(t) for t in img)), img)
        if best is None or key < best:
            best = key
    return best


def free_median_census(fm: FreeMedian) -> list[tuple[str, int]]:
    """Count elements by the shape of their minimal separating hyperplanes,
    seen from the canonical vertex. Each hyperplane is named by the generators
    on its minority side."""
    m, gens = fm.algebra, fm.generators
    n = len(gens)
    v = canonical_vertex(fm)
    small = []
    for j, h in enumerate(m.hyperplanes):
        side = h if not h >> v & 1 else m.full ^ h
        small.append(mask_of(i for i, g in enumerate(gens) if side >> g & 1))
    counts: dict[tuple, int] = {}
    for x in range(m.n):
        f = [small[j] for j in iter_bits(tau(m, x, v))]
        key = _shape(f, n)
        counts[key] = counts.get(key, 0) + 1

    def sort_key(item):
        (size, _, img), _count = item
        degree = max((sum(p in t for t in img) for p in range(n)), default=0)
        return size, sum(map(len, img)), -degree, img

    out = []
    for (size, _, img), count in sorted(counts.items(), key=sort_key):
        label = "{" + ",".join("".join(_LETTERS[i] for i in t) for t in img) + "}"
        out.append((label, count))
    return out


# -- generation ---------------------------------------------------------------


@dataclass(frozen=True)
class GenerationResult:
    generates: bool
    witness: tuple[int, int] | None  # half-space indices meeting off X
    closure: int


def generates(m: MedianAlgebra, xs: int) -> GenerationResult:
    hs = m.halfspace_masks
    witness = None
    for a, b in itertools.combinations_with_replacement(range(len(hs)), 2):
        meet = hs[a] & hs[b]
        if meet and not meet & xs:
            witness = (a, b)
            break
    closure = median_closure(m, xs) if xs else 0
    if (witness is None) != (closure == m.full):
        raise InternalError("half-space criterion disagrees with the median closure")
    return GenerationResult(witness is None, witness, closure)


# -- congruences --------------------------------------------------------------


@dataclass(frozen=True)
class CongruenceData:
    classes: tuple[int, ...]  # class id per element, numbered by first member
    contracted: int  # bitset over half-space indices


@dataclass(frozen=True)
class Quotient:
    algebra: MedianAlgebra
    projection: tuple[int, ...]
    kept: tuple[int, ...]  # hyperplanes of M that survive, in quotient order


def check_contracted(m: MedianAlgebra, u: int) -> None:
    if u & 3:
        raise PreconditionError("the empty set and the whole algebra cannot be contracted")
    if u >> (2 * m.k + 2):
        raise PreconditionError("unknown half space index")
    if star_mask(u) != u:
        raise PreconditionError("contracted set must be closed under complement")


def hyperplanes_to_halfspaces(js) -> int:
    return mask_of(e for j in js for e in (2 * j + 2, 2 * j + 3))


def nabla(m: MedianAlgebra, u: int) -> tuple[int, ...]:
    """Class id per element for the relation: all separating half spaces in u."""
    check_contracted(m, u)
    keep = mask_of(j for j in range(m.k) if not u >> (2 * j + 2) & 1)
    ids: dict[int, int] = {}
    return tuple(ids.setdefault(s & keep, len(ids)) for s in m.sig)


def congruence_quotient(m: MedianAlgebra, u: int) -> Quotient:
    classes = nabla(m, u)
    kept = tuple(j for j in range(m.k) if not u >> (2 * j + 2) & 1)
    reps: dict[int, int] = {}
    for x, c in enumerate(classes):
        reps.setdefault(c, x)
    sets = []
    for c in range(len(reps)):
        s = m.sig[reps[c]]
        sets.append(mask_of(i for i, j in enumerate(kept) if s >> j & 1))
    q = MedianAlgebra.from_sets(sets, [m.labels[reps[c]] for c in range(len(reps))], f"{m.name}_q",
                                ground=len(kept))
    # classes are convex
    for c in range(len(reps)):
        members = mask_of(x for x, d in enumerate(classes) if d == c)
        if not is_convex(m, members):
            raise InternalError("congruence class is not convex")
    # the projection is a median morphism
    for x, y, z in itertools.combinations(range(m.n), 3):
        if classes[m.median(x, y, z)] != q.median(classes[x], classes[y], classes[z]):
            raise InternalError("quotient median is not well defined")
    # half spaces of the quotient pull back to exactly the uncontracted ones
    pulled = sorted(mask_of(x for x in range(m.n) if h >> classes[x] & 1) for h in q.halfspace_masks)
    expected = sorted(h for i, h in enumerate(m.halfspace_masks) if not u >> i & 1)
    if pulled != expected:
        raise InternalError("dual of the quotient is not the uncontracted half spaces")
    return Quotient(q, classes, kept)


def partition_from_labels(labels: Sequence) -> tuple[int, ...]:
    ids: dict = {}
    return tuple(ids.setdefault(l, len(ids)) for l in labels)


def congruence_witness(m: MedianAlgebra, classes: Sequence[int]) -> tuple[int, int, int, int] | None:
    """(x, y, u, v) with x ~ y but m(x,u,v) not ~ m(y,u,v), if any."""
    for x, y in itertools.combinations(range(m.n), 2):
        if classes[x] != classes[y]:
            continue
        for a in range(m.n):
            for b in range(a, m.n):
                if classes[m.median(x, a, b)] != classes[m.median(y, a, b)]:
                    return x, y, a, b
    return None


def congruence_of_relation(m: MedianAlgebra, classes: Sequence) -> CongruenceData:
    classes = partition_from_labels(classes)
    if len(classes) != m.n:
        raise PreconditionError("relation must label every element")
    w = congruence_witness(m, classes)
    if w is not None:
        raise PreconditionError(f"not a congruence at {tuple(m.labels[i] for i in w)}")
    u = 0
    for x, y in itertools.permutations(range(m.n), 2):
        if classes[x] == classes[y]:
            for j in iter_bits(m.sig[x] ^ m.sig[y]):
                u |= 1 << (2 * j + 2) | 1 << (2 * j + 3)
    if nabla(m, u) != classes:
        raise InternalError("contracting the separators does not give back the relation")
    return CongruenceData(classes, u)


def touching(m: MedianAlgebra, c: int) -> int:
    """Half spaces disjoint from c and maximal with that property."""
    hs = m.halfspace_masks
    missing = [h for h, mask in enumerate(hs) if not mask & c]
    return mask_of(h for h in missing
                   if not any(g != h and hs[h] & ~hs[g] == 0 for g in missing))


def cut_set_congruence(m: MedianAlgebra, c: int) -> int:
    """Contract exactly the hyperplanes that cut c."""
    hs = m.halfspace_masks
    return mask_of(h for h in range(2, len(hs)) if hs[h] & c and hs[h ^ 1] & c)


def non_touching_congruence(m: MedianAlgebra, c: int) -> int:
    """Contract every hyperplane with no side touching c."""
    t = touching(m, c)
    return mask_of(h for h in range(2, 2 * m.k + 2) if not (t >> h & 1 or t >> (h ^ 1) & 1))
