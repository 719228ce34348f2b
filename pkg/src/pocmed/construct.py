"""Median algebras built from poc sets.

Trees and their poc sets of oriented edges, founded and well founded
ultrafilters, realization through maximal transverse sets, the incremental
ultrafilter construction, representations on sets, and finite windows of
the group construction for Z and the free group on two letters.

An oriented edge e is identified with the set of vertices it points to,
and edges are ordered by inclusion of these sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .bits import iter_bits, mask_of, popcount
from .errors import InternalError, LimitExceeded, PocmedError, PreconditionError
from .graphs import SimpleGraph, is_isomorphic, maximal_cliques, parse_graph_source
from .median import CLOSURE_LIMIT, MedianAlgebra, is_convex, median_closure, median_graph, subalgebra
from .pocset import (ENUMERATION_LIMIT, PocSet, classify_subset, enumerate_ultrafilters, star_mask,
                     transversality_graph, transverse)

# -- trees --------------------------------------------------------------------


class Tree:
    """Finite tree. Unoriented edge i joins ``edges[i] = (u, v)`` with u < v;
    poc element 2i+2 is the orientation u -> v and 2i+3 is v -> u."""

    def __init__(self, graph: SimpleGraph, name: str = "T"):
        if graph.n == 0:
            raise PocmedError("a tree needs at least one vertex")
        if not graph.is_connected() or len(graph.edges()) != graph.n - 1:
            raise PocmedError("input is not a tree")
        self.graph = graph
        self.name = name
        self.edges = tuple(graph.edges())
        sides = []
        for u, v in self.edges:
            # vertices reachable from v without crossing the edge
            seen, stack = 1 << v, [v]
            while stack:
                w = stack.pop()
                for x in iter_bits(graph.adj[w] & ~seen):
                    if w == v and x == u:
                        continue
                    seen |= 1 << x
                    stack.append(x)
            sides.append(seen)
        self._sides = tuple(sides)

    @classmethod
    def from_edges(cls, labels: Sequence[str] | int, edges, name: str = "T") -> "Tree":
        return cls(SimpleGraph.from_edges(labels, edges), name)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def labels(self) -> tuple[str, ...]:
        return self.graph.labels

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def iota(self, e: int) -> int:
        u, v = self.edges[(e - 2) // 2]
        return u if e % 2 == 0 else v

    def tau(self, e: int) -> int:
        u, v = self.edges[(e - 2) // 2]
        return v if e % 2 == 0 else u

    def points_to(self, e: int) -> int:
        """Vertices w with e -> w, that is the component containing tau(e)."""
        s = self._sides[(e - 2) // 2]
        return s if e % 2 == 0 else self.full ^ s


def parse_tree_source(text: str) -> Tree:
    name, g = parse_graph_source(text, header="tree")
    return Tree(g, name)


def to_tree_source(t: Tree) -> str:
    lines = [f"tree {t.name}"]
    lines += [f"edge {t.labels[u]} {t.labels[v]}" for u, v in t.edges]
    return "\n".join(lines) + "\n"


def poc_of_tree(t: Tree) -> PocSet:
    names = [f"{t.labels[u]}_{t.labels[v]}" for u, v in t.edges]
    return PocSet.from_sets(t.n, [t.points_to(2 * i + 2) for i in range(len(t.edges))], names, f"poc_{t.name}")


def tree_algebra(t: Tree) -> MedianAlgebra:
    """Vertex set of the tree with the tree median."""
    return MedianAlgebra(t.labels, [t.points_to(2 * i + 2) for i in range(len(t.edges))], t.name)


# -- founded and well founded ultrafilters --------------------------------------


@dataclass(frozen=True)
class FoundednessReport:
    founded: bool
    well_founded: bool
    minimal: int
    offenders: int


def well_foundedness(p: PocSet, u: int, open_below: int = 0) -> FoundednessReport:
    """Foundedness of an ultrafilter u.

    ``open_below`` marks elements that, in a larger poc set seen through this
    finite window, have infinitely many elements of u below them. Without it
    every ultrafilter of a finite poc set is well founded.
    """
    if not classify_subset(p, u).ultrafilter:
        raise PreconditionError("not an ultrafilter")
    strict_down = [p.down[a] & ~(1 << a) for a in range(p.size)]
    minimal = mask_of(a for a in iter_bits(u) if not strict_down[a] & u)
    good = minimal & ~open_below
    unfounded = mask_of(a for a in iter_bits(u) if not p.down[a] & good)
    infinite = mask_of(a for a in iter_bits(u) if p.down[a] & u & open_below)
    founded = not unfounded
    well = not infinite
    if well and not founded:
        raise InternalError("well founded but not founded")
    return FoundednessReport(founded, well, minimal, unfounded | infinite)


# -- realization through maximal transverse sets --------------------------------


def maximal_transverse_sets(p: PocSet, limit: int = 1 << 16) -> list[int]:
    """Inclusion-maximal sets of pairwise transverse proper elements."""
    out = []
    cliques = maximal_cliques(transversality_graph(p)) if p.n_pairs else [0]
    for c in cliques:
        pairs = list(iter_bits(c))
        for orient in range(1 << len(pairs)):
            out.append(mask_of(2 * i + 2 + (orient >> k & 1) for k, i in enumerate(pairs)))
            if len(out) > limit:
                raise LimitExceeded(f"more than {limit} maximal transverse sets")
    return out


def tau_of(p: PocSet, a_set: int) -> int:
    """Elements above some a in the set, or strictly above its star."""
    out = 2
    for a in iter_bits(a_set):
        out |= p.up[a] | (p.up[a ^ 1] & ~(1 << (a ^ 1)))
    return out


@dataclass
class Realization:
    algebra: MedianAlgebra
    transverse_sets: list[int]
    tau: list[int]  # element index per transverse set


def dunwoody_realize(p: PocSet, limit: int = ENUMERATION_LIMIT) -> Realization:
    sets = maximal_transverse_sets(p)
    images = [tau_of(p, a) for a in sets]
    us = sorted(set(images))
    for u in us:
        rep = well_foundedness(p, u)
        if not rep.well_founded or not classify_subset(p, u).ultrafilter:
            raise InternalError(f"tau value {p.tokens(u)} is not a well founded ultrafilter")
    known = set(us)
    # every ultrafilter is founded here, so the set must be closed under
    # flipping a minimal element
    strict_down = [p.down[a] & ~(1 << a) for a in range(p.size)]
    for u in us:
        for a in iter_bits(u & p.proper_mask):
            if not strict_down[a] & u & p.proper_mask:
                v = u ^ (1 << a) ^ (1 << (a ^ 1))
                if v not in known:
                    raise InternalError("realized set is not closed under flipping minimal elements")
    if p.n_pairs <= limit and set(enumerate_ultrafilters(p, limit)) != known:
        raise InternalError("realized set differs from the ultrafilters")
    pos = {u: i for i, u in enumerate(us)}
    m = MedianAlgebra.from_sets(us, [f"u{i}" for i in range(len(us))], f"{p.name}_real", ground=p.size)
    if not evaluation_is_iso(p, m):
        raise InternalError("dual of the realization is not the input poc set")
    return Realization(m, sets, [pos[u] for u in images])


def evaluation_is_iso(p: PocSet, m: MedianAlgebra) -> bool:
    """Is a -> {U : a in U} an isomorphism from p onto the half spaces of m?"""
    hs = {h: i for i, h in enumerate(m.halfspace_masks)}
    ev = [mask_of(x for x, u in enumerate(m.points) if u >> a & 1) for a in range(p.size)]
    if any(e not in hs for e in ev) or len(set(ev)) != p.size or len(hs) != p.size:
        return False
    return all(p.le(a, b) == (ev[a] & ~ev[b] == 0) for a in range(p.size) for b in range(p.size))


# -- incremental construction ----------------------------------------------------


@dataclass(frozen=True)
class Step:
    pair: int
    case: int
    added: int


class IncrementalUltrafilter:
    """Builds a well founded ultrafilter one pair at a time.

    The state can be fed further pairs at any point; ``check`` re-verifies
    the filter-base, convexity and downward-closure conditions after each
    step.
    """

    def __init__(self, p: PocSet, check: bool = True):
        self.p = p
        self.f = 0
        self.trace: list[Step] = []
        self.check = check
        self._strict_down = [p.down[a] & ~(1 << a) for a in range(p.size)]

    def _pairs(self, s: int) -> int:
        return s | star_mask(s)

    def feed(self, pair: int) -> Step:
        p = self.p
        if not 0 <= pair < p.n_pairs:
            raise PreconditionError(f"unknown pair {pair}")
        a = 2 * pair + 2
        f = self.f
        fbar = self._pairs(f)
        if fbar >> a & 1:
            step = Step(pair, 2, 0)
        elif all(transverse(p, a, b) for b in iter_bits(f)):
            step = Step(pair, 1, 1 << a)
        else:
            below = self._pairs(f)  # x or x* for x in f
            target = None
            for q in (a, a ^ 1):
                if self._strict_down[q] & below:
                    target = q
                    break
            if target is None:
                raise InternalError("no element of the base lies below the pair")
            added = 0
            for b in range(2, p.size):
                if fbar >> b & 1 or not p.le(b, target):
                    continue
                if p.down[b] & below:
                    added |= 1 << b
            step = Step(pair, 3, added)
        old = self.f
        self.f |= step.added
        if self.check:
            self._verify(old)
        self.trace.append(step)
        return step

    def _verify(self, old: int) -> None:
        p, f = self.p, self.f
        if not classify_subset(p, f).filter_base and f:
            raise InternalError("base stopped being a filter base")
        fbar = self._pairs(f)
        lo = hi = 0
        for x in iter_bits(fbar):
            lo |= p.up[x]
            hi |= p.down[x]
        if lo & hi & p.proper_mask & ~fbar:
            raise InternalError("pairs of the base are not convex")
        for b in iter_bits(f & ~old):
            if p.up[b] & ~(1 << b) & old:
                raise InternalError("new element lies below an old one")

    @property
    def result(self) -> int:
        return self.f | 2


def incremental_ultrafilter(p: PocSet, order: Sequence[int] | None = None,
                            check: bool = True) -> tuple[int, list[Step]]:
    order = list(range(p.n_pairs)) if order is None else list(order)
    if sorted(order) != list(range(p.n_pairs)):
        raise PreconditionError("enumeration must list every proper pair exactly once")
    state = IncrementalUltrafilter(p, check)
    for i in order:
        state.feed(i)
    u = state.result
    if not classify_subset(p, u).ultrafilter:
        raise InternalError("incremental construction did not give an ultrafilter")
    return u, state.trace


# -- representations -------------------------------------------------------------


@dataclass(frozen=True)
class Representation:
    poc: PocSet
    labels: tuple[str, ...]
    rho: tuple[int, ...]  # subset of the ground set per poc element

    @classmethod
    def from_pairs(cls, p: PocSet, labels: Sequence[str] | int, reps: Sequence[int]) -> "Representation":
        if isinstance(labels, int):
            labels = [f"x{i}" for i in range(labels)]
        full = (1 << len(labels)) - 1
        if len(reps) != p.n_pairs:
            raise PreconditionError("need one subset per proper pair")
        rho = [0, full]
        for r in reps:
            rho += [r, full ^ r]
        return cls(p, tuple(labels), tuple(rho))

    @property
    def n(self) -> int:
        return len(self.labels)

    def embedding_witness(self) -> tuple[int, int] | None:
        p, rho = self.poc, self.rho
        full = (1 << self.n) - 1
        if rho[0] != 0:
            return 0, 0
        for a in range(p.size):
            if rho[a ^ 1] != full ^ rho[a]:
                return a, a ^ 1
            for b in range(p.size):
                if p.le(a, b) != (rho[a] & ~rho[b] == 0):
                    return a, b
        return None

    def iota(self, x: int) -> int:
        return mask_of(a for a, r in enumerate(self.rho) if r >> x & 1)

    def delta(self, x: int, y: int) -> int:
        """Proper elements containing x but not y."""
        return mask_of(a for a in range(2, self.poc.size) if self.rho[a] >> x & 1 and not self.rho[a] >> y & 1)


@dataclass
class RealizedRepresentation:
    algebra: MedianAlgebra
    iota: tuple[int, ...]  # element index per ground point


def realize_representation(rep: Representation, limit: int = CLOSURE_LIMIT) -> RealizedRepresentation:
    w = rep.embedding_witness()
    if w is not None:
        p = rep.poc
        raise PreconditionError(f"not an embedding at ({p.token(w[0])}, {p.token(w[1])})")
    images = [rep.iota(x) for x in range(rep.n)]
    for u in images:
        if not classify_subset(rep.poc, u).ultrafilter:
            raise InternalError("image of a point is not an ultrafilter")
    try:
        elems, _ = kernels.median_closure(images, rep.poc.size, limit)
    except OverflowError:
        raise LimitExceeded(f"median closure exceeds {limit} elements") from None
    pos = {u: i for i, u in enumerate(elems)}
    labels = [f"m{i}" for i in range(len(elems))]
    for x in reversed(range(rep.n)):
        labels[pos[images[x]]] = rep.labels[x]
    m = MedianAlgebra.from_sets(elems, labels, f"{rep.poc.name}_rep", ground=rep.poc.size)
    iota = tuple(pos[u] for u in images)
    for x, y in itertools.combinations(range(rep.n), 2):
        if popcount(m.sig[iota[x]] ^ m.sig[iota[y]]) != popcount(rep.delta(x, y)):
            raise InternalError("metric on the ground set is not extended by the realization")
    return RealizedRepresentation(m, iota)


def pattern_check(d) -> tuple[bool, tuple[int, int, int] | None]:
    """Every triple of points has even perimeter."""
    d = np.asarray(d)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise PreconditionError("distance table must be square")
    if not np.issubdtype(d.dtype, np.integer) or (d < 0).any():
        raise PreconditionError("distances must be nonnegative integers")
    if (d != d.T).any() or d.diagonal().any():
        raise PreconditionError("distance table must be symmetric with zero diagonal")
    n = d.shape[0]
    for x, y, z in itertools.product(range(n), repeat=3):
        if d[x, z] > d[x, y] + d[y, z]:
            raise PreconditionError(f"triangle inequality fails at ({x}, {y}, {z})")
    for x, y, z in itertools.combinations(range(n), 3):
        if (d[x, y] + d[y, z] + d[z, x]) % 2:
            return False, (x, y, z)
    return True, None


# -- group windows -----------------------------------------------------------------


_INV = {"a": "A", "A": "a", "b": "B", "B": "b"}


def f2_reduce(word: str) -> str:
    out: list[str] = []
    for c in word:
        if c not in _INV:
            raise PocmedError(f"bad letter {c!r}; use a, A, b, B")
        if out and out[-1] == _INV[c]:
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def f2_mul(g: str, h: str) -> str:
    return f2_reduce(g + h)


def f2_inv(g: str) -> str:
    return "".join(_INV[c] for c in reversed(g))


@dataclass(frozen=True)
class Group:
    name: str
    identity: object
    generators: tuple
    mul: Callable
    inv: Callable
    length: Callable
    label: Callable

    def ball(self, r: int) -> list:
        if self.name == "z":
            return sorted(range(-r, r + 1), key=lambda n: (abs(n), n < 0))
        out, frontier = [""], [""]
        for _ in range(r):
            nxt = []
            for w in frontier:
                for c in "aAbB":
                    if not w or w[-1] != _INV[c]:
                        nxt.append(w + c)
            out += nxt
            frontier = nxt
        return out


Z = Group("z", 0, (1,), lambda g, h: g + h, lambda g: -g, abs, str)
F2 = Group("f2", "", ("a", "b"), f2_mul, f2_inv, len, lambda w: w or "1")


@dataclass(frozen=True)
class SageevSpec:
    group: str
    set: str
    radius: int

    def resolve(self) -> tuple[Group, Callable[[object], bool]]:
        if self.radius < 1:
            raise PreconditionError("radius must be at least 1")
        if self.group == "z":
            if self.set == "halfline":
                return Z, lambda n: n >= 0
            if self.set == "evens":
                return Z, lambda n: n % 2 == 0
        elif self.group == "f2":
            if self.set.startswith("prefix:") and len(self.set) == 8 and self.set[7] in _INV:
                letter = self.set[7]
                return F2, lambda w: w[:1] == letter
        else:
            raise PreconditionError(f"unknown group {self.group!r}")
        raise PreconditionError(f"set {self.set!r} is not available for group {self.group!r}")


MARGIN = 2


@dataclass(frozen=True)
class EndReport:
    end1: bool  # vacuous with trivial subgroup
    end2: tuple[tuple[str, int, int], ...]  # generator, count at R, count at R + margin
    end3: bool

    @property
    def ok(self) -> bool:
        return self.end1 and self.end3 and all(a == b for _, a, b in self.end2)


def end_conditions(spec: SageevSpec) -> EndReport:
    g, a = spec.resolve()
    r = spec.radius
    end2 = []
    for s in g.generators:
        si = g.inv(s)
        counts = [sum(1 for h in g.ball(rr) if a(h) != a(g.mul(h, si))) for rr in (r, r + MARGIN)]
        end2.append((g.label(s), counts[0], counts[1]))
    sphere = [h for h in g.ball(r) if g.length(h) == r]
    end3 = any(a(h) for h in sphere) and not all(a(h) for h in sphere)
    return EndReport(True, tuple(end2), end3)


@dataclass
class SageevWindow:
    spec: SageevSpec
    ball: list
    poc: PocSet
    translates: list  # a group element g per pair, with gA as representative
    algebra: MedianAlgebra
    iota: tuple[int, ...]
    shifts: list
    ends: EndReport
    growth: list[int]


def _window_traces(g: Group, a: Callable, ball: list, margin_ball: list) -> tuple[list[int], list]:
    full = (1 << len(ball)) - 1
    seen: dict[int, int] = {}
    reps, who = [], []
    for t in margin_ball:
        ti = g.inv(t)
        trace = mask_of(i for i, h in enumerate(ball) if a(g.mul(ti, h)))
        if trace in (0, full):
            continue
        key = min(trace, full ^ trace)
        if key in seen:
            continue
        seen[key] = len(reps)
        reps.append(trace)
        who.append(t)
    return reps, who


def shifts_in_window(spec: SageevSpec) -> list:
    """Ball elements g with gA a proper subset of A, tested on the margin ball."""
    g, a = spec.resolve()
    big = g.ball(spec.radius + MARGIN)
    out = []
    for t in g.ball(spec.radius):
        ti = g.inv(t)
        inside = [a(g.mul(ti, h)) for h in big]
        if all(a(h) for h, x in zip(big, inside) if x) and any(a(h) and not x for h, x in zip(big, inside)):
            out.append(t)
    return out


def sageev_window(spec: SageevSpec, limit: int = CLOSURE_LIMIT) -> SageevWindow:
    g, a = spec.resolve()
    ends = end_conditions(spec)
    if not ends.ok:
        bad = [f"{s}: {c0} at radius {spec.radius}, {c1} at radius {spec.radius + MARGIN}"
               for s, c0, c1 in ends.end2 if c0 != c1]
        msg = "almost invariance fails in the window (" + "; ".join(bad) + ")" if bad else \
            "the set or its complement misses the window boundary"
        raise PreconditionError(msg)
    ball = g.ball(spec.radius)
    reps, who = _window_traces(g, a, ball, g.ball(spec.radius + MARGIN))
    names = [f"g{g.label(t)}" for t in who]
    p = PocSet.from_sets(len(ball), reps, names, f"{spec.group}_{spec.set}_{spec.radius}")
    rep = Representation.from_pairs(p, [g.label(h) for h in ball], reps)
    real = realize_representation(rep, limit)
    growth = []
    for r in range(1, spec.radius + 1):
        growth.append(len(_window_traces(g, a, g.ball(r), g.ball(r + MARGIN))[0]))
    return SageevWindow(spec, ball, p, who, real.algebra, real.iota, shifts_in_window(spec), ends, growth)


def window_inclusion_ok(spec: SageevSpec) -> bool:
    """The window at radius R sits convexly in the window at R + 1: the points
    of the smaller ball generate a convex subalgebra isomorphic to the
    smaller window."""
    small = sageev_window(spec)
    big = sageev_window(SageevSpec(spec.group, spec.set, spec.radius + 1))
    gens = mask_of(big.iota[i] for i in range(len(small.ball)))
    c = median_closure(big.algebra, gens)
    if not is_convex(big.algebra, c):
        return False
    sub = subalgebra(big.algebra, c)
    return is_isomorphic(median_graph(sub), median_graph(small.algebra))
