"""Finite median algebras.

Internally an algebra is its carrier plus the list of its hyperplanes. Each
hyperplane j is stored as the carrier bitset of the side H_j that misses
element 0, and every element x carries a signature ``sig[x]`` whose bit j says
whether x lies in H_j. The median is the bitwise majority of signatures.

Half spaces are numbered like poc elements: 0 is the empty set, 1 is the
whole carrier, ``2j+2`` is H_j and ``2j+3`` its complement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .bits import iter_bits, majority, mask_of, popcount
from .errors import InternalError, LimitExceeded, ParseError, PocmedError, PreconditionError, ValidationError
from .graphs import SimpleGraph, all_cliques
from .pocset import ValidationReport, star_mask

TABLE_LIMIT = 64
HALFSPACE_LIMIT = 1 << 16
CLOSURE_LIMIT = 1 << 14


class MedianAlgebra:
    def __init__(self, labels: Sequence[str], hyperplanes: Sequence[int], name: str = "M",
                 points: Sequence[int] | None = None, ground: int | None = None):
        self.name = name
        self.labels = tuple(labels)
        n = len(self.labels)
        if n == 0:
            raise PocmedError("median algebras are nonempty")
        full = (1 << n) - 1
        hs = set()
        for h in hyperplanes:
            if h & 1:
                h = full ^ h
            if h == 0:
                continue
            hs.add(h)
        self.hyperplanes = tuple(sorted(hs))
        sig = [0] * n
        for j, h in enumerate(self.hyperplanes):
            for x in iter_bits(h):
                sig[x] |= 1 << j
        self.sig = tuple(sig)
        self.index = {s: x for x, s in enumerate(sig)}
        if len(self.index) != n:
            raise PocmedError("half spaces do not separate points")
        # power-set coordinates when built from bitsets
        self.points = tuple(points) if points is not None else None
        self.ground = ground

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_sets(cls, sets: Sequence[int], labels: Sequence[str] | None = None, name: str = "M",
                  ground: int | None = None, check: bool = False) -> "MedianAlgebra":
        """Subalgebra of a power set given by its member bitsets.

        Every half space of a subalgebra of a power set is the trace of a
        coordinate half space, so the hyperplanes are the distinct nontrivial
        coordinate traces.
        """
        sets = list(sets)
        if len(set(sets)) != len(sets):
            raise PocmedError("duplicate members")
        if check:
            pos = set(sets)
            for a, b, c in itertools.combinations(sets, 3):
                if majority(a, b, c) not in pos:
                    raise PocmedError("member family is not closed under the median")
        width = max((s.bit_length() for s in sets), default=0)
        if ground is not None:
            width = max(width, ground)
        coords = set()
        for i in range(width):
            coords.add(mask_of(x for x, s in enumerate(sets) if s >> i & 1))
        if labels is None:
            digits = max(1, (width + 3) // 4)
            labels = [format(s, f"0{digits}x") for s in sets]
        return cls(labels, sorted(coords), name, points=sets, ground=width)

    @classmethod
    def from_median(cls, labels: Sequence[str], med: Callable[[int, int, int], int], name: str = "M") -> "MedianAlgebra":
        """From a median operation already known to satisfy the axioms.

        For an edge x-y (the interval [x, y] is {x, y}) the unique half space
        containing x and missing y is {z : x in [y, z]}; every proper half
        space of a finite median algebra arises this way.
        """
        n = len(labels)
        hs = set()
        for x in range(n):
            for y in range(x + 1, n):
                if any(med(x, y, z) == z for z in range(n) if z != x and z != y):
                    continue
                hs.add(mask_of(z for z in range(n) if med(y, z, x) == x))
        full = (1 << n) - 1
        m = cls(labels, sorted(hs), name)
        for h in hs:
            if h in (0, full):
                raise InternalError("edge produced a trivial half space")
        return m

    @classmethod
    def from_table(cls, labels: Sequence[str], table: np.ndarray, name: str = "M",
                   limit: int = TABLE_LIMIT) -> "MedianAlgebra":
        report = validate_median_table(table, limit)
        if not report.ok:
            raise ValidationError(report)
        t = table
        m = cls.from_median(labels, lambda x, y, z: int(t[x, y, z]), name)
        if not np.array_equal(m.table(), np.asarray(table)):
            raise InternalError("half-space median differs from the input table")
        return m

    # -- access ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        """Number of hyperplanes."""
        return len(self.hyperplanes)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def median(self, x: int, y: int, z: int) -> int:
        s = self.sig
        return self.index[majority(s[x], s[y], s[z])]

    def table(self) -> np.ndarray:
        n = self.n
        t = np.empty((n, n, n), dtype=np.int32)
        idx = self.index
        sig = self.sig
        for x in range(n):
            sx = sig[x]
            for y in range(n):
                sy = sig[y]
                a, o = sx & sy, sx | sy
                t[x, y] = [idx[a | (o & sz)] for sz in sig]
        return t

    @cached_property
    def halfspace_masks(self) -> tuple[int, ...]:
        out = [0, self.full]
        for h in self.hyperplanes:
            out += [h, self.full ^ h]
        return tuple(out)

    def delta_bar(self, x: int, y: int) -> int:
        """Hyperplanes separating x and y, as a bitset over hyperplane indices."""
        return self.sig[x] ^ self.sig[y]

    def side(self, j: int, x: int) -> int:
        """Index of the half space of hyperplane j that contains x."""
        return 2 * j + 2 + (0 if self.sig[x] >> j & 1 else 1)

    def ev(self, x: int) -> int:
        """Half spaces containing x, as a bitset over half-space indices."""
        out = 2
        for j in range(self.k):
            out |= 1 << self.side(j, x)
        return out

    def token(self, x: int) -> str:
        return self.labels[x]

    @cached_property
    def _pos(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.labels)}

    def element(self, tok: str) -> int:
        try:
            return self._pos[tok]
        except KeyError:
            raise PocmedError(f"unknown element '{tok}'") from None

    def subset(self, toks: Iterable[str]) -> int:
        return mask_of(self.element(t) for t in toks)

    def tokens(self, mask: int) -> list[str]:
        return [self.labels[x] for x in iter_bits(mask)]

    def neighbour(self, x: int, j: int) -> int | None:
        return self.index.get(self.sig[x] ^ (1 << j))

    @cached_property
    def transverse_rows(self) -> tuple[int, ...]:
        """Bit l of row j is set iff hyperplanes j and l are transverse."""
        full = self.full
        rows = []
        for h in self.hyperplanes:
            hc = full ^ h
            row = 0
            for l, g in enumerate(self.hyperplanes):
                gc = full ^ g
                if h & g and h & gc and hc & g and hc & gc:
                    row |= 1 << l
            rows.append(row)
        return tuple(rows)

    def __repr__(self) -> str:
        return f"MedianAlgebra({self.name!r}, n={self.n}, hyperplanes={self.k})"


# -- parsing and validation ----------------------------------------------


def validate_median_table(table: np.ndarray, limit: int = TABLE_LIMIT) -> ValidationReport:
    table = np.asarray(table)
    if table.ndim != 3 or len(set(table.shape)) != 1:
        return ValidationReport((("shape", tuple(table.shape)),))
    if table.shape[0] == 0:
        return ValidationReport((("nonempty", ()),))
    if table.shape[0] > limit:
        raise LimitExceeded(f"exhaustive (Med 3) check limited to {limit} elements")
    return ValidationReport(tuple(kernels.check_median_table(table)))


def validate_median(m: MedianAlgebra, limit: int = TABLE_LIMIT) -> ValidationReport:
    report = validate_median_table(m.table(), limit)
    return ValidationReport(tuple((a, tuple(m.labels[i] for i in w)) for a, w in report.violations))


def parse_median_source(text: str, limit: int = TABLE_LIMIT, closure_limit: int = CLOSURE_LIMIT) -> MedianAlgebra:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if words:
            lines.append((lineno, words))
    if not lines:
        raise ParseError("empty median source")
    lineno, head = lines[0]
    if head[0] == "median" and len(head) == 2:
        return _parse_table(head[1], lines[1:], limit)
    if head[0] == "median-sub" and len(head) == 4 and head[2] == "over":
        try:
            ground = int(head[3])
        except ValueError:
            raise ParseError("ground size must be an integer", lineno) from None
        return _parse_sub(head[1], ground, lines[1:], closure_limit)
    raise ParseError("expected 'median <name>' or 'median-sub <name> over <k>'", lineno)


def _parse_table(name: str, lines, limit: int) -> MedianAlgebra:
    labels: list[str] | None = None
    entries = []
    for lineno, words in lines:
        if words[0] == "elems":
            if labels is not None:
                raise ParseError("duplicate elems line", lineno)
            labels = words[1:]
            if not labels or len(set(labels)) != len(labels):
                raise ParseError("elems must list distinct tokens", lineno)
        elif words[0] == "m":
            if len(words) != 5:
                raise ParseError("m needs four tokens: x y z value", lineno)
            entries.append((lineno, words[1:]))
        else:
            raise ParseError(f"unknown keyword '{words[0]}'", lineno)
    if labels is None:
        raise ParseError("missing elems line")
    pos = {t: i for i, t in enumerate(labels)}
    n = len(labels)
    if n > limit:
        raise LimitExceeded(f"explicit tables limited to {limit} elements")
    t = np.full((n, n, n), -1, dtype=np.int32)
    for lineno, toks in entries:
        for tok in toks:
            if tok not in pos:
                raise ParseError(f"unknown element '{tok}'", lineno)
        x, y, z, w = (pos[tok] for tok in toks)
        if t[x, y, z] >= 0 and t[x, y, z] != w:
            raise ParseError("conflicting value for the same argument order", lineno)
        t[x, y, z] = w
    # unspecified entries: take a listed permutation, else the repeated argument
    for x, y, z in itertools.product(range(n), repeat=3):
        if t[x, y, z] >= 0:
            continue
        for a, b, c in itertools.permutations((x, y, z)):
            if t[a, b, c] >= 0:
                t[x, y, z] = t[a, b, c]
                break
        else:
            if x == y or x == z:
                t[x, y, z] = x
            elif y == z:
                t[x, y, z] = y
            else:
                raise ParseError(f"no median given for {labels[x]} {labels[y]} {labels[z]}")
    return MedianAlgebra.from_table(labels, t, name, limit)


def _parse_sub(name: str, ground: int, lines, closure_limit: int) -> MedianAlgebra:
    gens = []
    for lineno, words in lines:
        if words[0] != "gen" or len(words) != 2:
            raise ParseError("expected 'gen <hexmask>'", lineno)
        tok = words[1]
        if tok != tok.lower():
            raise ParseError("bitmasks are lowercase hex", lineno)
        try:
            g = int(tok, 16)
        except ValueError:
            raise ParseError(f"bad hex mask '{tok}'", lineno) from None
        if g >> ground:
            raise ParseError(f"mask {tok} exceeds ground size {ground}", lineno)
        gens.append(g)
    if not gens:
        raise ParseError("median-sub needs at least one gen line")
    return subalgebra_closure(gens, ground, name, closure_limit)


def subalgebra_closure(gens: Sequence[int], ground: int, name: str = "M",
                       limit: int = CLOSURE_LIMIT) -> MedianAlgebra:
    """Median closure of bitsets inside the power set of a ``ground``-set."""
    try:
        elems, _ = kernels.median_closure(list(gens), ground, limit)
    except OverflowError:
        raise LimitExceeded(f"median closure exceeds {limit} elements") from None
    return MedianAlgebra.from_sets(sorted(elems), name=name, ground=ground)


def to_median_source(m: MedianAlgebra) -> str:
    if m.points is not None and m.ground is not None:
        digits = max(1, (m.ground + 3) // 4)
        out = [f"median-sub {m.name} over {m.ground}"]
        out += [f"gen {format(p, f'0{digits}x')}" for p in m.points]
        return "\n".join(out) + "\n"
    out = [f"median {m.name}", "elems " + " ".join(m.labels)]
    for x, y, z in itertools.combinations(range(m.n), 3):
        out.append(f"m {m.labels[x]} {m.labels[y]} {m.labels[z]} {m.labels[m.median(x, y, z)]}")
    return "\n".join(out) + "\n"


# -- intervals and convexity ----------------------------------------------


def interval(m: MedianAlgebra, x: int, y: int) -> int:
    sig = m.sig
    lo, hi = sig[x] & sig[y], sig[x] | sig[y]
    return mask_of(z for z, s in enumerate(sig) if s & lo == lo and s & ~hi == 0)


def is_convex(m: MedianAlgebra, s: int) -> bool:
    pts = list(iter_bits(s))
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            if interval(m, x, y) & ~s:
                return False
    return True


def join(m: MedianAlgebra, c: int, x: int) -> int:
    """[C, {x}]: union of the intervals [c, x] over c in C."""
    out = 0
    for c_ in iter_bits(c):
        out |= interval(m, c_, x)
    return out


def convex_hull(m: MedianAlgebra, s: int) -> int:
    if not s:
        return 0
    pts = list(iter_bits(s))
    c = 1 << pts[0]
    while True:
        before = c
        for x in pts:
            c = join(m, c, x)
        if c == before:
            return c


def halfspaces(m: MedianAlgebra, limit: int = HALFSPACE_LIMIT) -> tuple[int, ...]:
    """All half spaces as carrier bitsets, numbered as described above."""
    if m.n > limit:
        raise LimitExceeded(f"half-space enumeration limited to {limit} elements")
    return m.halfspace_masks


def proper_halfspaces(m: MedianAlgebra) -> tuple[int, ...]:
    return m.halfspace_masks[2:]


def separator(m: MedianAlgebra, xs: int, ys: int) -> list[int]:
    """Indices of half spaces containing xs and missing ys."""
    return [h for h, mask in enumerate(m.halfspace_masks) if xs & ~mask == 0 and not ys & mask]


def distance(m: MedianAlgebra, x: int, y: int) -> int:
    return popcount(m.sig[x] ^ m.sig[y])


def median_graph(m: MedianAlgebra) -> SimpleGraph:
    edges = []
    for x in range(m.n):
        for j in iter_bits(~m.sig[x] & ((1 << m.k) - 1)):
            y = m.neighbour(x, j)
            if y is not None:
                edges.append((min(x, y), max(x, y)))
    return SimpleGraph.from_edges(m.labels, sorted(set(edges)))


def edge_hyperplane(m: MedianAlgebra, x: int, y: int) -> int:
    d = m.sig[x] ^ m.sig[y]
    if popcount(d) != 1:
        raise PreconditionError("not an edge")
    return d.bit_length() - 1


# -- retractions, gates, boundaries ---------------------------------------


def nearest_point(m: MedianAlgebra, c: int, y: int) -> int:
    if not c:
        raise PreconditionError("convex set is empty")
    if not is_convex(m, c):
        raise PreconditionError("set is not convex")
    best = min(distance(m, x, y) for x in iter_bits(c))
    closest = [x for x in iter_bits(c) if distance(m, x, y) == best]
    if len(closest) != 1:
        raise InternalError("nearest point is not unique")
    return closest[0]


def gate(m: MedianAlgebra, xs: int, ys: int) -> tuple[int, int]:
    for s in (xs, ys):
        if not s:
            raise PreconditionError("gate needs nonempty sets")
        if not is_convex(m, s):
            raise PreconditionError("gate needs convex sets")
    x0 = (xs & -xs).bit_length() - 1
    y = nearest_point(m, ys, x0)
    x = nearest_point(m, xs, y)
    if separator(m, 1 << x, 1 << y) != separator(m, xs, ys):
        raise InternalError("gate pair does not realise the separator")
    return x, y


def _proper_index(m: MedianAlgebra, h: int) -> int:
    if not 2 <= h < 2 * m.k + 2:
        raise PreconditionError("boundary needs a proper half space")
    return (h >> 1) - 1


def boundary(m: MedianAlgebra, h: int) -> int:
    """Points of half space h with a neighbour across it."""
    j = _proper_index(m, h)
    hs = m.halfspace_masks
    mine = hs[h]
    by_edges = mask_of(x for x in iter_bits(mine) if m.neighbour(x, j) is not None)
    other = hs[h ^ 1]
    by_cover = mine
    for g in hs:
        if other & ~g == 0 and g != other:
            by_cover &= g
    if by_edges != by_cover:
        raise InternalError("the two boundary descriptions disagree")
    return by_edges


def boundary_pairing(m: MedianAlgebra, h: int) -> dict[int, int]:
    """The map x -> x' from the boundary of h to that of its complement,
    checked to be a median isomorphism."""
    j = _proper_index(m, h)
    b, b_other = boundary(m, h), boundary(m, h ^ 1)
    pairing = {x: m.neighbour(x, j) for x in iter_bits(b)}
    if mask_of(pairing.values()) != b_other or len(set(pairing.values())) != len(pairing):
        raise InternalError("boundary pairing is not a bijection")
    pts = list(pairing)
    for x, y, z in itertools.combinations(pts, 3):
        if pairing.get(m.median(x, y, z)) != m.median(pairing[x], pairing[y], pairing[z]):
            raise InternalError("boundary pairing does not preserve the median")
    return pairing


# -- cubes, stars and the tau encoding ------------------------------------


def cutting_hyperplanes(m: MedianAlgebra, c: int) -> int:
    out = 0
    for j, h in enumerate(m.hyperplanes):
        if c & h and c & ~h:
            out |= 1 << j
    return out


def is_cube(m: MedianAlgebra, c: int) -> bool:
    if not c or not is_convex(m, c):
        return False
    cut = cutting_hyperplanes(m, c)
    rows = m.transverse_rows
    return all(cut & ~(1 << j) & ~rows[j] == 0 for j in iter_bits(cut))


def star_at(m: MedianAlgebra, v: int) -> int:
    rows = m.transverse_rows
    out = 0
    for x in range(m.n):
        d = m.sig[x] ^ m.sig[v]
        if all(d & ~(1 << j) & ~rows[j] == 0 for j in iter_bits(d)):
            out |= 1 << x
    return out


def tau(m: MedianAlgebra, x: int, v: int) -> int:
    """Hyperplanes of the minimal half spaces that contain x and miss v."""
    hs = m.halfspace_masks
    sides = [(j, hs[m.side(j, x)]) for j in iter_bits(m.sig[x] ^ m.sig[v])]
    out = 0
    for j, s in sides:
        if not any(t != s and t & ~s == 0 for _, t in sides):
            out |= 1 << j
    return out


def transverse_hyperplane_sets(m: MedianAlgebra) -> list[int]:
    g = SimpleGraph(tuple(f"h{j}" for j in range(m.k)), m.transverse_rows)
    return all_cliques(g)


@dataclass(frozen=True)
class TauEncoding:
    base: int
    images: tuple[int, ...]  # per element, a hyperplane bitset
    bijective: bool


def tau_encoding(m: MedianAlgebra, v: int) -> TauEncoding:
    images = tuple(tau(m, x, v) for x in range(m.n))
    targets = set(transverse_hyperplane_sets(m))
    bijective = len(set(images)) == m.n and set(images) == targets
    if bijective:
        for x, f in enumerate(images):
            if tau_inverse(m, v, f) != x:
                raise InternalError("tau inverse does not reconstruct the element")
    return TauEncoding(v, images, bijective)


def tau_inverse(m: MedianAlgebra, v: int, f: int) -> int:
    """Element with the given transverse set of minimal separating hyperplanes."""
    hs = m.halfspace_masks
    # sides of the chosen hyperplanes that miss v
    base = [m.side(j, v) ^ 1 for j in iter_bits(f)]
    up = 0
    for a in base:
        for h, mask in enumerate(hs):
            if hs[a] & ~mask == 0:
                up |= 1 << h
    u = (m.ev(v) & ~star_mask(up)) | up
    sig = 0
    for j in range(m.k):
        if u >> (2 * j + 2) & 1:
            sig |= 1 << j
    try:
        return m.index[sig]
    except KeyError:
        raise PreconditionError("not a transverse set of hyperplanes") from None


# -- small algebras ---------------------------------------------------------


def cube(n: int, name: str | None = None) -> MedianAlgebra:
    labels = [format(s, f"0{n}b")[::-1] if n else "e" for s in range(1 << n)]
    return MedianAlgebra.from_sets(list(range(1 << n)), labels, name or f"cube{n}", ground=n)


def path(n: int, name: str | None = None) -> MedianAlgebra:
    """Linear median algebra on n points p0 < ... < p(n-1)."""
    sets = [(1 << i) - 1 for i in range(n)]
    return MedianAlgebra.from_sets(sets, [f"p{i}" for i in range(n)], name or f"path{n}", ground=max(n - 1, 0))


def product(a: MedianAlgebra, b: MedianAlgebra, name: str | None = None) -> MedianAlgebra:
    sets, labels = [], []
    for x in range(a.n):
        for y in range(b.n):
            sets.append(a.sig[x] | b.sig[y] << a.k)
            labels.append(f"{a.labels[x]}.{b.labels[y]}")
    return MedianAlgebra.from_sets(sets, labels, name or f"{a.name}x{b.name}", ground=a.k + b.k)


def star_tree(leaves: int, name: str | None = None) -> MedianAlgebra:
    """Centre c plus leaves l0.. joined to it."""
    sets = [0] + [1 << i for i in range(leaves)]
    return MedianAlgebra.from_sets(sets, ["c"] + [f"l{i}" for i in range(leaves)], name or f"star{leaves}", ground=leaves)


def tripod() -> MedianAlgebra:
    return star_tree(3, "tripod")


def subalgebra(m: MedianAlgebra, s: int, name: str | None = None) -> MedianAlgebra:
    """A median-closed subset as an algebra in its own right."""
    pts = list(iter_bits(s))
    pos = set(pts)
    for x, y, z in itertools.combinations(pts, 3):
        if m.median(x, y, z) not in pos:
            raise PreconditionError("subset is not closed under the median")
    return MedianAlgebra.from_sets([m.sig[x] for x in pts], [m.labels[x] for x in pts], name or m.name, ground=m.k)


def median_closure(m: MedianAlgebra, s: int) -> int:
    elems, _ = kernels.median_closure([m.sig[x] for x in iter_bits(s)], m.k, m.n + 1)
    return mask_of(m.index[e] for e in elems)
