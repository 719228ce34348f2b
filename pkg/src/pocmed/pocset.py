"""Finite poc sets: representation, validation, filters and ultrafilters,
structure graphs.

Element indices: 0 is the bottom ``0``, 1 is the top ``0^``, and the proper
pair i occupies ``2i+2`` (representative) and ``2i+3`` (its star). The star
of index e is therefore ``e ^ 1``. The order is stored as up-set bitsets:
bit b of ``up[a]`` is set iff ``a <= b``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx

from . import kernels
from .bits import iter_bits, mask_of, popcount
from .errors import InternalError, LimitExceeded, ParseError, PocmedError, PreconditionError, ValidationError
from .graphs import SimpleGraph, chromatic_number, clique_number, greedy_colouring

ENUMERATION_LIMIT = 24
EXACT_COLOURING_LIMIT = 20

_EVEN = int("01" * 64, 2)


def star_mask(m: int) -> int:
    """Apply the star to every element of a bitset."""
    even = _EVEN
    while even < m:
        even |= even << 128
    return ((m & even) << 1) | ((m >> 1) & even)


@dataclass(frozen=True)
class ValidationReport:
    """Violated axioms, each with one witness."""

    violations: tuple[tuple[str, tuple], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def axioms(self) -> list[str]:
        return [a for a, _ in self.violations]

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"{a} violated at {', '.join(map(str, w))}" for a, w in self.violations)


class PocSet:
    """A finite poc set. Build with :meth:`from_relations` or :meth:`from_sets`
    for validated input; the bare constructor stores whatever it is given."""

    def __init__(self, names: Sequence[str], up: Sequence[int], name: str = "P"):
        self.name = name
        self.names = tuple(names)
        self.up = tuple(up)
        if len(self.up) != 2 * len(self.names) + 2:
            raise PocmedError("order rows must cover 0, 0^ and both members of every pair")

    # -- construction -------------------------------------------------

    @classmethod
    def from_relations(
        cls, names: Sequence[str], relations: Iterable[tuple[int, int]], name: str = "P"
    ) -> "PocSet":
        """Close ``relations`` (pairs a <= b of indices) and validate."""
        size = 2 * len(names) + 2
        up = [1 << e | 2 for e in range(size)]
        up[0] = (1 << size) - 1
        for a, b in relations:
            up[a] |= 1 << b
            up[b ^ 1] |= 1 << (a ^ 1)
        for k in range(size):
            bit = 1 << k
            row = up[k]
            for i in range(size):
                if up[i] & bit:
                    up[i] |= row
        p = cls(names, up, name)
        report = validate_poc(p)
        if not report.ok:
            raise ValidationError(report)
        return p

    @classmethod
    def from_sets(cls, ground: int, sets: Sequence[int], names: Sequence[str] | None = None,
                  name: str = "P") -> "PocSet":
        """Poc set of subsets of a ``ground``-element set under inclusion and
        complement. ``sets`` lists one representative per proper pair."""
        full = (1 << ground) - 1
        seen = {0, full}
        members = [0, full]
        for s in sets:
            if s in seen or full ^ s in seen:
                raise PocmedError("representatives must be proper and pairwise distinct up to complement")
            seen.update((s, full ^ s))
            members += [s, full ^ s]
        up = [mask_of(j for j, t in enumerate(members) if s & ~t == 0) for s in members]
        if names is None:
            names = [f"h{i}" for i in range(len(sets))]
        p = cls(names, up, name)
        p.members = tuple(members)
        return p

    # -- basic access -------------------------------------------------

    @property
    def n_pairs(self) -> int:
        return len(self.names)

    @property
    def size(self) -> int:
        return len(self.up)

    @property
    def proper_mask(self) -> int:
        return (1 << self.size) - 4

    @cached_property
    def down(self) -> tuple[int, ...]:
        rows = [0] * self.size
        for a, row in enumerate(self.up):
            for b in iter_bits(row):
                rows[b] |= 1 << a
        return tuple(rows)

    @cached_property
    def comparable(self) -> tuple[int, ...]:
        return tuple(u | d for u, d in zip(self.up, self.down))

    @staticmethod
    def star(e: int) -> int:
        return e ^ 1

    @staticmethod
    def is_proper(e: int) -> bool:
        return e >= 2

    @staticmethod
    def pair_of(e: int) -> int:
        return (e >> 1) - 1

    def le(self, a: int, b: int) -> bool:
        return bool(self.up[a] >> b & 1)

    def lt(self, a: int, b: int) -> bool:
        return a != b and self.le(a, b)

    def token(self, e: int) -> str:
        if e < 2:
            return "0^" if e else "0"
        return self.names[(e >> 1) - 1] + ("^" if e & 1 else "")

    @cached_property
    def _index(self) -> dict[str, int]:
        return {self.token(e): e for e in range(self.size)}

    def index(self, tok: str) -> int:
        try:
            return self._index[tok]
        except KeyError:
            raise PocmedError(f"unknown element '{tok}'") from None

    def tokens(self, mask: int) -> list[str]:
        return [self.token(e) for e in iter_bits(mask)]

    def mask(self, toks: Iterable[str]) -> int:
        return mask_of(self.index(t) for t in toks)

    def __repr__(self) -> str:
        return f"PocSet({self.name!r}, pairs={self.n_pairs})"


# -- parsing --------------------------------------------------------------


def parse_poc_source(text: str) -> PocSet:
    name = None
    names: list[str] = []
    rels: list[tuple[str, str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        head = words[0]
        if head == "pocset":
            if name is not None or len(words) != 2:
                raise ParseError("bad 'pocset' header", lineno)
            name = words[1]
        elif name is None:
            raise ParseError("missing 'pocset' header", lineno)
        elif head == "elem":
            if len(words) < 2:
                raise ParseError("elem needs a token", lineno)
            for tok in words[1:]:
                if tok.endswith("^") or tok in ("0", "0^") or tok in names:
                    raise ParseError(f"bad or duplicate element token '{tok}'", lineno)
                names.append(tok)
        elif head == "le":
            if len(words) != 3:
                raise ParseError("le needs two tokens", lineno)
            rels.append((words[1], words[2], lineno))
        else:
            raise ParseError(f"unknown keyword '{head}'", lineno)
    if name is None:
        raise ParseError("missing 'pocset' header")
    index = {"0": 0, "0^": 1}
    for i, t in enumerate(names):
        index[t] = 2 * i + 2
        index[t + "^"] = 2 * i + 3
    pairs = []
    for a, b, lineno in rels:
        for tok in (a, b):
            if tok not in index:
                raise ParseError(f"undeclared element '{tok}'", lineno)
        pairs.append((index[a], index[b]))
    return PocSet.from_relations(names, pairs, name)


def to_poc_source(p: PocSet) -> str:
    lines = [f"pocset {p.name}"]
    lines += [f"elem {t}" for t in p.names]
    for a in range(2, p.size):
        for b in iter_bits(p.up[a] & p.proper_mask):
            if b != a and b > a and not _implied(p, a, b):
                lines.append(f"le {p.token(a)} {p.token(b)}")
    return "\n".join(lines) + "\n"


def _implied(p: PocSet, a: int, b: int) -> bool:
    """True if a < b follows from a strictly intermediate element."""
    between = p.up[a] & p.down[b] & ~(1 << a | 1 << b)
    return bool(between)


# -- validation -----------------------------------------------------------


def validate_poc(p: PocSet) -> ValidationReport:
    found: dict[str, tuple] = {}

    def note(axiom: str, *witness: int) -> None:
        found.setdefault(axiom, tuple(p.token(w) for w in witness))

    n = p.size
    up = p.up
    for a in range(n):
        if not up[a] >> a & 1:
            note("reflexivity", a)
        if not up[0] >> a & 1:
            note("bounds", 0, a)
        if not up[a] >> 1 & 1:
            note("bounds", a, 1)
        for b in iter_bits(up[a]):
            if b != a and up[b] >> a & 1:
                note("antisymmetry", a, b)
            if up[b] & ~up[a]:
                c = next(iter_bits(up[b] & ~up[a]))
                note("transitivity", a, b, c)
            if not up[b ^ 1] >> (a ^ 1) & 1:
                note("Poc 1", a, b)
        if a != 0 and up[a] >> (a ^ 1) & 1:
            note("Poc 2", a)
    order = ["reflexivity", "antisymmetry", "transitivity", "bounds", "Poc 1", "Poc 2"]
    return ValidationReport(tuple((k, found[k]) for k in order if k in found))


# -- relations and subsets ------------------------------------------------


class RelationKind(enum.Enum):
    Below = "a < b"
    Above = "a > b"
    BelowStar = "a < b*"
    AboveStar = "a > b*"
    Equal = "a = b"
    StarEqual = "a = b*"
    Transverse = "transverse"


STAR_DUAL = {
    RelationKind.Below: RelationKind.Below,
    RelationKind.Above: RelationKind.Above,
    RelationKind.BelowStar: RelationKind.AboveStar,
    RelationKind.AboveStar: RelationKind.BelowStar,
    RelationKind.Equal: RelationKind.Equal,
    RelationKind.StarEqual: RelationKind.StarEqual,
    RelationKind.Transverse: RelationKind.Transverse,
}


def relation(p: PocSet, a: int, b: int) -> RelationKind:
    if not (p.is_proper(a) and p.is_proper(b)):
        raise PreconditionError("relation needs proper elements")
    if a == b:
        return RelationKind.Equal
    if a == b ^ 1:
        return RelationKind.StarEqual
    if p.le(a, b):
        return RelationKind.Below
    if p.le(b, a):
        return RelationKind.Above
    if p.le(a, b ^ 1):
        return RelationKind.BelowStar
    if p.le(b ^ 1, a):
        return RelationKind.AboveStar
    return RelationKind.Transverse


def transverse(p: PocSet, a: int, b: int) -> bool:
    return (a >> 1) != (b >> 1) and not p.comparable[a] >> b & 1 and not p.comparable[a] >> (b ^ 1) & 1


@dataclass(frozen=True)
class SubsetClass:
    orientable: bool
    orientation: bool
    upper_set: bool
    lower_set: bool
    filter_base: bool
    filter: bool
    ultrafilter: bool
    ideal_base: bool
    ideal: bool

    def names(self) -> list[str]:
        return [k for k, v in self.__dict__.items() if v]


def is_filter_base(p: PocSet, s: int) -> bool:
    """No a, b in s with a <= b*."""
    below_star = 0
    for b in iter_bits(s):
        below_star |= p.down[b ^ 1]
    return not s & below_star


def is_upper(p: PocSet, s: int) -> bool:
    return all(p.up[a] & ~s == 0 for a in iter_bits(s))


def _filter_flags(p: PocSet, s: int) -> tuple[bool, bool]:
    base = is_filter_base(p, s)
    filt = s != 0 and is_upper(p, s) and not s & star_mask(s)
    return base, filt


def classify_subset(p: PocSet, s: int) -> SubsetClass:
    everything = (1 << p.size) - 1
    s &= everything
    ss = star_mask(s)
    orientable = not s & ss
    orientation = orientable and (s | ss) == everything
    upper = is_upper(p, s)
    lower = all(p.down[a] & ~s == 0 for a in iter_bits(s))
    base, filt = _filter_flags(p, s)
    ibase, ideal = _filter_flags(p, ss)
    return SubsetClass(
        orientable=orientable,
        orientation=orientation,
        upper_set=upper,
        lower_set=lower,
        filter_base=base,
        filter=filt,
        ultrafilter=orientation and base,
        ideal_base=ibase,
        ideal=ideal,
    )


@dataclass(frozen=True)
class ExtensionResult:
    case: int
    bases: tuple[int, ...]


def extend_filter_base(p: PocSet, base: int, a: int) -> ExtensionResult:
    """One step of the extension algorithm: grow a filter base by a or a*."""
    if not is_filter_base(p, base):
        raise PreconditionError("B is not a filter base")
    if base >> a & 1 or base >> (a ^ 1) & 1:
        raise PreconditionError(f"{p.token(a)} or its star already lies in B")
    strictly_below_a = p.down[a] & ~(1 << a)
    strictly_below_as = p.down[a ^ 1] & ~(1 << (a ^ 1))
    case1 = bool(base & strictly_below_a)
    case2 = bool(base & strictly_below_as)
    if case1 and case2:
        raise PreconditionError("B is not a filter base")  # unreachable for a genuine base
    if case1:
        result = ExtensionResult(1, (base | 1 << a,))
    elif case2:
        result = ExtensionResult(2, (base | 1 << (a ^ 1),))
    else:
        result = ExtensionResult(3, (base | 1 << a, base | 1 << (a ^ 1)))
    for b in result.bases:
        if not is_filter_base(p, b):
            raise InternalError(f"extension produced a non filter base {p.tokens(b)}")
    return result


def up_closure(p: PocSet, base: int) -> int:
    if not base:
        raise PreconditionError("filters are nonempty; B must not be empty")
    if not is_filter_base(p, base):
        raise PreconditionError("B is not a filter base")
    out = 0
    for b in iter_bits(base):
        out |= p.up[b]
    return out


# -- ultrafilters ---------------------------------------------------------


def enumerate_ultrafilters(p: PocSet, limit: int = ENUMERATION_LIMIT) -> list[int]:
    """All ultrafilters as element bitsets, in increasing orientation code."""
    if p.n_pairs > limit:
        raise LimitExceeded(f"ultrafilter enumeration limited to {limit} pairs, got {p.n_pairs}")
    conflict = [p.down[e ^ 1] for e in range(p.size)]
    return kernels.ultrafilters(p.n_pairs, conflict)


def orientation_code(p: PocSet, u: int) -> int:
    """Bit i set iff the star of pair i lies in u."""
    return mask_of(i for i in range(p.n_pairs) if u >> (2 * i + 3) & 1)


# -- structure graphs -----------------------------------------------------


def transversality_graph(p: PocSet) -> SimpleGraph:
    n = p.n_pairs
    adj = [0] * n
    for i in range(n):
        a = 2 * i + 2
        comp = p.comparable[a] | star_mask(p.comparable[a])
        for j in range(n):
            if j != i and not comp >> (2 * j + 2) & 1:
                adj[i] |= 1 << j
    return SimpleGraph(p.names, tuple(adj))


def nesting_graph(p: PocSet) -> SimpleGraph:
    return transversality_graph(p).complement()


def prime_summands(p: PocSet) -> list[list[int]]:
    """Pair indices of each prime summand (components of the nesting graph)."""
    return nesting_graph(p).components() if p.n_pairs else []


def restrict(p: PocSet, pairs: Sequence[int], name: str | None = None) -> PocSet:
    """Sub poc set on the given pairs, with the induced order."""
    keep = [0, 1] + [e for i in pairs for e in (2 * i + 2, 2 * i + 3)]
    pos = {e: k for k, e in enumerate(keep)}
    up = [mask_of(pos[b] for b in iter_bits(p.up[e]) if b in pos) for e in keep]
    return PocSet([p.names[i] for i in pairs], up, name or p.name)


def direct_sum(p: PocSet, q: PocSet, name: str = "sum") -> PocSet:
    """Disjoint union with bottoms and tops identified; summands are transverse."""
    np_, nq = p.size, q.size
    up = []
    for e in range(np_):
        row = p.up[e]
        if e == 0:
            row |= ((1 << nq) - 1) >> 2 << np_
        up.append(row)
    for e in range(2, nq):
        row = q.up[e]
        shifted = (row >> 2) << np_
        up.append(shifted | (row & 2))
    return PocSet(p.names + q.names, up, name)


def poc_isomorphism(p: PocSet, q: PocSet) -> dict[int, int] | None:
    """An order and star preserving bijection p -> q, or None."""
    if p.size != q.size:
        return None
    gp, gq = _iso_graph(p), _iso_graph(q)
    matcher = nx.algorithms.isomorphism.DiGraphMatcher(
        gp, gq,
        node_match=lambda x, y: x["kind"] == y["kind"],
        edge_match=lambda x, y: x["kind"] == y["kind"],
    )
    for m in matcher.isomorphisms_iter():
        return dict(m)
    return None


def is_isomorphic(p: PocSet, q: PocSet) -> bool:
    return poc_isomorphism(p, q) is not None


def _iso_graph(p: PocSet) -> nx.DiGraph:
    g = nx.DiGraph()
    for e in range(p.size):
        g.add_node(e, kind=min(e, 2))
    for a in range(p.size):
        for b in iter_bits(p.up[a]):
            if a != b:
                g.add_edge(a, b, kind="le")
    for e in range(2, p.size, 2):
        for x, y in ((e, e + 1), (e + 1, e)):
            if g.has_edge(x, y):
                raise PocmedError("a proper element is comparable with its star")
            g.add_edge(x, y, kind="star")
    return g


# -- invariants -----------------------------------------------------------


@dataclass(frozen=True)
class DimensionLength:
    dimension: int
    length: int
    type_omega: bool = True


def longest_chain(p: PocSet) -> int:
    proper = sorted(range(2, p.size), key=lambda e: popcount(p.down[e]))
    best = [0] * p.size
    for e in proper:
        below = p.down[e] & p.proper_mask & ~(1 << e)
        best[e] = 1 + max((best[d] for d in iter_bits(below)), default=0)
    return max(best, default=0)


def dimension_length(p: PocSet) -> DimensionLength:
    """Largest transverse set and longest proper chain. Finite poc sets are
    always of type omega (no infinite transverse sets)."""
    return DimensionLength(clique_number(transversality_graph(p)), longest_chain(p), True)


def tree_dimension(p: PocSet, mode: str = "exact", limit: int = EXACT_COLOURING_LIMIT) -> tuple[int, bool]:
    """Chromatic number of the transversality graph (value, is_exact)."""
    g = transversality_graph(p)
    if mode == "exact":
        return chromatic_number(g, limit), True
    if mode == "greedy":
        return (max(greedy_colouring(g)) + 1 if g.n else 0), False
    raise PocmedError(f"unknown mode '{mode}'")


def poc_from_graph(graph: SimpleGraph, name: str = "P") -> PocSet:
    """Poc set whose transversality graph is ``graph``.

    Ground set is a point z, the vertices and the edges. Vertex v gives the
    subset {v} plus its incident edges; order is inclusion, star is complement.
    """
    n = graph.n
    sets = [1 << (1 + v) for v in range(n)]
    for k, (u, v) in enumerate(graph.edges()):
        bit = 1 << (1 + n + k)
        sets[u] |= bit
        sets[v] |= bit
    return PocSet.from_sets(1 + n + len(graph.edges()), sets, graph.labels, name)


@dataclass(frozen=True)
class BinaryResult:
    binary: bool
    part: int | None  # the class O when binary
    odd_walk: tuple[int, ...] | None  # a_1..a_n with a_i comparable to a_{i+1}*, n odd


def is_binary(p: PocSet) -> BinaryResult:
    """Split the proper part as O and O* with no cross comparabilities.

    Two proper elements must sit on opposite sides when one is comparable to
    the star of the other, so this is a 2-colouring problem. A conflict yields
    an odd closed walk.
    """
    adj = {a: star_mask(p.comparable[a]) & p.proper_mask for a in range(2, p.size)}
    colour: dict[int, int] = {}
    parent: dict[int, int | None] = {}
    depth: dict[int, int] = {}
    for root in range(2, p.size):
        if root in colour:
            continue
        colour[root], parent[root], depth[root] = 0, None, 0
        queue = [root]
        for u in queue:
            for v in iter_bits(adj[u]):
                if v not in colour:
                    colour[v] = 1 - colour[u]
                    parent[v], depth[v] = u, depth[u] + 1
                    queue.append(v)
                elif colour[v] == colour[u]:
                    return BinaryResult(False, None, _odd_cycle(u, v, parent, depth))
    part = mask_of(a for a, c in colour.items() if c == 0)
    # direct check of the partition definition
    for a in iter_bits(part):
        if p.comparable[a] & star_mask(part):
            raise InternalError("2-colouring produced a cross comparability")
    return BinaryResult(True, part, None)


def _odd_cycle(u: int, v: int, parent: dict, depth: dict) -> tuple[int, ...]:
    left, right = [u], [v]
    while depth[left[-1]] > depth[right[-1]]:
        left.append(parent[left[-1]])
    while depth[right[-1]] > depth[left[-1]]:
        right.append(parent[right[-1]])
    while left[-1] != right[-1]:
        left.append(parent[left[-1]])
        right.append(parent[right[-1]])
    # left runs u .. lca, right runs v .. lca; walk lca .. u then v .. (before lca)
    return tuple(reversed(left)) + tuple(right[:-1])


# -- small constructors used across the package ---------------------------


def orthogonal(names: Sequence[str] | int, name: str = "orth") -> PocSet:
    if isinstance(names, int):
        names = [f"a{i}" for i in range(names)]
    return PocSet.from_relations(names, [], name)


def chain(n: int, name: str = "chain") -> PocSet:
    """Linear poc set a0 < a1 < ... < a(n-1)."""
    names = [f"a{i}" for i in range(n)]
    return PocSet.from_relations(names, [(2 * i + 2, 2 * i + 4) for i in range(n - 1)], name)


def starlet(n: int, name: str = "starlet") -> PocSet:
    """x < y* for all distinct x, y."""
    names = [f"x{i}" for i in range(n)]
    rels = [(2 * i + 2, 2 * j + 3) for i, j in itertools.permutations(range(n), 2)]
    return PocSet.from_relations(names, rels, name)


def boolean_poc(n: int, name: str | None = None) -> PocSet:
    """All subsets of an n-set under inclusion and complement.

    Pair representatives are the nonempty subsets missing the top point,
    in increasing bitmask order.
    """
    if n < 1:
        raise PocmedError("boolean poc needs n >= 1")
    reps = [s for s in range(1, 1 << (n - 1))]
    names = ["{" + ",".join(str(i) for i in iter_bits(s)) + "}" for s in reps]
    return PocSet.from_sets(n, reps, [t.replace("{", "s").replace("}", "").replace(",", "_") for t in names],
                            name or f"P{n}")
