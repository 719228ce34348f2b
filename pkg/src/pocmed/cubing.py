"""Cube complexes of finite median algebras and median graph recognition."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bits import iter_bits, mask_of, popcount
from .duality import congruence_quotient, hyperplanes_to_halfspaces
from .errors import InternalError, PreconditionError
from .graphs import SimpleGraph, all_cliques
from .median import (MedianAlgebra, interval, is_convex, is_cube, median_graph, validate_median)


@dataclass(frozen=True)
class Cube:
    base: int
    hyperplanes: int
    vertices: int

    @property
    def dim(self) -> int:
        return popcount(self.hyperplanes)


@dataclass(frozen=True)
class CubeComplex:
    algebra: MedianAlgebra
    cubes: tuple[Cube, ...]  # sorted by dimension, then vertex set

    @property
    def dimension(self) -> int:
        return max(c.dim for c in self.cubes)

    def counts(self) -> list[int]:
        out = [0] * (self.dimension + 1)
        for c in self.cubes:
            out[c.dim] += 1
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * k for d, k in enumerate(self.counts()))


def edge_hyperplanes(m: MedianAlgebra, v: int) -> int:
    """Hyperplanes crossed by an edge at v (the minimal half spaces at v)."""
    return mask_of(j for j in range(m.k) if m.neighbour(v, j) is not None)


def _cube_at(m: MedianAlgebra, v: int, t: int) -> int | None:
    out = 0
    for sub in _submasks(t):
        x = m.index.get(m.sig[v] ^ sub)
        if x is None:
            return None
        out |= 1 << x
    return out


def _submasks(t: int):
    s = t
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & t


def cubical_nerve(m: MedianAlgebra) -> CubeComplex:
    cubes: dict[int, Cube] = {}
    rows = m.transverse_rows
    for v in range(m.n):
        adj = edge_hyperplanes(m, v)
        link = SimpleGraph(tuple(str(j) for j in range(m.k)), tuple(r & adj for r in rows))
        for t in all_cliques(link):
            if t & ~adj:
                continue
            verts = _cube_at(m, v, t)
            if verts is None:
                raise InternalError(f"transverse edges at {m.labels[v]} do not span a cube")
            if verts not in cubes:
                cubes[verts] = Cube(v, t, verts)
    for c in cubes.values():
        if not is_cube(m, c.vertices):
            raise InternalError("nerve contains a set that is not a convex cube")
    ordered = sorted(cubes.values(), key=lambda c: (c.dim, c.vertices))
    return CubeComplex(m, tuple(ordered))


@dataclass(frozen=True)
class LinkReport:
    graph: SimpleGraph  # vertices are the neighbours of v
    is_flag: bool


def link_flag_check(m: MedianAlgebra, v: int) -> LinkReport:
    adj = list(iter_bits(edge_hyperplanes(m, v)))
    rows = m.transverse_rows
    labels = tuple(m.labels[m.neighbour(v, j)] for j in adj)
    edges = [(a, b) for a, b in itertools.combinations(range(len(adj)), 2) if rows[adj[a]] >> adj[b] & 1]
    g = SimpleGraph.from_edges(labels, edges)
    flag = True
    for clique in all_cliques(g):
        t = mask_of(adj[i] for i in iter_bits(clique))
        verts = _cube_at(m, v, t)
        if verts is None or not is_cube(m, verts):
            flag = False
            break
    return LinkReport(g, flag)


def contract_hyperplane(m: MedianAlgebra, j: int):
    """Quotient identifying the two sides of hyperplane j along their boundary."""
    if not 0 <= j < m.k:
        raise PreconditionError("no such proper hyperplane")
    q = congruence_quotient(m, hyperplanes_to_halfspaces([j]))
    if q.algebra.k != m.k - 1:
        raise InternalError("contraction did not remove exactly one hyperplane")
    if not validate_median(q.algebra).ok:
        raise InternalError("contraction is not a median algebra")
    return q


def contraction_certificate(m: MedianAlgebra) -> list[int]:
    """Hyperplanes of m in the order they are contracted down to one point."""
    order: list[int] = []
    current, original = m, list(range(m.k))
    while current.k:
        q = contract_hyperplane(current, 0)
        order.append(original[0])
        original = [original[j] for j in q.kept]
        current = q.algebra
    if current.n != 1:
        raise InternalError("contractions did not end in a point")
    return order


# -- recognition ----------------------------------------------------------------


@dataclass(frozen=True)
class RecognitionResult:
    median: bool
    algebra: MedianAlgebra | None
    witness: tuple[int, int, int] | None
    meet_size: int | None = None  # size of the triple intersection at the witness


def recognize_median_graph(g: SimpleGraph) -> RecognitionResult:
    if g.n == 0 or not g.is_connected():
        raise PreconditionError("graph must be nonempty and connected")
    dist = np.asarray(g.distances(), dtype=np.int32)
    table, witness = kernels.triple_medians(dist)
    if witness is not None:
        x, y, z, size = witness
        return RecognitionResult(False, None, (x, y, z), size)
    m = MedianAlgebra.from_table(g.labels, table, "recognized", limit=max(64, g.n))
    if median_graph(m).edges() != g.edges():
        raise InternalError("graph of the recognized algebra differs from the input")
    return RecognitionResult(True, m, None)


def graph_predicates(g: SimpleGraph, m: MedianAlgebra) -> dict[str, bool]:
    """Metric facts that hold once a graph is recognized: distance counts
    separating hyperplanes, intervals are cut out by hyperplanes, and triple
    intervals meet."""
    d = g.distances()
    n = g.n
    metric = all(d[x][y] == popcount(m.sig[x] ^ m.sig[y]) for x in range(n) for y in range(n))
    convex = True
    meet = True
    for x, y in itertools.combinations_with_replacement(range(n), 2):
        by_dist = mask_of(z for z in range(n) if d[x][z] + d[z][y] == d[x][y])
        if by_dist != interval(m, x, y) or not is_convex(m, by_dist):
            convex = False
    for x, y, z in itertools.combinations(range(n), 3):
        if not interval(m, x, y) & interval(m, y, z) & interval(m, z, x):
            meet = False
    return {"metric": metric, "intervals": convex, "triples_meet": meet}


# -- output ---------------------------------------------------------------------

PALETTE = ("red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan4",
           "gold3", "gray40", "navy", "olivedrab")


def _q(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def to_dot(m: MedianAlgebra, color: bool = True) -> str:
    """DOT text of the median graph; edges across one hyperplane share a colour."""
    lines = [f"graph {_q(m.name)} {{"]
    for x in range(m.n):
        lines.append(f"  {_q(m.labels[x])};")
    for x, y in median_graph(m).edges():
        j = (m.sig[x] ^ m.sig[y]).bit_length() - 1
        attr = f' [color="{PALETTE[j % len(PALETTE)]}", label="h{j}"]' if color else ""
        lines.append(f"  {_q(m.labels[x])} -- {_q(m.labels[y])}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
