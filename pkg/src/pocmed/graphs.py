"""Simple graphs on indexed vertices, with cliques, colouring and isomorphism."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx

from .bits import iter_bits, popcount
from .errors import LimitExceeded, ParseError, PocmedError


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph without loops; ``adj[i]`` is the neighbour bitset of i."""

    labels: tuple[str, ...]
    adj: tuple[int, ...]

    @classmethod
    def from_edges(cls, labels: Sequence[str] | int, edges: Iterable[tuple[int, int]]) -> "SimpleGraph":
        if isinstance(labels, int):
            labels = [str(i) for i in range(labels)]
        adj = [0] * len(labels)
        for u, v in edges:
            if u == v:
                raise PocmedError(f"loop at vertex {labels[u]}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(tuple(labels), tuple(adj))

    @property
    def n(self) -> int:
        return len(self.labels)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in iter_bits(self.adj[u]) if u < v]

    def degree(self, v: int) -> int:
        return popcount(self.adj[v])

    def complement(self) -> "SimpleGraph":
        everyone = (1 << self.n) - 1
        return SimpleGraph(self.labels, tuple(everyone & ~a & ~(1 << i) for i, a in enumerate(self.adj)))

    def components(self) -> list[list[int]]:
        seen = 0
        out = []
        for s in range(self.n):
            if seen >> s & 1:
                continue
            comp = 1 << s
            frontier = 1 << s
            while frontier:
                nxt = 0
                for v in iter_bits(frontier):
                    nxt |= self.adj[v]
                frontier = nxt & ~comp
                comp |= nxt
            seen |= comp
            out.append(list(iter_bits(comp)))
        return out

    def is_connected(self) -> bool:
        return self.n > 0 and len(self.components()) == 1

    def distances(self) -> list[list[int]]:
        """All-pairs BFS distances; -1 marks unreachable."""
        out = []
        for s in range(self.n):
            dist = [-1] * self.n
            dist[s] = 0
            q = deque([s])
            while q:
                u = q.popleft()
                for v in iter_bits(self.adj[u]):
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        q.append(v)
            out.append(dist)
        return out

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "SimpleGraph":
        nodes = list(g.nodes())
        pos = {v: i for i, v in enumerate(nodes)}
        return cls.from_edges([str(v) for v in nodes], [(pos[u], pos[v]) for u, v in g.edges()])


def parse_graph_source(text: str, header: str = "graph") -> tuple[str, SimpleGraph]:
    """Parse ``graph <name>`` / ``edge u v`` text. Vertices are numbered in first-seen order."""
    name = None
    labels: list[str] = []
    pos: dict[str, int] = {}
    edges: set[tuple[int, int]] = set()

    def vertex(tok: str) -> int:
        if tok not in pos:
            pos[tok] = len(labels)
            labels.append(tok)
        return pos[tok]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if line[0] == header:
            if name is not None or len(line) != 2:
                raise ParseError(f"bad '{header}' header", lineno)
            name = line[1]
        elif line[0] == "vertex" and name is not None:
            for tok in line[1:]:
                vertex(tok)
        elif line[0] == "edge" and name is not None:
            if len(line) != 3:
                raise ParseError("edge needs two endpoints", lineno)
            u, v = vertex(line[1]), vertex(line[2])
            if u == v:
                raise ParseError("loops are not allowed", lineno)
            edges.add((min(u, v), max(u, v)))
        else:
            raise ParseError(f"unexpected '{line[0]}'", lineno)
    if name is None:
        raise ParseError(f"missing '{header}' header")
    return name, SimpleGraph.from_edges(labels, sorted(edges))


def is_isomorphic(g: SimpleGraph, h: SimpleGraph) -> bool:
    if g.n != h.n or sorted(map(g.degree, range(g.n))) != sorted(map(h.degree, range(h.n))):
        return False
    return nx.is_isomorphic(g.to_networkx(), h.to_networkx())


def maximal_cliques(g: SimpleGraph) -> list[int]:
    """Bron-Kerbosch with pivoting; cliques as vertex bitsets, sorted."""
    out: list[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if not p and not x:
            out.append(r)
            return
        pivot = max(iter_bits(p | x), key=lambda u: popcount(p & g.adj[u]))
        for v in iter_bits(p & ~g.adj[pivot]):
            expand(r | 1 << v, p & g.adj[v], x & g.adj[v])
            p &= ~(1 << v)
            x |= 1 << v

    if g.n:
        expand(0, (1 << g.n) - 1, 0)
    return sorted(out)


def clique_number(g: SimpleGraph) -> int:
    return max((popcount(c) for c in maximal_cliques(g)), default=0)


def all_cliques(g: SimpleGraph) -> list[int]:
    """Every clique including the empty one, as bitsets in increasing order."""
    out = [0]

    def grow(c: int, cand: int) -> None:
        for v in iter_bits(cand):
            nc = c | 1 << v
            out.append(nc)
            grow(nc, cand & g.adj[v] & ~((1 << (v + 1)) - 1))

    grow(0, (1 << g.n) - 1)
    return sorted(out)


def greedy_colouring(g: SimpleGraph) -> list[int]:
    """Largest-degree-first greedy colouring."""
    order = sorted(range(g.n), key=lambda v: (-g.degree(v), v))
    colour = [-1] * g.n
    for v in order:
        used = {colour[u] for u in iter_bits(g.adj[v])}
        c = 0
        while c in used:
            c += 1
        colour[v] = c
    return colour


def chromatic_number(g: SimpleGraph, limit: int = 20) -> int:
    """Exact chromatic number by DSATUR branch and bound."""
    if g.n > limit:
        raise LimitExceeded(f"exact colouring limited to {limit} vertices, got {g.n}")
    if g.n == 0:
        return 0
    best = max(greedy_colouring(g)) + 1
    lower = clique_number(g)
    colour = [-1] * g.n

    def search(coloured: int, used: int) -> None:
        nonlocal best
        if used >= best:
            return
        if coloured == g.n:
            best = used
            return
        # most saturated uncoloured vertex, ties by degree
        v = max(
            (u for u in range(g.n) if colour[u] < 0),
            key=lambda u: (len({colour[w] for w in iter_bits(g.adj[u]) if colour[w] >= 0}), g.degree(u)),
        )
        forbidden = {colour[w] for w in iter_bits(g.adj[v])}
        for c in range(min(used + 1, best - 1)):
            if c in forbidden:
                continue
            colour[v] = c
            search(coloured + 1, max(used, c + 1))
            colour[v] = -1
            if best == lower:
                return

    search(0, 0)
    return best
