"""Core graph, digraph, and tournament types with validity checkers.

All types are immutable after construction and store adjacency as one
Python-int bit row per vertex, so neighborhood intersections and triangle
probes are word-parallel.  Vertex ids are dense integers ``0..n-1`` and
constructors canonicalize edge order, which keeps every generator in the
library seed-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np


class InvariantError(ValueError):
    """A structural invariant of an instance was violated."""


class MalformedCertificateError(ValueError):
    """A coloring certificate does not even type-check against its instance."""


def iter_bits(mask: int) -> Iterator[int]:
    """Yield set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    __slots__ = ("n", "edges", "adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 0:
            raise InvariantError("vertex count must be nonnegative")
        canon = set()
        for u, v in edges:
            if u == v:
                raise InvariantError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvariantError(f"edge ({u},{v}) out of range for n={n}")
            canon.add((u, v) if u < v else (v, u))
        self.n = n
        self.edges = tuple(sorted(canon))
        adj = [0] * n
        for u, v in self.edges:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self.adj = tuple(adj)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def delete_edge(self, u: int, v: int) -> "Graph":
        e = (u, v) if u < v else (v, u)
        if e not in set(self.edges):
            raise InvariantError(f"edge {e} not present")
        return Graph(self.n, (f for f in self.edges if f != e))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class Digraph:
    """Simple directed graph; digons are permitted unless a construction forbids them."""

    __slots__ = ("n", "arcs", "out_adj", "in_adj")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]]):
        if n < 0:
            raise InvariantError("vertex count must be nonnegative")
        canon = set()
        for u, v in arcs:
            if u == v:
                raise InvariantError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvariantError(f"arc ({u},{v}) out of range for n={n}")
            canon.add((u, v))
        self.n = n
        self.arcs = tuple(sorted(canon))
        out_adj = [0] * n
        in_adj = [0] * n
        for u, v in self.arcs:
            out_adj[u] |= 1 << v
            in_adj[v] |= 1 << u
        self.out_adj = tuple(out_adj)
        self.in_adj = tuple(in_adj)

    @property
    def m(self) -> int:
        return len(self.arcs)

    def out_degree(self, v: int) -> int:
        return self.out_adj[v].bit_count()

    def in_degree(self, v: int) -> int:
        return self.in_adj[v].bit_count()

    def degree(self, v: int) -> int:
        return self.out_degree(v) + self.in_degree(v)

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.out_adj[u] >> v & 1)

    def delete_arc(self, u: int, v: int) -> "Digraph":
        if not self.has_arc(u, v):
            raise InvariantError(f"arc ({u},{v}) not present")
        return Digraph(self.n, (a for a in self.arcs if a != (u, v)))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Digraph)
            and isinstance(self, Tournament) == isinstance(other, Tournament)
            and self.n == other.n
            and self.arcs == other.arcs
        )

    def __hash__(self) -> int:
        return hash((self.n, self.arcs))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, m={self.m})"


class Tournament(Digraph):
    """Complete orientation: exactly one arc per unordered vertex pair."""

    __slots__ = ()

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]]):
        super().__init__(n, arcs)
        if self.m != n * (n - 1) // 2:
            raise InvariantError(
                f"tournament on {n} vertices needs {n * (n - 1) // 2} arcs, got {self.m}"
            )
        for u in range(n):
            both = self.out_adj[u] & self.in_adj[u]
            if both:
                v = next(iter_bits(both))
                raise InvariantError(f"digon between {u} and {v}")
        # m arcs, no digons, no self-loops: every pair is decided.

    @classmethod
    def from_order(cls, order: Iterable[int]) -> "Tournament":
        """Transitive tournament where earlier vertices beat later ones."""
        seq = list(order)
        arcs = [
            (seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, len(seq))
        ]
        return cls(len(seq), arcs)

    def induced(self, vertices: Iterable[int]) -> tuple["Tournament", list[int]]:
        """Induced subtournament plus the original ids in local order."""
        ids = sorted(vertices)
        index = {v: i for i, v in enumerate(ids)}
        arcs = [
            (index[u], index[v])
            for u in ids
            for v in iter_bits(self.out_adj[u])
            if v in index
        ]
        return Tournament(len(ids), arcs), ids


@dataclass(frozen=True)
class Coloring:
    """Total vertex-to-color assignment with colors below ``r``."""

    colors: tuple[int, ...]
    r: int

    def check_against(self, n: int) -> None:
        if len(self.colors) != n:
            raise MalformedCertificateError(
                f"coloring covers {len(self.colors)} vertices, instance has {n}"
            )
        for v, c in enumerate(self.colors):
            if not (0 <= c < self.r):
                raise MalformedCertificateError(
                    f"vertex {v} has color {c}, outside 0..{self.r - 1}"
                )

    def class_members(self, color: int) -> list[int]:
        return [v for v, c in enumerate(self.colors) if c == color]

    def permuted(self, mapping: dict[int, int]) -> "Coloring":
        return Coloring(tuple(mapping[c] for c in self.colors), self.r)


class DegreeStats(NamedTuple):
    max_degree: int
    max_in_degree: int
    max_out_degree: int


def _class_masks(coloring: Coloring) -> list[int]:
    masks = [0] * coloring.r
    for v, c in enumerate(coloring.colors):
        masks[c] |= 1 << v
    return masks


def _graph_class_is_forest(g: Graph, members: list[int], mask: int) -> bool:
    # union-find over the class; any redundant edge closes a cycle
    parent = {v: v for v in members}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u in members:
        inside = g.adj[u] & mask
        for v in iter_bits(inside):
            if v <= u:
                continue
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
    return True


def _digraph_class_is_acyclic(g: Digraph, members: list[int], mask: int) -> bool:
    if len(members) > 64:
        return _digraph_class_is_acyclic_bulk(g, members, mask)
    # Kahn peeling restricted to the class
    alive = mask
    indeg = {v: (g.in_adj[v] & mask).bit_count() for v in members}
    queue = [v for v in members if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        alive &= ~(1 << v)
        for w in iter_bits(g.out_adj[v] & alive):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen == len(members)


def _digraph_class_is_acyclic_bulk(g: Digraph, members: list[int], mask: int) -> bool:
    # vectorized Kahn for big classes: peel all current sources each pass
    nbytes = (g.n + 7) // 8
    raw = b"".join((g.out_adj[v] & mask).to_bytes(nbytes, "little") for v in members)
    rows = np.frombuffer(raw, dtype=np.uint8).reshape(len(members), nbytes)
    sub = np.unpackbits(rows, axis=1, bitorder="little")[:, members]
    indeg = sub.sum(axis=0).astype(np.int64)
    alive = np.ones(len(members), dtype=bool)
    while True:
        sources = np.flatnonzero(alive & (indeg == 0))
        if sources.size == 0:
            return not alive.any()
        alive[sources] = False
        indeg -= sub[sources].sum(axis=0).astype(np.int64)
        indeg[~alive] = -1


def is_valid_acyclic_coloring(g: Graph | Digraph, coloring: Coloring) -> bool:
    """True iff every color class induces a forest (graphs) or a DAG (digraphs).

    This is the polynomial-time universal verifier: every reduction output
    and every recovery result in the library is checked through it.
    """
    coloring.check_against(g.n)
    masks = _class_masks(coloring)
    directed = isinstance(g, Digraph)
    for c, mask in enumerate(masks):
        members = coloring.class_members(c)
        if directed:
            if not _digraph_class_is_acyclic(g, members, mask):
                return False
        else:
            if not _graph_class_is_forest(g, members, mask):
                return False
    return True


def girth(g: Graph) -> int | None:
    """Length of the shortest cycle; None for forests.

    BFS from every vertex; a non-tree edge scanned at depth d closes a
    cycle of length dist(x) + dist(y) + 1, and the minimum over all roots
    is exact for unweighted graphs.
    """
    best: int | None = None
    for src in range(g.n):
        dist = [-1] * g.n
        parent = [-1] * g.n
        dist[src] = 0
        frontier = [src]
        while frontier:
            nxt = []
            for x in frontier:
                if best is not None and dist[x] * 2 >= best:
                    continue
                for y in iter_bits(g.adj[x]):
                    if dist[y] == -1:
                        dist[y] = dist[x] + 1
                        parent[y] = x
                        nxt.append(y)
                    elif y != parent[x]:
                        cand = dist[x] + dist[y] + 1
                        if best is None or cand < best:
                            best = cand
            frontier = nxt
    return best


def directed_girth(g: Digraph) -> int | None:
    """Minimum directed cycle length; None when the digraph is acyclic.

    Equals min over sources s of 1 + (shortest path from s back to an
    in-neighbor of s), computed by BFS along out-arcs.
    """
    best: int | None = None
    for src in range(g.n):
        dist = [-1] * g.n
        dist[src] = 0
        frontier = [src]
        closing = g.in_adj[src]
        while frontier:
            nxt = []
            for x in frontier:
                if best is not None and dist[x] + 1 >= best:
                    continue
                for y in iter_bits(g.out_adj[x]):
                    if dist[y] == -1:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
                        if closing >> y & 1:
                            cand = dist[y] + 1
                            if best is None or cand < best:
                                best = cand
            frontier = nxt
    return best


def degree_stats(g: Graph | Digraph) -> DegreeStats:
    """Exact degree maxima; for graphs the in/out fields mirror the degree."""
    if isinstance(g, Digraph):
        if g.n == 0:
            return DegreeStats(0, 0, 0)
        max_in = max(g.in_degree(v) for v in range(g.n))
        max_out = max(g.out_degree(v) for v in range(g.n))
        max_deg = max(g.degree(v) for v in range(g.n))
        return DegreeStats(max_deg, max_in, max_out)
    if g.n == 0:
        return DegreeStats(0, 0, 0)
    d = max(g.degree(v) for v in range(g.n))
    return DegreeStats(d, d, d)


def is_transitive(t: Tournament, vertices: Iterable[int] | None = None) -> bool:
    """A set induces a transitive subtournament iff its inner out-degrees are all distinct."""
    ids = list(range(t.n)) if vertices is None else list(vertices)
    mask = 0
    for v in ids:
        mask |= 1 << v
    degs = sorted((t.out_adj[v] & mask).bit_count() for v in ids)
    return degs == list(range(len(ids)))
