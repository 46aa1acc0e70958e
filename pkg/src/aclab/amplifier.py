"""Random bipartite orientations and the block blow-up construction.

A uniformly random orientation of K_{n,n} rarely leaves any pair of
medium-size side-subsets inducing an acyclic digraph; the blow-up
construction exploits that by replacing every vertex of a source graph
with an independent block and every edge with such a random orientation,
keeping the output digon-free while proper colorings of the source copy
over blockwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graphs import Coloring, Digraph, Graph, InvariantError, is_valid_acyclic_coloring, iter_bits
from .oracle import DEFAULT_BUDGET, OracleBudget, PreconditionError, decide_proper_colorable
from .rng import Rng


def random_bipartite_orientation(n: int, seed: int) -> Digraph:
    """Orient every edge of K_{n,n} by an independent seeded coin flip.

    Vertices 0..n-1 form the left side, n..2n-1 the right; bit t of the
    seeded stream orients pair (t // n, n + t % n), with a set bit meaning
    left to right.  Exactly n^2 arcs, no digons, none within a side.
    """
    if n < 1:
        raise InvariantError("need n >= 1")
    rng = Rng(seed)
    bits = rng.bit_array(n * n)
    arcs = []
    pos = 0
    for u in range(n):
        for v in range(n, 2 * n):
            if bits[pos]:
                arcs.append((u, v))
            else:
                arcs.append((v, u))
            pos += 1
    return Digraph(2 * n, arcs)


@dataclass(frozen=True)
class BiacyclicSearch:
    """Outcome of the exhaustive search over side-subset pairs."""

    first_acyclic: tuple[tuple[int, ...], tuple[int, ...]] | None
    pairs_searched: int
    total_pairs: int
    acyclic_pairs: int
    exhaustive: bool


def _side_partition(h: Digraph, sides) -> tuple[list[int], list[int]]:
    if sides is not None:
        left, right = list(sides[0]), list(sides[1])
    else:
        half = h.n // 2
        left, right = list(range(half)), list(range(half, h.n))
    left_mask = sum(1 << v for v in left)
    right_mask = sum(1 << v for v in right)
    for v in left:
        if h.out_adj[v] & left_mask:
            raise InvariantError("arc inside the left side; not bipartite")
    for v in right:
        if h.out_adj[v] & right_mask:
            raise InvariantError("arc inside the right side; not bipartite")
    return left, right


def _pair_acyclic(h: Digraph, left_subset, right_mask: int) -> bool:
    # Kahn peel over the induced pair; bipartite, so alternate sides
    alive = right_mask
    for v in left_subset:
        alive |= 1 << v
    while True:
        removed = False
        m = alive
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            if not (h.in_adj[v] & alive):
                alive &= ~low
                removed = True
        if not alive:
            return True
        if not removed:
            return False


def check_biacyclic_pair(
    h: Digraph,
    m: int,
    sides=None,
    max_pairs: int | None = None,
    count_all: bool = False,
) -> BiacyclicSearch:
    """Search all (U', V') with |U'| = |V'| = m for an acyclic induced pair.

    The verdict "none" is exhaustive: every one of C(left, m) * C(right, m)
    pairs was checked.  With ``count_all`` the search continues past the
    first hit and reports the exact number of acyclic pairs.
    """
    left, right = _side_partition(h, sides)
    if m < 1 or m > len(left) or m > len(right):
        raise PreconditionError(f"subset size {m} exceeds a side")
    from math import comb

    total = comb(len(left), m) * comb(len(right), m)
    searched = 0
    hits = 0
    first = None
    for lsub in combinations(left, m):
        for rsub in combinations(right, m):
            if max_pairs is not None and searched >= max_pairs:
                return BiacyclicSearch(first, searched, total, hits, False)
            searched += 1
            rmask = 0
            for v in rsub:
                rmask |= 1 << v
            if _pair_acyclic(h, lsub, rmask):
                hits += 1
                if first is None:
                    first = (tuple(lsub), tuple(rsub))
                if not count_all:
                    return BiacyclicSearch(first, searched, total, hits, False)
    return BiacyclicSearch(first, searched, total, hits, True)


@dataclass(frozen=True)
class BlowupSpec:
    """Source graph, block size (defaults to the source order), and seed."""

    graph: Graph
    block_size: int
    seed: int

    def __post_init__(self):
        if self.block_size < 1:
            raise InvariantError("block size must be positive")


def blow_up(
    spec: BlowupSpec,
    source_coloring: Coloring | None = None,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> tuple[Digraph, Coloring | None]:
    """Replace vertices by independent blocks and edges by random orientations.

    Block i occupies ids [i*b, (i+1)*b); one seeded stream orients the
    blocks of each source edge in canonical edge order.  When a proper
    coloring of the source is available (supplied, or found by the oracle
    within budget), the blockwise copy is returned and validated; adjacent
    blocks then have different colors, so every color class is arcless.
    """
    g = spec.graph
    b = spec.block_size
    rng = Rng(spec.seed)
    arcs: list[tuple[int, int]] = []
    for x, y in g.edges:
        bits = rng.bit_array(b * b)
        pos = 0
        for i in range(x * b, (x + 1) * b):
            for j in range(y * b, (y + 1) * b):
                if bits[pos]:
                    arcs.append((i, j))
                else:
                    arcs.append((j, i))
                pos += 1
    out = Digraph(g.n * b, arcs)

    coloring = source_coloring
    if coloring is None:
        spent = 0
        for r in range(1, g.n + 1):
            remaining = budget.max_nodes - spent
            if remaining <= 0:
                break
            res = decide_proper_colorable(g, r, OracleBudget(remaining, budget.max_seconds))
            spent += res.nodes
            if res.verdict == "yes":
                coloring = res.witness
                break
            if res.verdict == "inconclusive":
                break
    if coloring is None:
        return out, None

    coloring.check_against(g.n)
    for x, y in g.edges:
        if coloring.colors[x] == coloring.colors[y]:
            raise PreconditionError("source coloring is not proper")
    copied = Coloring(
        tuple(coloring.colors[v // b] for v in range(out.n)), coloring.r
    )
    assert is_valid_acyclic_coloring(out, copied)
    return out, copied


def largest_acyclic_induced(g: Digraph, budget: OracleBudget = DEFAULT_BUDGET):
    """Exact maximum induced acyclic vertex set by branch and bound.

    Equivalent to minimum feedback vertex set: find a directed cycle,
    branch on which of its vertices to delete.  Desk scale (n up to ~30).
    """
    from .oracle import SetResult, _Exhausted, _Ticker

    n = g.n
    full = (1 << n) - 1
    ticker = _Ticker(budget)

    def find_cycle(mask: int) -> list[int] | None:
        # iterative DFS returning one directed cycle inside mask
        color = {}
        for start in iter_bits(mask):
            if color.get(start):
                continue
            stack = [(start, iter_bits(g.out_adj[start] & mask))]
            color[start] = 1
            path = [start]
            while stack:
                v, it = stack[-1]
                advanced = False
                for w in it:
                    if color.get(w, 0) == 1:
                        return path[path.index(w):]
                    if color.get(w, 0) == 0:
                        color[w] = 1
                        path.append(w)
                        stack.append((w, iter_bits(g.out_adj[w] & mask)))
                        advanced = True
                        break
                if not advanced:
                    color[v] = 2
                    path.pop()
                    stack.pop()
        return None

    # greedy start so a budget-exhausted run still reports a valid set
    mask = full
    greedy_removed: list[int] = []
    while True:
        cycle = find_cycle(mask)
        if cycle is None:
            break
        greedy_removed.append(cycle[0])
        mask &= ~(1 << cycle[0])
    best_removed = list(greedy_removed)
    best_size = n - len(greedy_removed)

    def rec(mask: int, removed: list[int]) -> None:
        nonlocal best_removed, best_size
        ticker.tick()
        cycle = find_cycle(mask)
        if cycle is None:
            size = mask.bit_count()
            if size > best_size:
                best_size = size
                best_removed = list(removed)
            return
        if best_size >= 0 and n - len(removed) - 1 <= best_size:
            return
        for v in cycle:
            removed.append(v)
            rec(mask & ~(1 << v), removed)
            removed.pop()

    try:
        rec(full, [])
        exact = True
    except _Exhausted:
        exact = False
    kept = tuple(v for v in range(n) if v not in set(best_removed))
    return SetResult(kept, exact, ticker.nodes, ticker.seconds())
