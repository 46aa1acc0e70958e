"""Gadget constructions and the oracle-verified gadget registry.

The centerpiece is ``build_tower``: a recursive ring-of-blocks digraph
with directed girth exactly k that has no acyclic r-coloring but becomes
colorable after deleting any single arc.  Around it sit the equalizer
gadget for binding clause occurrences, the pigeonhole-unsatisfiable NAE
instance, and derivation of equal/different color-forcing gadgets from
any edge-critical core.

Undirected high-girth cores have no closed-form construction here, so the
registry serves concrete, oracle-certified graphs for the parameter
combinations it knows and reports everything else as unavailable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .graphs import (
    Coloring,
    Digraph,
    Graph,
    InvariantError,
    directed_girth,
    girth,
)
from .nae import NaeInstance
from .oracle import (
    DEFAULT_BUDGET,
    OracleBudget,
    PreconditionError,
    decide_acyclic_colorable,
    decide_proper_colorable,
    enumerate_acyclic_colorings,
)

FORCES_EQUAL = "equal"
FORCES_DIFFERENT = "different"


class ConstructionBugError(AssertionError):
    """A construction failed one of its own certified properties."""


class RegistryUnavailableError(LookupError):
    """No certified gadget is known for the requested parameters."""


@dataclass(frozen=True)
class BlockTag:
    """Role of one top-level block: its copy index and inner color bound."""

    copy: int
    inner_r: int


@dataclass(frozen=True)
class BlockedDigraph:
    """A digraph plus its top-level block structure.

    Blocks partition the vertices; between consecutive blocks (cyclically)
    every cross arc in the forward direction is present.
    """

    digraph: Digraph
    blocks: tuple[tuple[int, ...], ...]
    tags: tuple[BlockTag, ...]

    def __post_init__(self):
        seen: set[int] = set()
        for block in self.blocks:
            for v in block:
                if v in seen:
                    raise InvariantError(f"vertex {v} appears in two blocks")
                seen.add(v)
        if len(seen) != self.digraph.n:
            raise InvariantError("blocks do not partition the vertex set")
        if len(self.tags) != len(self.blocks):
            raise InvariantError("one tag per block required")


@dataclass(frozen=True)
class CheckRecord:
    prop: str
    status: str  # "verified" | "asserted" | "failed"
    detail: str = ""
    nodes: int = 0


@dataclass(frozen=True)
class GadgetCertificate:
    """Oracle-checked properties attached to a gadget used by a reduction."""

    kind: str
    girth: int | None
    non_colorable_r: int
    edge_critical: bool
    terminals: tuple[int, ...]
    budget_nodes: int
    checks: tuple[CheckRecord, ...] = ()

    @property
    def status(self) -> str:
        return "asserted" if any(c.status == "asserted" for c in self.checks) else "verified"

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "girth": self.girth,
            "non_colorable_r": self.non_colorable_r,
            "edge_critical": self.edge_critical,
            "terminals": list(self.terminals),
            "budget_nodes": self.budget_nodes,
            "status": self.status,
            "checks": [
                {"prop": c.prop, "status": c.status, "detail": c.detail, "nodes": c.nodes}
                for c in self.checks
            ],
        }


def _tower_parts(k: int, r: int) -> tuple[int, int, int, int]:
    """Split r-1 = a*floor((r-1)/k) + b*ceil((r-1)/k) with a+b=k."""
    q, rem = divmod(r - 1, k)
    if rem == 0:
        return k, 0, r - 1 - q, r - 1 - q
    return k - rem, rem, r - 1 - q, r - 1 - (q + 1)


def _tower_recursive(k: int, r: int, base: int) -> tuple[int, list[tuple[int, int]], list[int]]:
    """Return (size, arcs, block sizes of the top level) with ids >= base."""
    if r <= 0:
        return 1, [], [1]
    if r == 1:
        arcs = [(base + i, base + (i + 1) % k) for i in range(k)]
        return k, arcs, [k]
    a, b, r1, r2 = _tower_parts(k, r)
    sizes: list[int] = []
    arcs: list[tuple[int, int]] = []
    offsets: list[int] = []
    cursor = base
    for i in range(k):
        inner_r = r1 if i < a else r2
        size, inner_arcs, _ = _tower_recursive(k, inner_r, cursor)
        offsets.append(cursor)
        sizes.append(size)
        arcs.extend(inner_arcs)
        cursor += size
    for i in range(k):
        j = (i + 1) % k
        for u in range(offsets[i], offsets[i] + sizes[i]):
            for v in range(offsets[j], offsets[j] + sizes[j]):
                arcs.append((u, v))
    return cursor - base, arcs, sizes


def build_tower(k: int, r: int) -> BlockedDigraph:
    """Arc-critical digraph of directed girth k with no acyclic r-coloring.

    Base cases: r=0 is a single vertex, r=1 a directed k-cycle.  For
    r >= 2 the gadget is a directed ring of k blocks, each a smaller tower
    built for r' = r-1-floor((r-1)/k) or r'' = r-1-ceil((r-1)/k), with
    every cross arc between consecutive blocks.  Ring order is canonical:
    the a floor-blocks first, then the b ceil-blocks.
    """
    if k < 3:
        raise PreconditionError("need k >= 3")
    if r < 0:
        raise PreconditionError("need r >= 0")
    if r == 0:
        single = Digraph(1, [])
        return BlockedDigraph(single, ((0,),), (BlockTag(0, 0),))
    if r == 1:
        cycle = Digraph(k, [(i, (i + 1) % k) for i in range(k)])
        return BlockedDigraph(cycle, (tuple(range(k)),), (BlockTag(0, 1),))
    a, _, r1, r2 = _tower_parts(k, r)
    size, arcs, sizes = _tower_recursive(k, r, 0)
    digraph = Digraph(size, arcs)
    blocks = []
    tags = []
    cursor = 0
    for i, block_size in enumerate(sizes):
        blocks.append(tuple(range(cursor, cursor + block_size)))
        tags.append(BlockTag(i, r1 if i < a else r2))
        cursor += block_size
    return BlockedDigraph(digraph, tuple(blocks), tuple(tags))


def tower_size_bound(k: int, r: int) -> int:
    return k**r if r >= 1 else 1


def tower_refined_bound(k: int, r: int) -> int:
    """Size bound for the k <= r regime, read with the natural logarithm."""
    return k ** math.ceil(k * (1 + math.log(r / k)))


def verify_tower(
    g: BlockedDigraph, k: int, r: int, budget: OracleBudget = DEFAULT_BUDGET
) -> GadgetCertificate:
    """Certify size, non-colorability, all-arc criticality, and girth.

    A failed check raises; checks that would exceed the budget are
    recorded as asserted rather than silently trusted.
    """
    d = g.digraph
    checks: list[CheckRecord] = []
    spent = 0

    def fail(prop: str, detail: str):
        raise ConstructionBugError(f"tower({k},{r}) failed {prop}: {detail}")

    bound = tower_size_bound(k, r)
    if d.n > bound:
        fail("size", f"{d.n} vertices exceeds {bound}")
    detail = f"{d.n} <= {bound}"
    if 1 <= k <= r:
        refined = tower_refined_bound(k, r)
        detail += f", refined {d.n} <= {refined}"
        if d.n > refined:
            fail("size-refined", f"{d.n} vertices exceeds {refined}")
    checks.append(CheckRecord("size", "verified", detail))

    dg = directed_girth(d)
    if r == 0:
        checks.append(CheckRecord("girth", "verified", "single vertex, no cycle"))
    elif dg != k:
        fail("girth", f"directed girth {dg}, expected {k}")
    else:
        checks.append(CheckRecord("girth", "verified", f"directed girth {dg}"))

    if r == 0:
        checks.append(CheckRecord("non-colorable", "verified", "no 0-coloring exists"))
        checks.append(CheckRecord("criticality", "verified", "no arcs"))
        return GadgetCertificate("acyclic-digraph", dg, 0, True, (), 0, tuple(checks))

    res = decide_acyclic_colorable(d, r, budget)
    spent += res.nodes
    if res.verdict == "yes":
        fail("non-colorable", f"found an acyclic {r}-coloring")
    status = "verified" if res.verdict == "no" else "asserted"
    checks.append(CheckRecord("non-colorable", status, f"verdict {res.verdict}", res.nodes))

    critical_status = "verified"
    critical_nodes = 0
    for arc in d.arcs:
        sub = decide_acyclic_colorable(d.delete_arc(*arc), r, budget)
        critical_nodes += sub.nodes
        if sub.verdict == "no":
            fail("criticality", f"arc {arc} is not critical")
        if sub.verdict == "inconclusive":
            critical_status = "asserted"
    spent += critical_nodes
    checks.append(
        CheckRecord("criticality", critical_status, f"{d.m} arcs tested", critical_nodes)
    )

    return GadgetCertificate(
        "acyclic-digraph", dg, r, True, (), spent, tuple(checks)
    )


def build_equalizer(k: int, t: int = 3) -> tuple[Digraph, int, tuple[int, ...]]:
    """Digraph whose every acyclic 2-coloring makes the t ports one color.

    Layout: an apex, then t independent ports, then k-2 directed k-cycles,
    arranged in a directed ring of k layers with all cross arcs between
    consecutive layers.  Every inner layer must use both colors, so the
    ports are forced away from the apex color and hence agree.  Returns
    (digraph, apex vertex, port vertices); in/out degrees are at most
    max(k, t) + 1.
    """
    if k < 3:
        raise PreconditionError("need k >= 3")
    if t < 1:
        raise PreconditionError("need at least one port")
    layers: list[list[int]] = [[0], list(range(1, 1 + t))]
    cursor = 1 + t
    arcs: list[tuple[int, int]] = []
    for _ in range(k - 2):
        cycle = list(range(cursor, cursor + k))
        for i in range(k):
            arcs.append((cycle[i], cycle[(i + 1) % k]))
        layers.append(cycle)
        cursor += k
    for i in range(k):
        for u in layers[i]:
            for v in layers[(i + 1) % k]:
                arcs.append((u, v))
    return Digraph(cursor, arcs), 0, tuple(layers[1])


def pigeonhole_nae(r: int, k: int) -> NaeInstance:
    """Complete k-subset instance on (k-1)r + 1 variables; unsatisfiable.

    With r values available, some k of the variables must collide on one
    value, and the clause on exactly those variables is then monochromatic.
    """
    if r < 1 or k < 2:
        raise PreconditionError("need r >= 1 and k >= 2")
    n = (k - 1) * r + 1
    clauses = tuple(tuple(c) for c in combinations(range(n), k))
    return NaeInstance(n, r, k, clauses)


def nae_to_digraph(inst: NaeInstance) -> Digraph:
    """One vertex per variable; each clause becomes a directed k-cycle."""
    arcs = []
    for clause in inst.clauses:
        for i in range(len(clause)):
            arcs.append((clause[i], clause[(i + 1) % len(clause)]))
    return Digraph(inst.n_vars, arcs)


def nae_to_graph(inst: NaeInstance) -> Graph:
    """One vertex per variable; each clause becomes an undirected k-cycle."""
    edges = []
    for clause in inst.clauses:
        for i in range(len(clause)):
            edges.append((clause[i], clause[(i + 1) % len(clause)]))
    return Graph(inst.n_vars, edges)


@dataclass(frozen=True)
class ForcingGadget:
    """A gadget with two terminals whose colors every acyclic coloring constrains.

    ``witness`` is None only when the body admits no acyclic r-coloring at
    all, which makes a different-forcing claim vacuously true.
    """

    body: Graph | Digraph
    u: int
    v: int
    forces: str  # FORCES_EQUAL | FORCES_DIFFERENT
    witness: Coloring | None
    certificate: GadgetCertificate

    @property
    def directed(self) -> bool:
        return isinstance(self.body, Digraph)


@dataclass(frozen=True)
class ForcingPair:
    equal: ForcingGadget
    different: ForcingGadget


def _subdivide(g: Graph | Digraph, u: int, v: int) -> Graph | Digraph:
    w = g.n
    if isinstance(g, Digraph):
        arcs = [a for a in g.arcs if a != (u, v)]
        arcs += [(u, w), (w, v)]
        return Digraph(g.n + 1, arcs)
    e = (u, v) if u < v else (v, u)
    edges = [f for f in g.edges if f != e]
    edges += [(u, w), (w, v)]
    return Graph(g.n + 1, edges)


def _forcing_check(
    body: Graph | Digraph,
    a: int,
    b: int,
    r: int,
    want_equal: bool,
    enumeration_limit: int,
) -> tuple[str, Coloring | None]:
    """Enumerate all acyclic r-colorings when feasible and pick a witness.

    A different-forcing body may admit no coloring at all (r=1): the
    forcing then holds vacuously and the witness is None.
    """
    total = r**body.n
    witness = None
    if total <= enumeration_limit:
        for coloring in enumerate_acyclic_colorings(body, r):
            same = coloring.colors[a] == coloring.colors[b]
            if same != want_equal:
                raise ConstructionBugError(
                    f"forcing violated: coloring {coloring.colors} on terminals ({a},{b})"
                )
            if witness is None:
                witness = coloring
        if witness is None and want_equal:
            raise ConstructionBugError("gadget body admits no acyclic coloring at all")
        return "verified", witness
    res = decide_acyclic_colorable(body, r)
    if res.verdict == "no" and not want_equal:
        return "verified", None
    if res.verdict != "yes":
        raise ConstructionBugError(f"gadget body not {r}-colorable (verdict {res.verdict})")
    same = res.witness.colors[a] == res.witness.colors[b]
    if same != want_equal:
        raise ConstructionBugError("oracle witness contradicts the claimed forcing")
    return "asserted", res.witness


def derive_forcing_gadgets(
    core: Graph | Digraph,
    edge: tuple[int, int],
    r: int,
    budget: OracleBudget = DEFAULT_BUDGET,
    enumeration_limit: int = 400_000,
) -> ForcingPair:
    """Derive the equal- and different-forcing gadgets from a critical core.

    The equal gadget is the core minus its critical edge: were its
    terminals ever colored differently, re-adding the edge would color the
    core.  The different gadget subdivides the critical edge with a fresh
    vertex w; terminals are the old tail and w.  For digraph cores the
    equal gadget's terminals are returned as (head, tail): directed girth
    at least k in the core means every directed path from head back to
    tail is long, which is the orientation the tree constructions need.
    """
    u, v = edge
    directed = isinstance(core, Digraph)
    pre = decide_acyclic_colorable(core, r, budget)
    if pre.verdict != "no":
        raise PreconditionError(
            f"core must be certified non-{r}-colorable (oracle said {pre.verdict})"
        )
    reduced = core.delete_arc(u, v) if directed else core.delete_edge(u, v)
    sanity = decide_acyclic_colorable(reduced, r, budget)
    if sanity.verdict != "yes":
        raise PreconditionError(
            f"core minus {edge} must be {r}-colorable (oracle said {sanity.verdict})"
        )

    g_core = girth(core) if not directed else directed_girth(core)

    status1, witness1 = _forcing_check(reduced, u, v, r, True, enumeration_limit)
    eq_terminals = (v, u) if directed else (u, v)
    cert1 = GadgetCertificate(
        "forcing-equal",
        g_core,
        r,
        True,
        eq_terminals,
        pre.nodes + sanity.nodes,
        (CheckRecord("terminal-equality", status1, f"all acyclic {r}-colorings agree"),),
    )
    equal = ForcingGadget(reduced, eq_terminals[0], eq_terminals[1], FORCES_EQUAL, witness1, cert1)

    body2 = _subdivide(core, u, v)
    w = core.n
    status2, witness2 = _forcing_check(body2, u, w, r, False, enumeration_limit)
    cert2 = GadgetCertificate(
        "forcing-different",
        g_core,
        r,
        True,
        (u, w),
        0,
        (CheckRecord("terminal-inequality", status2, f"all acyclic {r}-colorings differ"),),
    )
    different = ForcingGadget(body2, u, w, FORCES_DIFFERENT, witness2, cert2)
    return ForcingPair(equal, different)


# --- registry -----------------------------------------------------------


@dataclass(frozen=True)
class RegistryEntry:
    gadget: Graph | Digraph
    edge: tuple[int, int]
    certificate: GadgetCertificate


def grotzsch_graph() -> Graph:
    """Triangle-free 11-vertex graph with chromatic number 4."""
    edges = []
    for i in range(5):
        edges.append((i, (i + 1) % 5))
        edges.append((5 + i, (i + 1) % 5))
        edges.append((5 + i, (i - 1) % 5))
        edges.append((5 + i, 10))
    return Graph(11, edges)


def odd_cycle(length: int) -> Graph:
    return Graph(length, [(i, (i + 1) % length) for i in range(length)])


def complete_graph(n: int) -> Graph:
    return Graph(n, combinations(range(n), 2))


def _certify_registry_entry(
    kind: str,
    g: Graph | Digraph,
    edge: tuple[int, int],
    r: int,
    k: int,
    budget: OracleBudget,
) -> RegistryEntry:
    checks: list[CheckRecord] = []
    directed = isinstance(g, Digraph)
    gi = directed_girth(g) if directed else girth(g)
    if gi is None or gi < k:
        raise RegistryUnavailableError(
            f"gadget girth {gi} is below the required {k}"
        )
    checks.append(CheckRecord("girth", "verified", f"girth {gi} >= {k}"))

    decide = decide_proper_colorable if kind == "proper" else decide_acyclic_colorable
    full = decide(g, r, budget)
    if full.verdict == "yes":
        raise RegistryUnavailableError(f"gadget is {r}-colorable, not a core")
    status = "verified" if full.verdict == "no" else "asserted"
    checks.append(CheckRecord("non-colorable", status, f"verdict {full.verdict}", full.nodes))

    u, v = edge
    reduced = g.delete_arc(u, v) if directed else g.delete_edge(u, v)
    sub = decide(reduced, r, budget)
    if sub.verdict != "yes":
        raise RegistryUnavailableError(
            f"gadget minus edge {edge} is not {r}-colorable (verdict {sub.verdict})"
        )
    checks.append(CheckRecord("critical-edge", "verified", f"edge {edge}", sub.nodes))

    cert = GadgetCertificate(
        kind, gi, r, True, (u, v), full.nodes + sub.nodes, tuple(checks)
    )
    return RegistryEntry(g, edge, cert)


_REGISTRY_CACHE: dict[tuple[str, int, int], RegistryEntry] = {}

REGISTRY_KINDS = ("proper", "acyclic-graph", "acyclic-digraph")


def registry_get(
    kind: str,
    r: int,
    k: int,
    budget: OracleBudget = DEFAULT_BUDGET,
    user_gadget: tuple[Graph | Digraph, tuple[int, int]] | None = None,
) -> RegistryEntry:
    """Fetch an oracle-certified core for the given coloring mode and girth.

    Built-ins: odd cycles for proper 2-coloring, the Grotzsch graph for
    proper 3-coloring up to girth 4, the complete graph K5 for acyclic
    2-coloring at girth 3, and towers for digraphs at every (r, k).  A
    user-supplied gadget is accepted if it passes the same certification.
    Anything else raises: the known existence results for high-girth
    undirected cores are not constructive, so no gadget is improvised.
    """
    if kind not in REGISTRY_KINDS:
        raise RegistryUnavailableError(f"unknown gadget kind {kind!r}")
    if user_gadget is not None:
        g, edge = user_gadget
        return _certify_registry_entry(kind, g, edge, r, k, budget)

    key = (kind, r, k)
    if key in _REGISTRY_CACHE:
        return _REGISTRY_CACHE[key]

    entry: RegistryEntry | None = None
    if kind == "proper":
        if r == 2 and k >= 3:
            length = k if k % 2 == 1 else k + 1
            entry = _certify_registry_entry(kind, odd_cycle(length), (0, 1), r, k, budget)
        elif r == 3 and 3 <= k <= 4:
            entry = _certify_registry_entry(kind, grotzsch_graph(), (0, 1), r, k, budget)
    elif kind == "acyclic-graph":
        if r == 2 and k == 3:
            entry = _certify_registry_entry(kind, complete_graph(5), (0, 1), r, k, budget)
    elif kind == "acyclic-digraph":
        if r >= 1 and k >= 3:
            tower = build_tower(k, r)
            entry = _certify_registry_entry(
                kind, tower.digraph, tower.digraph.arcs[0], r, k, budget
            )
    if entry is None:
        raise RegistryUnavailableError(
            f"no certified gadget for kind={kind}, r={r}, k={k}: the general "
            "high-girth existence results are not constructive; supply a "
            "user gadget to be certified instead"
        )
    _REGISTRY_CACHE[key] = entry
    return entry
