"""Hardness-reduction pipelines with emit-time verification.

Every pipeline emits a ReductionOutput carrying the instance, a total
provenance map, and the claimed girth/degree bounds.  The claimed bounds
are checked against the actual instance at emit time; the informal
"every cycle passes through a gadget" arguments become runtime checks.

Gadget copies are instantiated fresh per edge, and terminals are merged
with existing vertices, so girth reasoning stays local to each copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .gadgets import (
    ConstructionBugError,
    FORCES_EQUAL,
    ForcingGadget,
    ForcingPair,
    build_equalizer,
    derive_forcing_gadgets,
    registry_get,
)
from .graphs import (
    Coloring,
    Digraph,
    Graph,
    degree_stats,
    directed_girth,
    girth,
    is_valid_acyclic_coloring,
)
from .nae import NaeInstance
from .oracle import DEFAULT_BUDGET, OracleBudget, decide_proper_colorable

PIPELINES = (
    "girth-color",
    "nae-graph",
    "color-acyclic-graph",
    "color-acyclic-digraph",
    "nae-digraph",
)

SourceCertificate = Union[Coloring, tuple]


class LiftError(RuntimeError):
    """The given source certificate does not extend to the output instance."""


@dataclass(frozen=True)
class CopyRecord:
    """One instantiated gadget copy: body vertex i sits at output vertex vmap[i]."""

    body: Graph | Digraph
    term_u: int
    term_v: int
    forces: str
    witness: tuple[int, ...] | None
    vmap: tuple[int, ...]


@dataclass
class ReductionOutput:
    """Instance plus provenance and verified girth/degree claims."""

    pipeline: str
    instance: Graph | Digraph
    provenance: dict[int, tuple]
    girth_bound: int
    degree_bound: int
    r: int
    # lift machinery (construction records, not part of the wire format)
    copies: list[CopyRecord] = field(default_factory=list)
    representative: dict[int, int] = field(default_factory=dict)
    skeleton_color: dict[int, tuple] = field(default_factory=dict)
    source: object = None

    def provenance_json(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "r": self.r,
            "girth_bound": self.girth_bound,
            "degree_bound": self.degree_bound,
            "vertices": {str(v): list(rec) for v, rec in sorted(self.provenance.items())},
        }


def _verify_emit(out: ReductionOutput) -> None:
    inst = out.instance
    if set(out.provenance) != set(range(inst.n)):
        raise ConstructionBugError("provenance map is not total over the output")
    g = directed_girth(inst) if isinstance(inst, Digraph) else girth(inst)
    if g is not None and g < out.girth_bound:
        raise ConstructionBugError(
            f"{out.pipeline}: girth {g} below the claimed bound {out.girth_bound}"
        )
    stats = degree_stats(inst)
    actual = (
        max(stats.max_in_degree, stats.max_out_degree)
        if isinstance(inst, Digraph)
        else stats.max_degree
    )
    if actual > out.degree_bound:
        raise ConstructionBugError(
            f"{out.pipeline}: degree {actual} above the claimed bound {out.degree_bound}"
        )


class _Builder:
    """Incremental instance builder with gadget-copy instantiation."""

    def __init__(self, directed: bool):
        self.directed = directed
        self.n = 0
        self.links: list[tuple[int, int]] = []
        self.provenance: dict[int, tuple] = {}

    def fresh(self, record: tuple) -> int:
        v = self.n
        self.n += 1
        self.provenance[v] = record
        return v

    def link(self, u: int, v: int) -> None:
        self.links.append((u, v))

    def instantiate(
        self,
        gadget: ForcingGadget,
        at_u: int,
        at_v: int,
        copy_id: int,
    ) -> CopyRecord:
        """Copy the gadget body, merging its terminals into at_u/at_v."""
        body = gadget.body
        vmap = [-1] * body.n
        vmap[gadget.u] = at_u
        vmap[gadget.v] = at_v
        for x in range(body.n):
            if vmap[x] < 0:
                vmap[x] = self.fresh(("gadget", copy_id, x))
        records = body.arcs if isinstance(body, Digraph) else body.edges
        for a, b in records:
            self.link(vmap[a], vmap[b])
        witness = gadget.witness.colors if gadget.witness is not None else None
        return CopyRecord(body, gadget.u, gadget.v, gadget.forces, witness, tuple(vmap))

    def build(self) -> Graph | Digraph:
        return Digraph(self.n, self.links) if self.directed else Graph(self.n, self.links)


def _balanced_tree(leaf_count: int) -> tuple[int, list[tuple[int, int]], list[int]]:
    """Balanced binary tree with the given number of leaves; root is node 0.

    Returns (node count, parent->child edges, leaf ids left to right).
    """
    if leaf_count <= 1:
        return 1, [], [0]
    edges: list[tuple[int, int]] = []
    leaves: list[int] = []
    counter = [1]

    def expand(node: int, count: int) -> None:
        if count == 1:
            leaves.append(node)
            return
        left, right = counter[0], counter[0] + 1
        counter[0] += 2
        edges.append((node, left))
        edges.append((node, right))
        expand(left, (count + 1) // 2)
        expand(right, count // 2)

    expand(0, leaf_count)
    return counter[0], edges, leaves


@dataclass
class _Split:
    builder: _Builder
    root: list[int]
    tree_edges: list[tuple[int, int]]  # output ids, parent -> child
    leaf_for: dict[tuple[int, int], int]  # (x, neighbor y) -> output leaf id


def _split_vertices(g: Graph, builder: _Builder) -> _Split:
    roots: list[int] = []
    tree_edges: list[tuple[int, int]] = []
    leaf_for: dict[tuple[int, int], int] = {}
    for x in range(g.n):
        neighbors = sorted(
            v for v in range(g.n) if (g.adj[x] >> v) & 1
        )
        count, edges, leaves = _balanced_tree(len(neighbors))
        ids = [builder.fresh(("tree", x, i)) for i in range(count)]
        roots.append(ids[0])
        for p, c in edges:
            tree_edges.append((ids[p], ids[c]))
        for idx, y in enumerate(neighbors):
            leaf_for[(x, y)] = ids[leaves[idx]]
    return _Split(builder, roots, tree_edges, leaf_for)


def split_binary_tree(g: Graph, directed: bool = False) -> ReductionOutput:
    """Replace each vertex by a balanced binary tree with one leaf per edge.

    Each original edge xy is rewired between the leaf of x's tree reserved
    for y and vice versa; output degree is at most 3.  With
    ``directed=True`` trees are rooted at a non-leaf where possible and
    oriented away from the root, and original edges run low id -> high id.
    """
    builder = _Builder(directed)
    split = _split_vertices(g, builder)
    for p, c in split.tree_edges:
        builder.link(p, c)
    for x, y in g.edges:
        builder.link(split.leaf_for[(x, y)], split.leaf_for[(y, x)])
    out = ReductionOutput(
        pipeline="split-binary-tree",
        instance=builder.build(),
        provenance=builder.provenance,
        girth_bound=1,
        degree_bound=3,
        r=0,
        representative={x: split.root[x] for x in range(g.n)},
        source=g,
    )
    _verify_emit(out)
    return out


def _tree_skeleton(out: ReductionOutput, split: _Split, g: Graph) -> None:
    for x in range(g.n):
        out.representative[x] = split.root[x]
    for v, rec in out.provenance.items():
        if rec[0] == "tree":
            out.skeleton_color[v] = ("vertex", rec[1])


def reduce_coloring_girth(
    g: Graph, r: int, k: int, budget: OracleBudget = DEFAULT_BUDGET
) -> ReductionOutput:
    """Proper r-colorability preserved while girth rises to at least k.

    Vertices split into binary trees; every tree edge becomes a copy of
    the registry core minus its critical edge, which forces its endpoints
    to one color in every proper r-coloring.
    """
    entry = registry_get("proper", r, k, budget)
    core, (cu, cv) = entry.gadget, entry.edge
    body = core.delete_edge(cu, cv)
    wit = decide_proper_colorable(body, r, budget)
    if wit.verdict != "yes":
        raise ConstructionBugError("registry core minus its edge is not colorable")
    gadget = ForcingGadget(body, cu, cv, FORCES_EQUAL, wit.witness, entry.certificate)

    builder = _Builder(directed=False)
    split = _split_vertices(g, builder)
    out = ReductionOutput(
        pipeline="girth-color",
        instance=None,  # filled below
        provenance=builder.provenance,
        girth_bound=k,
        degree_bound=max(3 * degree_stats(body).max_degree, 1),
        r=r,
        source=g,
    )
    for copy_id, (p, c) in enumerate(split.tree_edges):
        out.copies.append(builder.instantiate(gadget, p, c, copy_id))
    for x, y in g.edges:
        builder.link(split.leaf_for[(x, y)], split.leaf_for[(y, x)])
    out.instance = builder.build()
    _tree_skeleton(out, split, g)
    _verify_emit(out)
    return out


def reduce_coloring_to_acyclic_graph(
    g: Graph, r: int, k: int, budget: OracleBudget = DEFAULT_BUDGET
) -> ReductionOutput:
    """Proper r-coloring of g becomes acyclic r-coloring at girth >= k.

    Tree edges carry equal-forcing copies, original edges carry
    different-forcing copies, so color classes mimic proper classes.
    """
    entry = registry_get("acyclic-graph", r, k, budget)
    pair = derive_forcing_gadgets(entry.gadget, entry.edge, r, budget)
    return _tree_pair_reduction(
        "color-acyclic-graph", g, r, k, pair, directed=False
    )


def reduce_coloring_to_acyclic_digraph(
    g: Graph, r: int, k: int, budget: OracleBudget = DEFAULT_BUDGET
) -> ReductionOutput:
    """Digraph analogue: oriented trees, tower-derived forcing gadgets."""
    entry = registry_get("acyclic-digraph", r, k, budget)
    pair = derive_forcing_gadgets(entry.gadget, entry.edge, r, budget)
    return _tree_pair_reduction(
        "color-acyclic-digraph", g, r, k, pair, directed=True
    )


def _tree_pair_reduction(
    pipeline: str, g: Graph, r: int, k: int, pair: ForcingPair, directed: bool
) -> ReductionOutput:
    builder = _Builder(directed)
    split = _split_vertices(g, builder)
    eq_stats = degree_stats(pair.equal.body)
    df_stats = degree_stats(pair.different.body)
    if directed:
        term_deg = max(
            max(pair.equal.body.in_degree(t), pair.equal.body.out_degree(t))
            for t in (pair.equal.u, pair.equal.v)
        )
        term_deg = max(
            term_deg,
            max(
                max(pair.different.body.in_degree(t), pair.different.body.out_degree(t))
                for t in (pair.different.u, pair.different.v)
            ),
        )
        internal = max(
            max(eq_stats.max_in_degree, eq_stats.max_out_degree),
            max(df_stats.max_in_degree, df_stats.max_out_degree),
        )
    else:
        term_deg = max(
            pair.equal.body.degree(pair.equal.u),
            pair.equal.body.degree(pair.equal.v),
            pair.different.body.degree(pair.different.u),
            pair.different.body.degree(pair.different.v),
        )
        internal = max(eq_stats.max_degree, df_stats.max_degree)
    out = ReductionOutput(
        pipeline=pipeline,
        instance=None,
        provenance=builder.provenance,
        girth_bound=k,
        degree_bound=max(3 * term_deg, internal),
        r=r,
        source=g,
    )
    copy_id = 0
    for p, c in split.tree_edges:
        out.copies.append(builder.instantiate(pair.equal, p, c, copy_id))
        copy_id += 1
    for x, y in g.edges:
        out.copies.append(
            builder.instantiate(
                pair.different, split.leaf_for[(x, y)], split.leaf_for[(y, x)], copy_id
            )
        )
        copy_id += 1
    out.instance = builder.build()
    _tree_skeleton(out, split, g)
    _verify_emit(out)
    return out


def reduce_nae_to_acyclic2_graph(
    inst: NaeInstance, k: int, budget: OracleBudget = DEFAULT_BUDGET
) -> ReductionOutput:
    """Binary NAE instance into acyclic 2-colorability of a girth >= k graph.

    Each clause becomes a k-cycle of occurrence vertices.  Consecutive
    occurrences of a variable are bound by two different-forcing copies
    in series through a fresh midpoint: with two colors, two inequalities
    force equality.  A single equal-forcing copy per occurrence would not
    work: every witness of such a gadget carries a monochromatic path
    between its terminals (otherwise re-adding the critical edge would
    color the core), and instances whose clauses form short co-occurrence
    cycles then admit no lift at all, with the output genuinely
    uncolorable.  Midpoints take the opposite color, so no monochromatic
    route crosses a copy and every satisfying assignment extends.
    """
    if inst.r != 2:
        raise ValueError("this pipeline handles binary instances only")
    if inst.k != k:
        raise ValueError(f"instance clause width {inst.k} does not match k={k}")
    entry = registry_get("acyclic-graph", 2, k, budget)
    pair = derive_forcing_gadgets(entry.gadget, entry.edge, 2, budget)
    gadget = pair.different

    builder = _Builder(directed=False)
    occ_ids: dict[tuple[int, int], int] = {}
    for ci, clause in enumerate(inst.clauses):
        ids = [builder.fresh(("clause", ci, pos)) for pos in range(len(clause))]
        for pos in range(len(clause)):
            builder.link(ids[pos], ids[(pos + 1) % len(clause)])
        for pos in range(len(clause)):
            occ_ids[(ci, pos)] = ids[pos]

    occurrences: dict[int, list[int]] = {x: [] for x in range(inst.n_vars)}
    for ci, clause in enumerate(inst.clauses):
        for pos, x in enumerate(clause):
            occurrences[x].append(occ_ids[(ci, pos)])

    out = ReductionOutput(
        pipeline="nae-graph",
        instance=None,
        provenance=builder.provenance,
        girth_bound=k,
        degree_bound=1,
        r=2,
        source=inst,
    )
    copy_id = 0
    max_t = 1
    for x in range(inst.n_vars):
        occ = occurrences[x]
        max_t = max(max_t, len(occ))
        for i in range(len(occ) - 1):
            midpoint = builder.fresh(("variable", x, i))
            out.skeleton_color[midpoint] = ("opposite", x)
            out.copies.append(builder.instantiate(gadget, occ[i], midpoint, copy_id))
            out.copies.append(builder.instantiate(gadget, occ[i + 1], midpoint, copy_id + 1))
            copy_id += 2
    deg_u = gadget.body.degree(gadget.u)
    deg_v = gadget.body.degree(gadget.v)
    out.degree_bound = max(
        2 + 2 * deg_u, 2 * deg_v, degree_stats(gadget.body).max_degree, 2
    )
    for ci, clause in enumerate(inst.clauses):
        for pos, x in enumerate(clause):
            out.skeleton_color[occ_ids[(ci, pos)]] = ("value", x)
    out.representative = {
        x: (occurrences[x][0] if occurrences[x] else -1) for x in range(inst.n_vars)
    }
    out.instance = builder.build()
    _verify_emit(out)
    return out


def reduce_nae_to_acyclic2_digraph(inst: NaeInstance, k: int) -> ReductionOutput:
    """Binary NAE into acyclic 2-colorability of a digraph with girth >= k.

    Clause k-cycles are directed; each variable's occurrences become the
    ports of an equalizer gadget sized to its occurrence count, so all of
    them agree in every acyclic 2-coloring.  In/out degrees stay within
    max(k, occurrences) + 1.
    """
    if inst.r != 2:
        raise ValueError("this pipeline handles binary instances only")
    if inst.k != k:
        raise ValueError(f"instance clause width {inst.k} does not match k={k}")

    builder = _Builder(directed=True)
    occ_ids: dict[tuple[int, int], int] = {}
    for ci, clause in enumerate(inst.clauses):
        ids = [builder.fresh(("clause", ci, pos)) for pos in range(len(clause))]
        for pos in range(len(clause)):
            builder.link(ids[pos], ids[(pos + 1) % len(clause)])
            occ_ids[(ci, pos)] = ids[pos]

    occurrences: dict[int, list[int]] = {x: [] for x in range(inst.n_vars)}
    for ci, clause in enumerate(inst.clauses):
        for pos, x in enumerate(clause):
            occurrences[x].append(occ_ids[(ci, pos)])

    out = ReductionOutput(
        pipeline="nae-digraph",
        instance=None,
        provenance=builder.provenance,
        girth_bound=k,
        degree_bound=k + 1,
        r=2,
        source=inst,
    )
    max_t = 1
    for x in range(inst.n_vars):
        occ = occurrences[x]
        if not occ:
            continue
        t = len(occ)
        max_t = max(max_t, t)
        body, apex, ports = build_equalizer(k, t)
        vmap = [-1] * body.n
        vmap[apex] = builder.fresh(("variable", x, -1))
        for i, port in enumerate(ports):
            vmap[port] = occ[i]
        for v in range(body.n):
            if vmap[v] < 0:
                vmap[v] = builder.fresh(("variable", x, v))
        for a, b in body.arcs:
            builder.link(vmap[a], vmap[b])
        wit = _equalizer_witness(k, t, port_color=1)
        out.copies.append(
            CopyRecord(body, ports[0], apex, "equalizer", wit, tuple(vmap))
        )
    out.degree_bound = max(k, max_t) + 1
    for ci, clause in enumerate(inst.clauses):
        for pos, x in enumerate(clause):
            out.skeleton_color[occ_ids[(ci, pos)]] = ("value", x)
    out.representative = {
        x: (occurrences[x][0] if occurrences[x] else -1) for x in range(inst.n_vars)
    }
    out.instance = builder.build()
    _verify_emit(out)
    return out


def _equalizer_witness(k: int, t: int, port_color: int) -> tuple[int, ...]:
    """Acyclic 2-coloring of the equalizer body with the ports at port_color.

    The apex takes the other color and every inner k-cycle mixes colors,
    so the apex color misses the port layer and vice versa: no layer-ring
    cycle can be monochromatic.
    """
    apex = 1 - port_color
    colors = [apex] + [port_color] * t
    for _ in range(k - 2):
        colors += [apex] + [port_color] * (k - 1)
    return tuple(colors)


# --- certificate transport ------------------------------------------------


def _color_permutation(
    wit_colors: tuple[int, ...], term_pairs: list[tuple[int, int]], r: int
) -> dict[int, int]:
    """Permutation of colors sending each witness terminal color to its target."""
    mapping: dict[int, int] = {}
    used_targets: set[int] = set()
    for wit_c, target in term_pairs:
        if wit_c in mapping:
            if mapping[wit_c] != target:
                raise LiftError("witness cannot meet the requested terminal colors")
        elif target in used_targets:
            raise LiftError("two witness colors need the same target color")
        else:
            mapping[wit_c] = target
            used_targets.add(target)
    free_targets = [c for c in range(r) if c not in used_targets]
    for c in range(r):
        if c not in mapping:
            mapping[c] = free_targets.pop(0)
    return mapping


def lift_solution(out: ReductionOutput, certificate: SourceCertificate) -> Coloring:
    """Extend a source certificate through trees and gadget witnesses.

    The result always passes the polynomial validity check before being
    returned; if it cannot, the certificate is incompatible with the
    gadget forcing structure (possible for some NAE witnesses on shared
    clause pairs) and a LiftError is raised.
    """
    inst = out.instance
    colors = [-1] * inst.n
    if out.pipeline in ("girth-color", "color-acyclic-graph", "color-acyclic-digraph"):
        src: Graph = out.source
        if not isinstance(certificate, Coloring):
            raise LiftError("these pipelines lift proper colorings")
        if certificate.r != out.r:
            raise LiftError(f"certificate uses {certificate.r} colors, output targets {out.r}")
        certificate.check_against(src.n)
        for uv in src.edges:
            if certificate.colors[uv[0]] == certificate.colors[uv[1]]:
                raise LiftError(f"certificate is not a proper coloring at {uv}")
        value = dict(enumerate(certificate.colors))
        r = out.r
    elif out.pipeline in ("nae-graph", "nae-digraph"):
        src: NaeInstance = out.source
        if not isinstance(certificate, tuple):
            raise LiftError("NAE pipelines lift assignment tuples")
        if not src.satisfied_by(certificate):
            raise LiftError("certificate does not satisfy the source instance")
        value = dict(enumerate(certificate))
        r = 2
    else:
        raise LiftError(f"pipeline {out.pipeline} does not support lifting")

    for v, (tag, x) in out.skeleton_color.items():
        colors[v] = (1 - value[x]) if tag == "opposite" else value[x]

    for copy in out.copies:
        if copy.forces == "equalizer":
            base = copy.witness
            port_color = colors[copy.vmap[copy.term_u]]
            mapping = {base[copy.term_u]: port_color, base[copy.term_v]: 1 - port_color}
            for body_v, out_v in enumerate(copy.vmap):
                c = mapping[base[body_v]]
                if colors[out_v] >= 0 and colors[out_v] != c:
                    raise LiftError("equalizer ports disagree with clause colors")
                colors[out_v] = c
            continue
        if copy.witness is None:
            raise LiftError("gadget copy has no witness coloring; nothing can lift")
        at_u = copy.vmap[copy.term_u]
        at_v = copy.vmap[copy.term_v]
        cu, cv = colors[at_u], colors[at_v]
        if cu < 0 or cv < 0:
            raise LiftError("gadget terminal missing a skeleton color")
        pairs = [(copy.witness[copy.term_u], cu), (copy.witness[copy.term_v], cv)]
        mapping = _color_permutation(copy.witness, pairs, r)
        for body_v, out_v in enumerate(copy.vmap):
            c = mapping[copy.witness[body_v]]
            if colors[out_v] >= 0 and colors[out_v] != c:
                raise LiftError("conflicting gadget colorings at a shared vertex")
            colors[out_v] = c

    if any(c < 0 for c in colors):
        raise LiftError("lift left vertices uncolored; construction bug")
    result = Coloring(tuple(colors), r)
    if out.pipeline == "girth-color":
        for u, v in inst.edges:
            if colors[u] == colors[v]:
                raise LiftError("lifted coloring is not proper; construction bug")
    elif not is_valid_acyclic_coloring(inst, result):
        raise LiftError(
            "lifted coloring is not acyclic; the certificate is incompatible "
            "with the gadget forcing structure"
        )
    return result


def pull_back(out: ReductionOutput, coloring: Coloring) -> SourceCertificate:
    """Read the designated terminal vertices back into a source certificate."""
    inst = out.instance
    coloring.check_against(inst.n)
    if out.pipeline == "girth-color":
        for u, v in inst.edges:
            if coloring.colors[u] == coloring.colors[v]:
                raise LiftError("output coloring is not proper")
    elif not is_valid_acyclic_coloring(inst, coloring):
        raise LiftError("output coloring is not a valid acyclic coloring")

    if out.pipeline in ("girth-color", "color-acyclic-graph", "color-acyclic-digraph"):
        src: Graph = out.source
        colors = tuple(coloring.colors[out.representative[x]] for x in range(src.n))
        result = Coloring(colors, out.r)
        for u, v in src.edges:
            if colors[u] == colors[v]:
                raise LiftError("pulled-back coloring is not proper; forcing violated")
        return result
    if out.pipeline in ("nae-graph", "nae-digraph"):
        src: NaeInstance = out.source
        assignment = tuple(
            coloring.colors[out.representative[x]] if out.representative[x] >= 0 else 0
            for x in range(src.n_vars)
        )
        if not src.satisfied_by(assignment):
            raise LiftError("pulled-back assignment violates the source instance")
        return assignment
    raise LiftError(f"pipeline {out.pipeline} does not support pull-back")
