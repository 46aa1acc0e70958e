from itertools import product

import pytest

from aclab.gadgets import (
    ConstructionBugError,
    RegistryUnavailableError,
    build_equalizer,
    build_tower,
    complete_graph,
    derive_forcing_gadgets,
    grotzsch_graph,
    nae_to_digraph,
    nae_to_graph,
    odd_cycle,
    pigeonhole_nae,
    registry_get,
    tower_size_bound,
    verify_tower,
)
from aclab.graphs import (
    Coloring,
    Digraph,
    Graph,
    degree_stats,
    directed_girth,
    girth,
    is_valid_acyclic_coloring,
)
from aclab.nae import NaeInstance
from aclab.oracle import (
    decide_acyclic_colorable,
    decide_proper_colorable,
    enumerate_acyclic_colorings,
    make_edge_critical,
    solve_nae,
)


class TestTower:
    def test_base_cases(self):
        assert build_tower(3, 0).digraph.n == 1
        c3 = build_tower(3, 1).digraph
        assert c3.n == 3 and directed_girth(c3) == 3

    def test_frozen_sizes(self):
        # sizes derived from the block recursion by hand:
        # (3,2): two 3-cycles + a singleton; (4,2): three 4-cycles + one;
        # (5,2): four 5-cycles + one; (3,3): one 7-block + two 3-cycles
        assert build_tower(3, 2).digraph.n == 7
        assert build_tower(4, 2).digraph.n == 13
        assert build_tower(5, 2).digraph.n == 21
        assert build_tower(3, 3).digraph.n == 13

    def test_k2_general_size(self):
        for k in range(3, 8):
            assert build_tower(k, 2).digraph.n == k * (k - 1) + 1

    def test_size_bound_over_grid(self):
        for k in (3, 4, 5):
            for r in range(0, 4):
                tower = build_tower(k, r)
                assert tower.digraph.n <= tower_size_bound(k, r)
        assert build_tower(3, 1).digraph.n == 3

    def test_block_recursion_growth(self):
        # one recursion level multiplies the size by at most k
        for k in (3, 4):
            for r in range(2, 5):
                n_r = build_tower(k, r).digraph.n
                inner = max(t.inner_r for t in build_tower(k, r).tags)
                n_inner = build_tower(k, inner).digraph.n
                assert n_r <= k * n_inner

    def test_determinism(self):
        a = build_tower(4, 3).digraph
        b = build_tower(4, 3).digraph
        assert a.arcs == b.arcs

    def test_blocks_partition_and_cross_arcs_complete(self):
        tower = build_tower(3, 2)
        assert sorted(v for block in tower.blocks for v in block) == list(
            range(tower.digraph.n)
        )
        b0, b1 = tower.blocks[0], tower.blocks[1]
        for u in b0:
            for v in b1:
                assert tower.digraph.has_arc(u, v)

    def test_verify_suite_small(self):
        for k, r in [(3, 1), (3, 2), (3, 3)]:
            cert = verify_tower(build_tower(k, r), k, r)
            assert cert.status == "verified"

    def test_verify_rejects_mutation(self):
        tower = build_tower(3, 2)
        g = tower.digraph
        extra = None
        for u in range(g.n):
            for v in range(g.n):
                if u != v and not g.has_arc(u, v):
                    extra = (u, v)
                    break
            if extra:
                break
        from aclab.gadgets import BlockedDigraph

        mutated = BlockedDigraph(
            Digraph(g.n, list(g.arcs) + [extra]), tower.blocks, tower.tags
        )
        with pytest.raises(ConstructionBugError):
            verify_tower(mutated, 3, 2)


class TestEqualizer:
    def test_three_port_shape(self):
        g, apex, ports = build_equalizer(3, 3)
        assert g.n == 7 and apex == 0 and ports == (1, 2, 3)
        stats = degree_stats(g)
        assert stats.max_in_degree <= 4 and stats.max_out_degree <= 4

    def test_forcing_exhaustive(self):
        # every acyclic 2-coloring makes the ports one color, not the apex's
        g, apex, ports = build_equalizer(3, 3)
        found = 0
        for coloring in enumerate_acyclic_colorings(g, 2):
            found += 1
            port_colors = {coloring.colors[p] for p in ports}
            assert len(port_colors) == 1
            assert coloring.colors[apex] not in port_colors
        assert found > 0  # the gadget itself is 2-colorable

    def test_four_layer_forcing(self):
        g, apex, ports = build_equalizer(4, 3)
        assert g.n == 12
        for coloring in enumerate_acyclic_colorings(g, 2):
            port_colors = {coloring.colors[p] for p in ports}
            assert len(port_colors) == 1 and coloring.colors[apex] not in port_colors

    def test_port_count_generalizes(self):
        g, apex, ports = build_equalizer(3, 5)
        assert len(ports) == 5
        stats = degree_stats(g)
        assert max(stats.max_in_degree, stats.max_out_degree) <= max(3, 5) + 1


class TestNaeInstances:
    def test_pigeonhole_shapes(self):
        inst = pigeonhole_nae(2, 3)
        assert inst.n_vars == 5 and inst.m == 10
        inst33 = pigeonhole_nae(3, 3)
        assert inst33.n_vars == 7 and inst33.m == 35
        inst24 = pigeonhole_nae(2, 4)
        assert inst24.n_vars == 7 and inst24.m == 35

    def test_pigeonhole_unsatisfiable_brute(self):
        for inst in (pigeonhole_nae(2, 3), pigeonhole_nae(3, 3), pigeonhole_nae(2, 4)):
            assert not any(
                inst.satisfied_by(a)
                for a in product(range(inst.r), repeat=inst.n_vars)
            )

    def test_single_clause_digraph(self):
        d = nae_to_digraph(NaeInstance(3, 2, 3, ((0, 1, 2),)))
        assert set(d.arcs) == {(0, 1), (1, 2), (2, 0)}

    def test_pigeonhole_digraph_not_two_colorable(self):
        d = nae_to_digraph(pigeonhole_nae(2, 3))
        assert d.n == 5
        assert decide_acyclic_colorable(d, 2).verdict == "no"

    def test_pigeonhole_graph_arboricity_exceeds_two(self):
        g = nae_to_graph(pigeonhole_nae(2, 3))
        assert decide_acyclic_colorable(g, 2).verdict == "no"

    def test_clause_sharing_pairs_can_build_digons(self):
        # the complete pigeonhole instance makes two clauses traverse a
        # shared pair in opposite directions, so digons appear; this is
        # allowed for digraphs and the oracle still refutes coloring
        d = nae_to_digraph(pigeonhole_nae(2, 3))
        assert directed_girth(d) == 2

    def test_digraph_girth_exactly_k_for_disjoint_clauses(self):
        inst = NaeInstance(8, 2, 4, ((0, 1, 2, 3), (4, 5, 6, 7)))
        assert directed_girth(nae_to_digraph(inst)) == 4
        inst3 = NaeInstance(7, 2, 3, ((0, 1, 2), (2, 3, 4), (4, 5, 6)))
        assert directed_girth(nae_to_digraph(inst3)) == 3


class TestForcingGadgets:
    def test_tower_pair_exhaustive(self):
        tower = build_tower(3, 2).digraph
        pair = derive_forcing_gadgets(tower, tower.arcs[0], 2)
        eq, df = pair.equal, pair.different
        # terminals flipped for the equal gadget: (head, tail)
        assert (eq.v, eq.u) == tower.arcs[0]
        for coloring in enumerate_acyclic_colorings(eq.body, 2):
            assert coloring.colors[eq.u] == coloring.colors[eq.v]
        count = 0
        for coloring in enumerate_acyclic_colorings(df.body, 2):
            count += 1
            assert coloring.colors[df.u] != coloring.colors[df.v]
        assert count > 0
        assert df.body.n == 8

    def test_k5_pair_exhaustive(self):
        pair = derive_forcing_gadgets(complete_graph(5), (0, 1), 2)
        for coloring in enumerate_acyclic_colorings(pair.equal.body, 2):
            assert coloring.colors[0] == coloring.colors[1]
        for coloring in enumerate_acyclic_colorings(pair.different.body, 2):
            assert coloring.colors[pair.different.u] != coloring.colors[pair.different.v]

    def test_colorable_core_rejected(self):
        from aclab.oracle import PreconditionError

        with pytest.raises(PreconditionError):
            derive_forcing_gadgets(complete_graph(5), (0, 1), 3)


class TestRegistry:
    def test_proper_two_odd_cycle(self):
        entry = registry_get("proper", 2, 7)
        assert entry.gadget.n == 7
        assert girth(entry.gadget) == 7
        assert decide_proper_colorable(entry.gadget, 2).verdict == "no"
        reduced = entry.gadget.delete_edge(*entry.edge)
        assert decide_proper_colorable(reduced, 2).verdict == "yes"

    def test_proper_even_k_takes_next_odd(self):
        assert registry_get("proper", 2, 4).gadget.n == 5

    def test_grotzsch_entry(self):
        entry = registry_get("proper", 3, 4)
        assert entry.gadget.n == 11
        assert girth(entry.gadget) == 4
        res = make_edge_critical(entry.gadget, 3, proper=True)
        assert res.instance == entry.gadget  # already edge-critical

    def test_acyclic_graph_k5(self):
        entry = registry_get("acyclic-graph", 2, 3)
        assert entry.gadget == complete_graph(5)
        res = make_edge_critical(entry.gadget, 2)
        assert res.deleted == ()

    def test_acyclic_digraph_tower(self):
        entry = registry_get("acyclic-digraph", 2, 5)
        assert entry.gadget.n == 21
        assert directed_girth(entry.gadget) == 5

    def test_unavailable_reports_reason(self):
        with pytest.raises(RegistryUnavailableError, match="not constructive"):
            registry_get("acyclic-graph", 2, 5)
        with pytest.raises(RegistryUnavailableError):
            registry_get("proper", 4, 5)

    def test_user_gadget_accepted(self):
        entry = registry_get("proper", 2, 3, user_gadget=(odd_cycle(5), (0, 1)))
        assert entry.gadget.n == 5

    def test_user_gadget_rejected_with_property(self):
        # an even cycle is 2-colorable, so it cannot serve as a core
        with pytest.raises(RegistryUnavailableError, match="colorable"):
            registry_get("proper", 2, 3, user_gadget=(odd_cycle(6), (0, 1)))

    def test_grotzsch_shape(self):
        g = grotzsch_graph()
        assert g.n == 11 and g.m == 20
        assert girth(g) == 4
