"""Exact graph metrics against fixed values and brute-force oracles."""

import numpy as np
import pytest

from kgbench.errors import DataError
from kgbench.graphs import (
    UndirectedGraph,
    average_clustering,
    avg_neighbor_degree,
    cliques,
    closeness_centrality_mean,
    connectivity,
    degree_assortativity,
    degree_centrality_mean,
    eccentricity_radius_diameter,
    meta_properties,
    profile_graph,
    profile_kg,
)
from kgbench.kg import KnowledgeGraph, ingest_triples, project_graph
from conftest import random_kg
from oracles import (
    oracle_assortativity,
    oracle_avg_neighbor_degree,
    oracle_cliques,
    oracle_closeness_mean,
    oracle_clustering,
    oracle_degree_centrality_mean,
    oracle_ecc_radius_diameter,
    oracle_edge_connectivity,
    oracle_node_connectivity,
    random_connected_graph,
)


def graph_from_adj(adj) -> UndirectedGraph:
    g = UndirectedGraph()
    for v in range(len(adj)):
        g.add_node(v)
        for u in adj[v]:
            g.add_edge(v, u)
    return g


def _path(n):
    g = UndirectedGraph()
    for i in range(n - 1):
        g.add_edge(i, i + 1)
    return g


def _cycle(n):
    g = _path(n)
    g.add_edge(n - 1, 0)
    return g


def _complete(n):
    g = UndirectedGraph()
    for u in range(n):
        for v in range(u + 1, n):
            g.add_edge(u, v)
    return g


def _star(leaves):
    g = UndirectedGraph()
    for i in range(1, leaves + 1):
        g.add_edge(0, i)
    return g


class TestFixedValues:
    def test_triangle(self):
        g = _complete(3)
        assert average_clustering(g) == 1.0
        ecc, radius, diam = eccentricity_radius_diameter(g)
        assert (ecc, radius, diam) == (1.0, 1, 1)
        assert avg_neighbor_degree(g) == 2.0

    def test_p4(self):
        _, radius, diam = eccentricity_radius_diameter(_path(4))
        assert (radius, diam) == (2, 3)
        assert average_clustering(_path(4)) == 0.0

    def test_k5_clustering(self):
        assert average_clustering(_complete(5)) == 1.0

    def test_kn_diameter_one(self):
        for n in (2, 4, 6):
            assert eccentricity_radius_diameter(_complete(n))[2] == 1

    def test_c6(self):
        _, radius, diam = eccentricity_radius_diameter(_cycle(6))
        assert (radius, diam) == (3, 3)

    def test_star_s3_neighbor_degree(self):
        assert avg_neighbor_degree(_star(3)) == pytest.approx(2.5)

    def test_star_assortativity_minus_one(self):
        assert degree_assortativity(_star(3)) == pytest.approx(-1.0)

    def test_regular_graph_assortativity_undefined(self):
        assert degree_assortativity(_cycle(5)) is None
        assert degree_assortativity(_complete(4)) is None

    def test_tree_connectivity(self):
        g = UndirectedGraph()
        for u, v in [(0, 1), (1, 2), (1, 3), (3, 4)]:
            g.add_edge(u, v)
        assert connectivity(g) == (1, 1)

    def test_cycle_c5_connectivity(self):
        assert connectivity(_cycle(5)) == (2, 2)

    def test_k4_connectivity(self):
        assert connectivity(_complete(4)) == (3, 3)

    def test_triangle_plus_pendant_cliques(self):
        g = _complete(3)
        g.add_edge(2, 3)
        stats = cliques(g)
        assert (stats.max_size, stats.count) == (3, 2)

    def test_edgeless_cliques(self):
        g = UndirectedGraph()
        for v in range(6):
            g.add_node(v)
        stats = cliques(g)
        assert (stats.max_size, stats.count) == (1, 6)

    def test_clique_count_cap(self):
        stats = cliques(_complete(6), count_cap=0)
        assert stats.truncated

    def test_disconnected_eccentricity_is_an_error(self):
        g = UndirectedGraph()
        g.add_edge(0, 1)
        g.add_node(5)
        with pytest.raises(DataError, match="disconnected"):
            eccentricity_radius_diameter(g)

    def test_self_loop_degree_counted_once(self):
        g = UndirectedGraph()
        g.add_edge(0, 0)
        g.add_edge(0, 1)
        assert g.degree(0) == 2
        assert g.n_edges == 2
        assert g.neighbors(0) == {1}


class TestOracleSweep:
    def test_all_properties_match_brute_force(self):
        rng = np.random.default_rng(123)
        for trial in range(40):
            n = int(rng.integers(3, 11))
            adj = random_connected_graph(rng, n)
            g = graph_from_adj(adj)

            nbr = avg_neighbor_degree(g)
            assert nbr == pytest.approx(oracle_avg_neighbor_degree(adj), abs=1e-9)

            a_mine = degree_assortativity(g)
            a_oracle = oracle_assortativity(adj)
            if a_oracle is None:
                assert a_mine is None
            else:
                assert a_mine == pytest.approx(a_oracle, abs=1e-9)

            assert average_clustering(g) == pytest.approx(oracle_clustering(adj), abs=1e-9)

            ecc, radius, diam = eccentricity_radius_diameter(g)
            o_ecc, o_radius, o_diam = oracle_ecc_radius_diameter(adj)
            assert ecc == pytest.approx(o_ecc, abs=1e-9)
            assert (radius, diam) == (o_radius, o_diam)
            assert radius <= diam <= 2 * radius

            assert closeness_centrality_mean(g) == pytest.approx(oracle_closeness_mean(adj), abs=1e-9)
            assert degree_centrality_mean(g) == pytest.approx(
                oracle_degree_centrality_mean(adj), abs=1e-9
            )

            ec, nc = connectivity(g)
            assert ec == oracle_edge_connectivity(adj)
            assert nc == oracle_node_connectivity(adj)

            stats = cliques(g)
            assert (stats.max_size, stats.count) == oracle_cliques(adj)


class TestProfile:
    def test_two_identical_components_zero_std(self):
        kg = ingest_triples(
            ["a\tr\tb", "b\tr\tc", "c\tr\ta", "x\tr\ty", "y\tr\tz", "z\tr\tx"], "train"
        )
        prof = profile_graph(project_graph(kg, "uninformed"), "uninformed")
        for key, stat in prof.properties.items():
            if stat is not None:
                assert stat.std == pytest.approx(0.0, abs=1e-12), key

    def test_single_triangle_profile(self):
        kg = ingest_triples(["a\tr\tb", "b\tr\tc", "c\tr\ta"], "train")
        prof = profile_graph(project_graph(kg, "uninformed"), "uninformed")
        p = prof.properties
        assert p["average_degree"].mean == pytest.approx(2.0)
        assert p["average_clustering"].mean == pytest.approx(1.0)
        assert p["diameter"].mean == pytest.approx(1.0)
        assert p["degree_assortativity"] is None  # regular graph
        assert prof.n_components == 1

    def test_aggregation_is_population_statistics(self):
        rng = np.random.default_rng(9)
        kg = random_kg(rng, 40, 3, 50, "train")
        g = project_graph(kg, "uninformed")
        prof = profile_graph(g, "uninformed")
        from kgbench.graphs import connected_components

        comps = connected_components(g)
        diams = [float(eccentricity_radius_diameter(c)[2]) for c in comps]
        stat = prof.properties["diameter"]
        assert stat.mean == pytest.approx(np.mean(diams), abs=1e-12)
        assert stat.std == pytest.approx(np.std(diams), abs=1e-12)

    def test_node_guard_skips_expensive_properties(self):
        kg = ingest_triples(["a\tr\tb", "b\tr\tc", "c\tr\ta"], "train")
        prof = profile_graph(project_graph(kg, "uninformed"), "uninformed", node_guard=2)
        assert prof.properties["edge_connectivity"] is None
        assert any("guard" in note for note in prof.notes)
        # distance metrics still computed
        assert prof.properties["diameter"] is not None

    def test_profile_kg_means_within_component_range(self):
        rng = np.random.default_rng(17)
        kg = random_kg(rng, 60, 4, 70, "train")
        kg.mark_attribute("r0")
        profile = profile_kg(kg)
        g = project_graph(kg, "uninformed")
        from kgbench.graphs import connected_components

        comps = connected_components(g)
        per_comp = [average_clustering(c) for c in comps]
        stat = profile.uninformed.properties["average_clustering"]
        assert min(per_comp) - 1e-12 <= stat.mean <= max(per_comp) + 1e-12


class TestMetaProperties:
    def _attr_kg(self, n_attr, n_rel):
        kg = KnowledgeGraph()
        for i in range(n_attr):
            kg.add_triple(f"x{i}", "has_value", f"v{i}", "train")
        for i in range(n_rel):
            kg.add_triple(f"a{i}", "linked", f"b{i}", "train")
        kg.mark_attribute("has_value")
        return kg

    def test_hepatitis_shaped_edge_reduction(self):
        meta = meta_properties(self._attr_kg(87, 13))
        assert meta.edge_reduction == pytest.approx(0.87)
        assert meta.n_attributes == 1
        assert meta.n_relations == 1

    def test_no_attributes(self):
        kg = ingest_triples(["a\tr\tb", "b\tr\tc"], "train")
        meta = meta_properties(kg)
        assert meta.edge_reduction == 0.0
        assert meta.degree_proportion == 1.0

    def test_degree_proportion_same_node_count(self):
        # 20 uninformed edges, 5 informed, attribute edges between relation nodes
        kg = KnowledgeGraph()
        for i in range(5):
            kg.add_triple(f"a{i}", "linked", f"b{i}", "train")
        k = 0
        for i in range(5):
            for j in range(3):
                kg.add_triple(f"a{i}", "has_value", f"b{(i + j + 1) % 5}", "train")
                k += 1
        assert k == 15
        kg.mark_attribute("has_value")
        meta = meta_properties(kg)
        uninf = project_graph(kg, "uninformed")
        inf = project_graph(kg, "informed")
        assert uninf.n_edges == 20
        assert inf.n_edges == 5
        assert inf.n_nodes == uninf.n_nodes
        assert meta.degree_proportion == pytest.approx(0.25)

    def test_empty_uninformed_graph_is_an_error(self):
        with pytest.raises(DataError):
            meta_properties(KnowledgeGraph())

    def test_informed_node_count_never_exceeds_uninformed(self):
        rng = np.random.default_rng(23)
        kg = random_kg(rng, 30, 4, 50, "train")
        kg.mark_attribute("r2")
        profile = profile_kg(kg)
        assert profile.informed.n_nodes <= profile.uninformed.n_nodes
        assert profile.meta.edge_reduction == pytest.approx(
            1.0 - profile.informed.n_edges / profile.uninformed.n_edges
        )
