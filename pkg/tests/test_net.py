import json
import math
from itertools import combinations

import numpy as np
import pytest

from cascade_logic import (Network, NetworkFormatError, NodeSpec, Rule,
                           UNIFORM, assign_thresholds, generate_er,
                           load_bundle, load_network, save_network, stats)
from cascade_logic.net import _pair_from_linear


def path_network(n, rule=Rule.MONOTONE, phi=0.5, seeds=(), directed=False):
    nodes = tuple(NodeSpec(i, rule, phi) for i in range(n))
    edges = tuple((i, i + 1) for i in range(n - 1))
    return Network(nodes=nodes, directed=directed, edges=edges,
                   seeds=frozenset(seeds))


class TestGenerateEr:
    def test_n2_p1_forces_one_edge(self):
        assert len(generate_er(2, 1.0, 0).edges) == 1

    def test_n3_p0_has_no_edges(self):
        assert len(generate_er(3, 0.0, 0).edges) == 0

    def test_complete_graph_at_p1(self):
        net = generate_er(17, 1.0, 5)
        assert len(net.edges) == 17 * 16 // 2

    def test_edge_count_within_3_sigma(self):
        # binomial over m = n(n-1)/2 pairs: mean = m*p, var = m*p*(1-p)
        n, p = 10000, 5 / 9999
        m = n * (n - 1) // 2
        mean = m * p
        sigma = math.sqrt(m * p * (1 - p))
        count = len(generate_er(n, p, 20210).edges)
        assert abs(count - mean) <= 3 * sigma

    def test_reproducible_and_seed_sensitive(self):
        a = generate_er(60, 0.1, 9)
        b = generate_er(60, 0.1, 9)
        c = generate_er(60, 0.1, 10)
        assert a.edges == b.edges
        assert a.edges != c.edges

    def test_mean_edge_count_over_100_seeds(self):
        n, p = 200, 0.02
        expected = n * (n - 1) / 2 * p
        counts = [len(generate_er(n, p, s).edges) for s in range(100)]
        assert abs(np.mean(counts) - expected) <= 0.05 * expected

    def test_degree_sum_is_twice_edge_count(self):
        net = generate_er(123, 0.05, 3)
        assert sum(net.in_degrees) == 2 * len(net.edges)

    def test_simple_graph_invariants(self):
        net = generate_er(80, 0.2, 11)
        assert all(u < v for u, v in net.edges)
        assert len(set(net.edges)) == len(net.edges)

    def test_fresh_network_is_unassigned(self):
        assert not generate_er(5, 0.5, 0).thresholds_assigned

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_invalid_p(self, p):
        with pytest.raises(ValueError):
            generate_er(10, p, 0)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            generate_er(0, 0.5, 0)


class TestPairIndexing:
    @pytest.mark.parametrize("n", [2, 3, 7, 30, 81])
    def test_matches_lexicographic_enumeration(self, n):
        m = n * (n - 1) // 2
        us, vs = _pair_from_linear(np.arange(m, dtype=np.int64), n)
        assert list(zip(us.tolist(), vs.tolist())) == list(combinations(range(n), 2))

    def test_large_n_round_trip(self):
        n = 10000
        m = n * (n - 1) // 2
        idx = np.array([0, 1, n - 2, n - 1, m // 3, m // 2, m - 2, m - 1], dtype=np.int64)
        us, vs = _pair_from_linear(idx, n)
        back = us * (2 * n - us - 1) // 2 + (vs - us - 1)
        assert np.array_equal(back, idx)
        assert np.all(us < vs)
        assert np.all(vs < n)


class TestAssignThresholds:
    def test_constant_applies_everywhere(self):
        net = assign_thresholds(generate_er(50, 0.1, 1), 0.18, Rule.MONOTONE)
        assert all(spec.phi == 0.18 for spec in net.nodes)
        assert all(spec.rule is Rule.MONOTONE for spec in net.nodes)
        assert net.thresholds_assigned

    def test_uniform_is_deterministic_per_seed(self):
        base = generate_er(40, 0.1, 1)
        a = assign_thresholds(base, UNIFORM, Rule.ANTAGONISTIC, rng_seed=5)
        b = assign_thresholds(base, UNIFORM, Rule.ANTAGONISTIC, rng_seed=5)
        c = assign_thresholds(base, UNIFORM, Rule.ANTAGONISTIC, rng_seed=6)
        assert [s.phi for s in a.nodes] == [s.phi for s in b.nodes]
        assert [s.phi for s in a.nodes] != [s.phi for s in c.nodes]

    def test_uniform_mean_concentrates(self):
        # mean of 1e5 U[0,1) draws; sd of the mean is ~0.0009
        net = assign_thresholds(generate_er(100_000, 0.0, 0), UNIFORM,
                                Rule.MONOTONE, rng_seed=123)
        mean = np.mean([s.phi for s in net.nodes])
        assert 0.49 <= mean <= 0.51

    def test_uniform_values_in_range(self):
        net = assign_thresholds(generate_er(500, 0.0, 0), UNIFORM,
                                Rule.MONOTONE, rng_seed=77)
        assert all(0 <= s.phi < 1 for s in net.nodes)

    def test_uniform_requires_seed(self):
        with pytest.raises(ValueError, match="rng_seed"):
            assign_thresholds(generate_er(5, 0.0, 0), UNIFORM, Rule.MONOTONE)

    @pytest.mark.parametrize("phi", [-0.2, 1.001])
    def test_constant_out_of_range(self, phi):
        with pytest.raises(ValueError):
            assign_thresholds(generate_er(5, 0.0, 0), phi, Rule.MONOTONE)

    def test_original_is_untouched(self):
        base = generate_er(10, 0.3, 2)
        assign_thresholds(base, 0.3, Rule.MONOTONE)
        assert all(s.phi == 0.0 for s in base.nodes)
        assert not base.thresholds_assigned


class TestStats:
    def test_triangle(self):
        nodes = tuple(NodeSpec(i, Rule.MONOTONE, 0.5) for i in range(3))
        tri = Network(nodes=nodes, directed=False, edges=((0, 1), (0, 2), (1, 2)))
        result = stats(tri)
        assert result.clustering_coefficient == 1.0
        assert result.mean_degree == 2.0
        assert result.edge_count == 3

    def test_star_has_no_triangles(self):
        nodes = tuple(NodeSpec(i, Rule.MONOTONE, 0.5) for i in range(5))
        star = Network(nodes=nodes, directed=False,
                       edges=tuple((0, i) for i in range(1, 5)))
        assert stats(star).clustering_coefficient == 0.0

    def test_er_clustering_tracks_z_over_n(self):
        # ER expectation is z/(n-1); allow a factor-2 band on the 20-seed mean
        n, z = 1000, 5.0
        expected = z / (n - 1)
        values = []
        for seed in range(20):
            net = generate_er(n, z / (n - 1), seed)
            values.append(stats(net).clustering_coefficient)
        mean = np.mean(values)
        assert 0.5 * expected <= mean <= 2 * expected

    def test_mean_degree_identity(self):
        net = generate_er(300, 0.02, 8)
        result = stats(net)
        assert result.mean_degree == 2 * result.edge_count / result.n

    def test_directed_rejected(self):
        with pytest.raises(ValueError, match="undirected"):
            stats(path_network(3, directed=True))


class TestNetworkValidation:
    def test_self_loop_rejected(self):
        nodes = tuple(NodeSpec(i, Rule.MONOTONE, 0.5) for i in range(2))
        with pytest.raises(ValueError, match="self-loop"):
            Network(nodes=nodes, directed=False, edges=((0, 0),))

    def test_duplicate_edge_rejected_after_normalization(self):
        nodes = tuple(NodeSpec(i, Rule.MONOTONE, 0.5) for i in range(3))
        with pytest.raises(ValueError, match="duplicate"):
            Network(nodes=nodes, directed=False, edges=((0, 1), (1, 0)))

    def test_directed_antiparallel_pair_allowed(self):
        nodes = tuple(NodeSpec(i, Rule.MONOTONE, 0.5) for i in range(2))
        net = Network(nodes=nodes, directed=True, edges=((0, 1), (1, 0)))
        assert len(net.edges) == 2

    def test_undirected_edges_normalized(self):
        nodes = tuple(NodeSpec(i, Rule.MONOTONE, 0.5) for i in range(3))
        net = Network(nodes=nodes, directed=False, edges=((2, 0),))
        assert net.edges == ((0, 2),)

    def test_dense_ids_required(self):
        with pytest.raises(ValueError, match="dense"):
            Network(nodes=(NodeSpec(1, Rule.MONOTONE, 0.5),), directed=False, edges=())

    def test_bad_seed_rejected(self):
        nodes = (NodeSpec(0, Rule.MONOTONE, 0.5),)
        with pytest.raises(ValueError, match="seed"):
            Network(nodes=nodes, directed=False, edges=(), seeds=frozenset({3}))

    def test_empty_network_rejected(self):
        with pytest.raises(ValueError, match="at least one node"):
            Network(nodes=(), directed=False, edges=())

    def test_phi_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="phi"):
            NodeSpec(0, Rule.MONOTONE, 1.25)


class TestSerialization:
    def test_round_trip_identity(self, tmp_path):
        net = assign_thresholds(generate_er(40, 0.15, 3), UNIFORM,
                                Rule.ANTAGONISTIC, rng_seed=4)
        net = Network(nodes=net.nodes, directed=False, edges=net.edges,
                      seeds=frozenset({1, 5}))
        target = tmp_path / "net.json"
        save_network(net, target)
        assert load_network(target) == net

    def test_round_trip_preserves_phi_exactly(self, tmp_path):
        net = assign_thresholds(generate_er(25, 0.2, 1), UNIFORM,
                                Rule.MONOTONE, rng_seed=9)
        target = tmp_path / "net.json"
        save_network(net, target)
        loaded = load_network(target)
        assert [s.phi for s in loaded.nodes] == [s.phi for s in net.nodes]

    def test_round_trip_directed_with_ports(self, tmp_path):
        net = path_network(3, directed=True)
        target = tmp_path / "net.json"
        save_network(net, target, inputs={"a": 0}, outputs={"out": 2})
        bundle = load_bundle(target)
        assert bundle.network == net
        assert bundle.inputs == {"a": 0}
        assert bundle.outputs == {"out": 2}

    def test_duplicate_edge_file_rejected(self, tmp_path):
        doc = {"directed": False,
               "nodes": [{"id": 0, "rule": "gcm", "phi": 0.5},
                         {"id": 1, "rule": "gcm", "phi": 0.5}],
               "edges": [[0, 1], [1, 0]], "seeds": []}
        target = tmp_path / "dup.json"
        target.write_text(json.dumps(doc))
        with pytest.raises(NetworkFormatError, match="duplicate"):
            load_network(target)

    def test_phi_out_of_range_file_rejected(self, tmp_path):
        doc = {"directed": False,
               "nodes": [{"id": 0, "rule": "gcm", "phi": 1.25}],
               "edges": [], "seeds": []}
        target = tmp_path / "phi.json"
        target.write_text(json.dumps(doc))
        with pytest.raises(NetworkFormatError, match=r"nodes\[0\].phi"):
            load_network(target)

    def test_unknown_rule_rejected(self, tmp_path):
        doc = {"directed": False,
               "nodes": [{"id": 0, "rule": "sir", "phi": 0.5}],
               "edges": [], "seeds": []}
        target = tmp_path / "rule.json"
        target.write_text(json.dumps(doc))
        with pytest.raises(NetworkFormatError, match="unknown rule"):
            load_network(target)

    def test_json_syntax_error_reports_line(self, tmp_path):
        target = tmp_path / "broken.json"
        target.write_text('{"directed": false,\n "nodes": [}')
        with pytest.raises(NetworkFormatError, match="line 2"):
            load_network(target)

    def test_missing_key_reported(self, tmp_path):
        target = tmp_path / "missing.json"
        target.write_text(json.dumps({"directed": False, "nodes": [], "edges": []}))
        with pytest.raises(NetworkFormatError, match="seeds"):
            load_network(target)

    def test_unknown_key_reported(self, tmp_path):
        doc = {"directed": False, "nodes": [{"id": 0, "rule": "gcm", "phi": 0.5}],
               "edges": [], "seeds": [], "weights": []}
        target = tmp_path / "extra.json"
        target.write_text(json.dumps(doc))
        with pytest.raises(NetworkFormatError, match="weights"):
            load_network(target)

    def test_non_dense_ids_rejected(self, tmp_path):
        doc = {"directed": False,
               "nodes": [{"id": 0, "rule": "gcm", "phi": 0.5},
                         {"id": 2, "rule": "gcm", "phi": 0.5}],
               "edges": [], "seeds": []}
        target = tmp_path / "ids.json"
        target.write_text(json.dumps(doc))
        with pytest.raises(NetworkFormatError, match="0..1"):
            load_network(target)
