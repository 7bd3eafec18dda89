"""Tests for the merging and moving stages"""

import math

import numpy as np
import pytest

from entropy_clustering.config import Hyperparams
from entropy_clustering.constraints import RelationGraph
from entropy_clustering.flat_optimizer import (
    delta_insert,
    delta_merge,
    delta_remove,
    minimize_2d,
    module_term,
    vertex_links,
)
from entropy_clustering.graph import WeightedGraph
from entropy_clustering.objective import partition_objective
from entropy_clustering.oracle import brute_force_min_2d
from entropy_clustering.partition import Partition

from .conftest import between, make_graph, make_relation, random_instance

TRIANGLE_MERGE = 0.1949875


class TestDeltas:
    """Closed-form deltas agree with from-scratch recomputation"""

    def test_module_term_zero_volume(self):
        """Test zero-volume module term"""
        assert module_term(0.0, 0.0, 0.0, 6.0, 2.0) == 0.0

    def test_triangle_merge(self, triangle):
        """Test merge delta on the triangle"""
        partition = Partition.singletons(triangle, make_relation(3))
        assert delta_merge(partition, 0, 1, 1.0, 0.0, 2.0) == pytest.approx(TRIANGLE_MERGE, abs=1e-6)

    def test_triangle_move(self, triangle):
        """Test move delta on the triangle"""
        relation = make_relation(3)
        partition = Partition([0, 0, 2], triangle, relation)
        links = vertex_links(partition, 1)
        assert links == {0: [1.0, 0.0], 2: [1.0, 0.0]}
        gain = delta_remove(partition, 1, links, 2.0) - delta_insert(partition, 2, 1, links, 2.0)
        assert gain == pytest.approx(0.0, abs=1e-12)

    def test_merge_identity(self, rng):
        """Merge delta equals the recomputed objective difference"""
        checked = 0
        while checked < 1000:
            graph, relation = random_instance(rng)
            partition = Partition(rng.integers(0, 5, size=graph.n), graph, relation)
            ids = partition.module_ids()
            if len(ids) < 2:
                continue
            x, y = rng.choice(ids, size=2, replace=False).tolist()
            phi = float(rng.choice([0.0, 2.0]))
            w = between(graph, partition.members[x], partition.members[y])
            wr = between(relation, partition.members[x], partition.members[y])

            before = partition_objective(graph, relation, partition, phi)
            delta = delta_merge(partition, x, y, w, wr, phi)
            partition.merge(x, y, w, wr)
            after = partition_objective(graph, relation, partition, phi)

            assert delta == pytest.approx(before - after, abs=1e-9)
            partition.check_invariants()
            checked += 1

    def test_move_identity(self, rng):
        """Remove minus insert equals the recomputed objective difference"""
        checked = 0
        while checked < 1000:
            graph, relation = random_instance(rng)
            partition = Partition(rng.integers(0, 4, size=graph.n), graph, relation)
            v = int(rng.integers(graph.n))
            targets = [m for m in partition.module_ids() if m != partition.assignment[v]]
            if not targets:
                continue
            target = targets[int(rng.integers(len(targets)))]
            phi = float(rng.choice([0.0, 2.0]))
            links = vertex_links(partition, v)

            before = partition_objective(graph, relation, partition, phi)
            gain = delta_remove(partition, v, links, phi) - delta_insert(partition, target, v, links, phi)
            partition.move(v, target, links)
            after = partition_objective(graph, relation, partition, phi)

            assert gain == pytest.approx(before - after, abs=1e-9)
            partition.check_invariants()
            checked += 1


class TestMinimize2D:
    """End-to-end flat minimization"""

    def test_triangle(self, triangle):
        """Test the triangle end to end"""
        result = minimize_2d(triangle, make_relation(3))
        assert result.partition.labels().tolist() == [0, 0, 1]
        assert result.merges == 1 and result.moves == 0
        assert result.converged and result.sweeps == 1
        assert result.objective == pytest.approx(1.389975, abs=1e-6)
        assert result.tree.height == 2

    def test_bridged_triangles(self, bridged_triangles):
        """Test two bridged triangles against brute force"""
        result = minimize_2d(bridged_triangles, make_relation(6))
        assert result.partition.labels().tolist() == [0, 0, 0, 1, 1, 1]
        labels, value = brute_force_min_2d(bridged_triangles, make_relation(6), 2.0)
        assert labels.tolist() == [0, 0, 0, 1, 1, 1]
        assert result.objective == pytest.approx(value, abs=1e-9)

    def test_must_links_pull_triangles_together(self, bridged_triangles):
        """Test must-links across the bridge"""
        relation = make_relation(6, {(0, 3): 1.0, (1, 4): 1.0, (2, 5): 1.0})
        result = minimize_2d(bridged_triangles, relation, Hyperparams(phi=2.0))
        labels = result.partition.labels()
        assert labels[0] == labels[3]
        _, best = brute_force_min_2d(bridged_triangles, relation, 2.0)
        assert result.objective >= best - 1e-9

    def test_trace_is_monotone_and_exact(self, rng):
        """Test objective trace"""
        for _ in range(30):
            graph, relation = random_instance(rng)
            result = minimize_2d(graph, relation, Hyperparams(phi=1.5))
            assert all(b <= a + 1e-12 for a, b in zip(result.trace, result.trace[1:]))
            assert len(result.trace) == 1 + result.merges + result.moves
            final = partition_objective(graph, relation, result.partition, 1.5)
            assert result.objective == pytest.approx(final, abs=1e-8)

    def test_caches_stay_consistent(self, rng):
        """Module caches stay exact after every step"""
        graph, relation = random_instance(rng, n_min=15, n_max=25)
        kinds = []

        def check(kind, delta, partition):
            assert delta > 0
            partition.check_invariants()
            kinds.append(kind)

        result = minimize_2d(graph, relation, on_step=check)
        assert kinds.count("merge") == result.merges
        assert kinds.count("move") == result.moves
        assert kinds == sorted(kinds)  # every merge precedes every move

    def test_empty_relation_matches_zero_phi(self, rng):
        """Test unsupervised reduction"""
        for _ in range(10):
            graph, relation = random_instance(rng)
            unconstrained = minimize_2d(graph, RelationGraph.empty(graph.n), Hyperparams(phi=2.0))
            ignored = minimize_2d(graph, relation, Hyperparams(phi=0.0))
            assert unconstrained.trace == ignored.trace
            assert np.array_equal(unconstrained.partition.labels(), ignored.partition.labels())

    def test_deterministic(self, rng):
        """Test determinism"""
        graph, relation = random_instance(rng, n_min=20)
        first = minimize_2d(graph, relation)
        second = minimize_2d(graph, relation)
        assert first.trace == second.trace
        assert first.partition.modules() == second.partition.modules()

    def test_max_merges(self, triangle):
        """Test the merge cap"""
        result = minimize_2d(triangle, make_relation(3), Hyperparams(max_merges=0, moving=False))
        assert result.partition.labels().tolist() == [0, 1, 2]
        assert result.trace == [pytest.approx(math.log2(3))]

    def test_moving_disabled(self, rng):
        """Test skipping the moving stage"""
        graph, relation = random_instance(rng)
        result = minimize_2d(graph, relation, Hyperparams(moving=False))
        assert result.moves == 0 and result.sweeps == 0 and result.converged

    def test_isolated_vertices_stay_alone(self):
        """Test isolated vertices"""
        graph = make_graph(5, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0})
        result = minimize_2d(graph, make_relation(5))
        modules = result.partition.modules()
        assert [3] in modules and [4] in modules

    def test_edgeless_graph(self):
        """Test graph without edges"""
        result = minimize_2d(WeightedGraph.empty(4), RelationGraph.empty(4))
        assert result.partition.labels().tolist() == [0, 1, 2, 3]
        assert result.trace == [0.0]
