import random

import numpy as np
import pytest

from eventframes.louvain import ClusterAssignment, louvain

from oracles import best_bipartition, direct_modularity


def clique_matrix(groups: list[list[int]], n: int, weight: float = 1.0) -> np.ndarray:
    weights = np.zeros((n, n))
    for group in groups:
        for a in group:
            for b in group:
                if a != b:
                    weights[a, b] = weight
    return weights


class TestLouvainBasics:
    def test_two_disconnected_triangles(self):
        weights = clique_matrix([[0, 1, 2], [3, 4, 5]], 6)
        result = louvain(weights, seed=1234)
        assert result.as_partition() == {frozenset({0, 1, 2}), frozenset({3, 4, 5})}

    def test_single_node(self):
        result = louvain(np.zeros((1, 1)), seed=0)
        assert result.labels == (0,)
        assert result.n_clusters == 1

    def test_empty_graph(self):
        result = louvain(np.zeros((0, 0)), seed=0)
        assert result.labels == ()
        assert result.n_clusters == 0

    def test_isolated_nodes_are_singletons(self):
        weights = clique_matrix([[0, 1, 2]], 5)
        result = louvain(weights, seed=3)
        assert result.as_partition() == {frozenset({0, 1, 2}), frozenset({3}), frozenset({4})}

    def test_labels_contiguous_first_occurrence(self):
        weights = clique_matrix([[3, 4], [0, 1]], 5)
        result = louvain(weights, seed=0)
        assert result.labels[0] == 0
        assert set(result.labels) == set(range(result.n_clusters))

    def test_two_identical_nodes_merge(self):
        weights = np.array([[0.0, 5.0], [5.0, 0.0]])
        assert louvain(weights, seed=0).n_clusters == 1

    def test_validation(self):
        with pytest.raises(ValueError):
            louvain(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            louvain(np.array([[0.0, 1.0], [2.0, 0.0]]))
        with pytest.raises(ValueError):
            louvain(np.array([[0.0, -1.0], [-1.0, 0.0]]))
        with pytest.raises(ValueError):
            louvain(np.zeros((2, 2)), keys=["a"])
        with pytest.raises(ValueError):
            louvain(np.zeros((2, 2)), keys=["a", "a"])


class TestBarbell:
    def barbell(self) -> np.ndarray:
        weights = clique_matrix([[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]], 10)
        weights[4, 5] = weights[5, 4] = 0.1
        return weights

    def test_matches_exhaustive_bipartition_oracle(self):
        weights = self.barbell()
        oracle_q, oracle_parts = best_bipartition(weights)
        result = louvain(weights, seed=1234)
        assert result.as_partition() == oracle_parts
        assert direct_modularity(weights, result.labels) == pytest.approx(oracle_q, abs=1e-12)

    def test_recovers_cliques(self):
        result = louvain(self.barbell(), seed=1234)
        assert result.as_partition() == {frozenset(range(5)), frozenset(range(5, 10))}


class TestCliqueUnionRecovery:
    def test_randomized_trials(self):
        rng = random.Random(2024)
        for trial in range(20):
            sizes = [rng.randint(2, 6) for _ in range(rng.randint(2, 5))]
            groups, start = [], 0
            for size in sizes:
                groups.append(list(range(start, start + size)))
                start += size
            weights = clique_matrix(groups, start)
            result = louvain(weights, seed=trial)
            assert result.as_partition() == {frozenset(g) for g in groups}, (trial, sizes)

    def test_modularity_non_decreasing_across_passes(self):
        rng = random.Random(7)
        for trial in range(20):
            n = rng.randint(2, 14)
            weights = np.zeros((n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.4:
                        weights[i, j] = weights[j, i] = rng.uniform(0.1, 2.0)
            result = louvain(weights, seed=trial)
            trace = result.modularity_levels
            assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:])), trace

    def test_final_modularity_matches_direct_formula(self):
        rng = random.Random(31)
        for trial in range(10):
            n = rng.randint(3, 12)
            weights = np.zeros((n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.5:
                        weights[i, j] = weights[j, i] = rng.uniform(0.1, 3.0)
            result = louvain(weights, seed=trial)
            assert result.modularity_levels[-1] == pytest.approx(
                direct_modularity(weights, result.labels), abs=1e-9
            )


class TestPermutationInvariance:
    def planted_graph(self, rng) -> np.ndarray:
        n = 12
        group = [i % 3 for i in range(n)]
        weights = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                if group[i] == group[j]:
                    weights[i, j] = weights[j, i] = rng.uniform(0.8, 1.0)
                elif rng.random() < 0.3:
                    weights[i, j] = weights[j, i] = rng.uniform(0.0, 0.1)
        return weights

    def test_same_partition_up_to_relabeling(self):
        rng = random.Random(17)
        for trial in range(10):
            weights = self.planted_graph(rng)
            n = weights.shape[0]
            ids = [f"node-{i}" for i in range(n)]
            baseline = louvain(weights, seed=5, keys=ids)
            base_groups = {
                frozenset(ids[i] for i in g) for g in baseline.groups()
            }

            permutation = list(range(n))
            rng.shuffle(permutation)  # original index -> new position
            permuted = np.zeros_like(weights)
            permuted_ids = [""] * n
            for i in range(n):
                permuted_ids[permutation[i]] = ids[i]
                for j in range(n):
                    permuted[permutation[i], permutation[j]] = weights[i, j]
            shuffled = louvain(permuted, seed=5, keys=permuted_ids)
            shuffled_groups = {
                frozenset(permuted_ids[i] for i in g) for g in shuffled.groups()
            }
            assert shuffled_groups == base_groups, trial


class TestClusterAssignment:
    def test_groups_and_by_id(self):
        assignment = ClusterAssignment(
            labels=(0, 1, 0), modularity_levels=(0.1,), ids=("a", "b", "c")
        )
        assert assignment.groups() == [(0, 2), (1,)]
        assert assignment.by_id() == {"a": 0, "b": 1, "c": 0}

    def test_by_id_requires_ids(self):
        with pytest.raises(ValueError):
            ClusterAssignment(labels=(0,), modularity_levels=()).by_id()
