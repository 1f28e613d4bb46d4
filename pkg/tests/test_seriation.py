"""
Unit tests for seriation module.

Tests the arrangement cost, the annealed ordering against exhaustive search,
the exact block segmentation, consensus clustering and the partition views.
"""

import unittest
import sys
import os
from itertools import permutations, product

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from seriation import (
    derive_seed,
    seriation_cost,
    schedule_length,
    anneal_ordering,
    partition_score,
    segment_blocks,
    affinity_matrix,
    consensus_cluster,
    reorder_eigenvectors,
    blockwise_variance,
    cluster_correlation_summary,
    partition_agreement,
    back_diagonal_view,
)
from correlation import correlation_matrix
from models import AnnealingConfig, CorrelationMatrix, InputError, Ordering, Partition
from spectra import eigendecompose, mp_bounds
from synth import generate_block_panel, generate_noise_panel, crude71_spec, random_correlation_matrix


SCHEDULE = AnnealingConfig()


def block_matrix(sizes, intra, inter):
    labels = np.repeat(np.arange(len(sizes)), sizes)
    c = np.where(labels[:, None] == labels[None, :], intra, inter).astype(float)
    np.fill_diagonal(c, 1.0)
    return c


def equicorrelated(n, rho):
    return block_matrix([n], rho, 0.0)


def brute_force_cost(c):
    n = c.shape[0]
    perms = np.array(list(permutations(range(n))))
    total = np.zeros(len(perms))
    for i in range(n):
        for j in range(i + 1, n):
            total += 2.0 * (j - i) * c[perms[:, i], perms[:, j]]
    return total.min()


def brute_force_segmentation(c, gamma=1.0):
    n = c.shape[0]
    best = -np.inf
    for cuts in product([False, True], repeat=n - 1):
        assignment = np.cumsum([1] + [int(cut) for cut in cuts])
        best = max(best, partition_score(c, assignment, gamma))
    return best


def same_clusters(a, b):
    return partition_agreement(a, b) == 1.0


class TestSeriationCost(unittest.TestCase):
    """Test cases for seriation_cost."""

    def test_two_series(self):
        c = np.array([[1.0, 0.4], [0.4, 1.0]])
        self.assertAlmostEqual(seriation_cost(c, [0, 1]), 0.8)
        self.assertAlmostEqual(seriation_cost(c, [1, 0]), 0.8)

    def test_identity_matrix_costs_zero(self):
        for perm in ([0, 1, 2, 3], [3, 1, 0, 2]):
            with self.subTest(perm=perm):
                self.assertEqual(seriation_cost(np.eye(4), perm), 0.0)

    def test_three_by_three_enumeration(self):
        c = np.array([[1.0, 0.9, 0.1], [0.9, 1.0, 0.2], [0.1, 0.2, 1.0]])
        costs = {perm: seriation_cost(c, perm) for perm in permutations(range(3))}
        best = min(costs, key=costs.get)
        self.assertEqual(abs(best.index(0) - best.index(1)), 1)
        self.assertAlmostEqual(costs[(0, 1, 2)], 2 * (0.9 + 0.2 + 2 * 0.1))
        self.assertAlmostEqual(costs[best], costs[(0, 1, 2)])
        self.assertAlmostEqual(costs[(0, 2, 1)], 2 * (0.1 + 0.2 + 2 * 0.9))

    def test_accepts_correlation_matrix(self):
        c = CorrelationMatrix(["a", "b", "c"], equicorrelated(3, 0.5), 10)
        self.assertAlmostEqual(seriation_cost(c, [2, 0, 1]), 2 * 0.5 * (1 + 1 + 2))

    def test_relabeling_invariance(self):
        c = random_correlation_matrix(7, seed=3)
        sigma = np.array([4, 2, 6, 0, 1, 5, 3])
        pi = np.array([1, 0, 3, 2, 6, 5, 4])
        relabeled = c[np.ix_(sigma, sigma)]
        inverse = np.argsort(sigma)
        self.assertAlmostEqual(seriation_cost(relabeled, inverse[pi]), seriation_cost(c, pi), places=12)

    def test_invalid_permutation(self):
        for perm in ([0, 0, 1], [0, 1], [0, 1, 3]):
            with self.subTest(perm=perm):
                with self.assertRaises(InputError):
                    seriation_cost(np.eye(3), perm)


class TestAnnealOrdering(unittest.TestCase):
    """Test cases for anneal_ordering."""

    def test_matches_exhaustive_optimum(self):
        hits = 0
        for seed in range(100):
            c = random_correlation_matrix(8, seed=seed)
            ordering = anneal_ordering(c, seed=seed)
            if ordering.cost <= brute_force_cost(c) + 1e-9:
                hits += 1
        self.assertGreaterEqual(hits, 95)

    def test_cost_recomputable_and_not_above_identity(self):
        for seed in range(5):
            with self.subTest(seed=seed):
                c = random_correlation_matrix(12, seed=100 + seed)
                ordering = anneal_ordering(c, SCHEDULE, seed=seed)
                self.assertTrue(ordering.validate()[0])
                self.assertAlmostEqual(ordering.cost, seriation_cost(c, ordering.perm), delta=1e-9)
                self.assertLessEqual(ordering.cost, seriation_cost(c, np.arange(12)))

    def test_identity_matrix(self):
        ordering = anneal_ordering(np.eye(6), seed=1)
        self.assertEqual(ordering.cost, 0.0)

    def test_scrambled_blocks_become_contiguous(self):
        c = block_matrix([5, 5], 0.9, 0.1)
        scramble = np.random.default_rng(4).permutation(10)
        scrambled = c[np.ix_(scramble, scramble)]
        ordering = anneal_ordering(scrambled, seed=2)
        self.assertAlmostEqual(ordering.cost, seriation_cost(c, np.arange(10)), delta=1e-9)

    def test_deterministic(self):
        c = random_correlation_matrix(15, seed=8)
        first = anneal_ordering(c, SCHEDULE, seed=21)
        second = anneal_ordering(c, SCHEDULE, seed=21)
        np.testing.assert_array_equal(first.perm, second.perm)
        self.assertEqual(first.cost, second.cost)

    def test_needs_two_series(self):
        with self.assertRaises(InputError):
            anneal_ordering(np.eye(1), seed=0)

    def test_derived_seeds(self):
        self.assertEqual(derive_seed(7, 0, 3), derive_seed(7, 0, 3))
        self.assertNotEqual(derive_seed(7, 0, 3), derive_seed(7, 0, 4))
        self.assertNotEqual(derive_seed(7, 0, 3), derive_seed(7, 1, 3))
        with self.assertRaises(InputError):
            derive_seed(-1)


class TestSchedule(unittest.TestCase):
    """The cooling floor keeps one restart short on a sampled matrix."""

    def test_default_schedule_length(self):
        self.assertEqual(schedule_length(AnnealingConfig()), 180)
        self.assertEqual(schedule_length(AnnealingConfig(min_temperature_ratio=0.0)), 1000)
        self.assertEqual(schedule_length(AnnealingConfig(cooling=0.5, min_temperature_ratio=0.1)), 4)

    def test_sampled_blocks_stop_at_the_floor(self):
        returns, _ = generate_block_panel(crude71_spec(seed=5))
        c = correlation_matrix((returns - returns.mean(axis=0)) / returns.std(axis=0))
        ordering = anneal_ordering(c, SCHEDULE, seed=3)
        self.assertGreater(ordering.temperatures, 0)
        self.assertLessEqual(ordering.temperatures, schedule_length(SCHEDULE))

    def test_temperature_cap(self):
        c = random_correlation_matrix(10, seed=2)
        ordering = anneal_ordering(c, AnnealingConfig(cooling=0.999, max_temperatures=7), seed=1)
        self.assertLessEqual(ordering.temperatures, 7)


class TestSegmentBlocks(unittest.TestCase):
    """Test cases for segment_blocks."""

    def test_two_planted_blocks(self):
        c = block_matrix([2, 2], 0.9, 0.0)
        p = segment_blocks(c, Ordering(np.arange(4), 0.0))
        np.testing.assert_array_equal(p.assignment, [1, 1, 2, 2])
        self.assertAlmostEqual(p.score, brute_force_segmentation(c), places=12)
        self.assertAlmostEqual(p.score, 2.4)

    def test_equicorrelated_single_cluster(self):
        p = segment_blocks(equicorrelated(9, 0.57), Ordering(np.arange(9), 0.0))
        self.assertEqual(p.k, 1)

    def test_zero_matrix_singletons(self):
        p = segment_blocks(np.eye(6), Ordering(np.arange(6), 0.0))
        self.assertEqual(p.k, 6)
        self.assertTrue(p.validate()[0])

    def test_matches_exhaustive_segmentation(self):
        for seed in range(50):
            n = 4 + seed % 9
            with self.subTest(seed=seed, n=n):
                c = random_correlation_matrix(n, seed=500 + seed)
                p = segment_blocks(c, Ordering(np.arange(n), 0.0))
                self.assertAlmostEqual(p.score, brute_force_segmentation(c), delta=1e-9)
                self.assertAlmostEqual(p.score, partition_score(c, p.assignment), delta=1e-9)

    def test_follows_ordering(self):
        c = block_matrix([3, 3], 0.9, 0.1)
        perm = np.array([5, 4, 3, 2, 1, 0])
        p = segment_blocks(c, Ordering(perm, seriation_cost(c, perm)))
        # ids are numbered along the ordering, so series 5 is in cluster 1
        np.testing.assert_array_equal(p.assignment, [2, 2, 2, 1, 1, 1])
        self.assertTrue(p.validate()[0])

    def test_larger_gamma_never_merges_more(self):
        c = block_matrix([3, 4, 3], 0.8, 0.3)
        ordering = Ordering(np.arange(10), 0.0)
        self.assertLessEqual(segment_blocks(c, ordering, 1.0).k, segment_blocks(c, ordering, 3.0).k)

    def test_bad_gamma(self):
        with self.assertRaises(InputError):
            segment_blocks(np.eye(3), Ordering(np.arange(3), 0.0), gamma=0.0)


class TestConsensus(unittest.TestCase):
    """Test cases for affinity_matrix and consensus_cluster."""

    def test_affinity_of_identical_partitions_is_binary(self):
        p = Partition([1, 1, 2], Ordering([0, 1, 2], 0.0), 0.0)
        affinity = affinity_matrix([p, p, p])
        self.assertTrue(affinity.is_binary())
        np.testing.assert_array_equal(affinity.counts, [[3, 3, 0], [3, 3, 0], [0, 0, 3]])

    def test_planted_blocks_recovered(self):
        c = block_matrix([4, 6, 5], 0.85, 0.1)
        truth = np.repeat([1, 2, 3], [4, 6, 5])
        p, affinity = consensus_cluster(c, n_runs=8, schedule=SCHEDULE, seed=5)
        self.assertTrue(p.converged)
        self.assertEqual(p.k, 3)
        self.assertTrue(same_clusters(p, truth))
        self.assertTrue(p.validate()[0])
        np.testing.assert_array_equal(np.diag(affinity.a), 1.0)
        np.testing.assert_array_equal(affinity.counts, affinity.counts.T)

    def test_single_run_equals_that_run(self):
        c = random_correlation_matrix(10, seed=12)
        p, affinity = consensus_cluster(c, n_runs=1, schedule=SCHEDULE, seed=3)
        single = segment_blocks(c, anneal_ordering(c, SCHEDULE, derive_seed(3, 0, 0)))
        self.assertTrue(same_clusters(p, single.assignment))
        self.assertEqual(affinity.n_runs, 1)

    def test_idempotent_on_block_affinity(self):
        truth = np.repeat([1, 2, 3], [3, 2, 4])
        binary = (truth[:, None] == truth[None, :]).astype(float)
        p, _ = consensus_cluster(binary, n_runs=4, schedule=SCHEDULE, seed=9)
        self.assertTrue(same_clusters(p, truth))

    def test_deterministic_and_independent_of_jobs(self):
        c = random_correlation_matrix(12, seed=30)
        serial, serial_affinity = consensus_cluster(c, n_runs=6, schedule=SCHEDULE, seed=17, jobs=1)
        again, _ = consensus_cluster(c, n_runs=6, schedule=SCHEDULE, seed=17, jobs=1)
        parallel, parallel_affinity = consensus_cluster(c, n_runs=6, schedule=SCHEDULE, seed=17, jobs=2)
        np.testing.assert_array_equal(serial.assignment, again.assignment)
        np.testing.assert_array_equal(serial.assignment, parallel.assignment)
        np.testing.assert_array_equal(serial.ordering.perm, parallel.ordering.perm)
        self.assertEqual(serial_affinity, parallel_affinity)

    def test_crude71_recovery(self):
        returns, truth = generate_block_panel(crude71_spec(seed=71))
        g = (returns - returns.mean(axis=0)) / returns.std(axis=0)
        c = correlation_matrix(g)
        for seed in range(10):
            with self.subTest(seed=seed):
                p, _ = consensus_cluster(c, n_runs=50, schedule=SCHEDULE, seed=seed, jobs=-1)
                self.assertGreaterEqual(partition_agreement(p, truth), 0.95)

    def test_noise_stays_one_cluster(self):
        c = correlation_matrix(generate_noise_panel(4000, 20, seed=6))
        p, affinity = consensus_cluster(c, n_runs=4, schedule=SCHEDULE, seed=2)
        self.assertEqual(p.k, 1)
        self.assertTrue(p.converged)
        self.assertEqual(affinity.n_runs, 4)

    def test_bulk_guard_needs_sample_length(self):
        # a bare array carries no T, so the planted split is still made
        c = block_matrix([3, 3], 0.9, 0.0)
        p, _ = consensus_cluster(c, n_runs=2, schedule=SCHEDULE, seed=1)
        self.assertEqual(p.k, 2)


class TestPartitionViews(unittest.TestCase):
    """Test cases for eigenvector reordering and partition summaries."""

    def test_identity_partition_leaves_components(self):
        c = CorrelationMatrix([f"S{i}" for i in range(6)], block_matrix([3, 3], 0.8, 0.2), 1000)
        d = eigendecompose(c, mp_bounds(1000, 6))
        p = Partition([1, 1, 1, 2, 2, 2], Ordering(np.arange(6), 0.0), 0.0)
        view = reorder_eigenvectors(d, p)
        self.assertEqual(view["boundaries"], [3])
        for k, values in view["components"].items():
            np.testing.assert_array_equal(values, d.vector(k))

    def test_single_cluster_is_permutation(self):
        c = CorrelationMatrix([f"S{i}" for i in range(5)], equicorrelated(5, 0.4), 1000)
        d = eigendecompose(c, mp_bounds(1000, 5))
        perm = np.array([4, 2, 0, 1, 3])
        view = reorder_eigenvectors(d, Partition(np.ones(5), Ordering(perm, 0.0), 0.0), ks=[1, 2])
        self.assertEqual(view["boundaries"], [])
        np.testing.assert_array_equal(np.sort(view["components"][2]), np.sort(d.vector(2)))

    def test_planted_blocks_blockwise_constant(self):
        returns, truth = generate_block_panel(crude71_spec(seed=2))
        g = (returns - returns.mean(axis=0)) / returns.std(axis=0)
        c = correlation_matrix(g)
        d = eigendecompose(c, mp_bounds(c.t_effective, c.n))
        p = Partition(truth, Ordering(np.arange(c.n), 0.0), 0.0)
        view = reorder_eigenvectors(d, p)
        ordered_truth = np.asarray(view["clusters"])
        for k in (2, 3, 4, 5):
            with self.subTest(k=k):
                within, between = blockwise_variance(view["components"][k], ordered_truth)
                self.assertLess(within, between)

    def test_cluster_correlation_summary(self):
        c = block_matrix([2, 3], 0.9, 0.2)
        p = Partition([1, 1, 2, 2, 2], Ordering(np.arange(5), 0.0), 0.0)
        summary = cluster_correlation_summary(c, p)
        self.assertAlmostEqual(summary.loc["cluster_1", "cluster_1"], 0.9)
        self.assertAlmostEqual(summary.loc["cluster_1", "cluster_2"], 0.2)
        self.assertAlmostEqual(summary.loc["cluster_2", "cluster_1"], 0.2)

    def test_back_diagonal_view(self):
        c = block_matrix([2, 2], 0.9, 0.1)
        p = Partition([1, 1, 2, 2], Ordering(np.arange(4), 0.0), 0.0)
        view = back_diagonal_view(c, p)
        np.testing.assert_allclose(view, c[:, ::-1])
        np.testing.assert_allclose(np.diag(view[:, ::-1]), 1.0)

    def test_partition_agreement(self):
        self.assertEqual(partition_agreement([1, 1, 2, 2], [2, 2, 1, 1]), 1.0)
        self.assertLess(partition_agreement([1, 1, 2, 2], [1, 2, 1, 2]), 0.5)


if __name__ == '__main__':
    unittest.main()
