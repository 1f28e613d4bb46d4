"""
Unit tests for spectra module.

Tests the random-matrix bulk, the sorted eigendecomposition, bulk deviation
counts and pair localization from the smallest eigenvectors.
"""

import unittest
import sys
import os

import numpy as np
from scipy import integrate

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from spectra import (
    mp_bounds,
    mp_density,
    mp_cdf,
    mp_fit,
    classify,
    eigendecompose,
    bulk_deviation_report,
    localize_pairs,
    spectrum_curves,
    spectrum_report,
)
from correlation import correlation_matrix
from models import CorrelationMatrix, InputError, NumericalError
from synth import (generate_noise_panel, generate_duplicate_pair_panel, generate_block_panel,
                   crude71_spec)


def matrix(c, t=5272):
    c = np.asarray(c, dtype=float)
    return CorrelationMatrix([f"S{i}" for i in range(c.shape[0])], c, t)


def equicorrelated(n, rho):
    c = np.full((n, n), rho)
    np.fill_diagonal(c, 1.0)
    return c


def sample_matrix(returns):
    g = (returns - returns.mean(axis=0)) / returns.std(axis=0)
    return correlation_matrix(g)


class TestMPBounds(unittest.TestCase):
    """Test cases for mp_bounds."""

    def test_crude_panel_shape(self):
        bounds = mp_bounds(5272, 71)
        self.assertAlmostEqual(bounds.lambda_max, 1.2456, delta=1e-3)
        self.assertAlmostEqual(bounds.lambda_min, 0.7814, delta=1e-3)

    def test_closed_forms(self):
        cases = [((10, 10, 1.0), (0.0, 4.0)), ((40, 10, 2.0), (0.5, 4.5))]
        for args, (low, high) in cases:
            with self.subTest(args=args):
                bounds = mp_bounds(*args)
                self.assertAlmostEqual(bounds.lambda_min, low, places=12)
                self.assertAlmostEqual(bounds.lambda_max, high, places=12)

    def test_errors(self):
        with self.assertRaises(NumericalError):
            mp_bounds(50, 71)
        with self.assertRaises(InputError):
            mp_bounds(100, 1)
        with self.assertRaises(InputError):
            mp_bounds(100, 10, sigma2=0.0)


class TestMPDensity(unittest.TestCase):

    def setUp(self):
        self.bounds = mp_bounds(5272, 71)

    def test_zero_at_edges_and_outside(self):
        self.assertEqual(mp_density(self.bounds.lambda_min, self.bounds), 0.0)
        self.assertEqual(mp_density(self.bounds.lambda_max, self.bounds), 0.0)
        self.assertEqual(mp_density(2.0, self.bounds), 0.0)

    def test_normalized(self):
        total, _ = integrate.quad(mp_density, self.bounds.lambda_min, self.bounds.lambda_max,
                                  args=(self.bounds,), limit=200)
        self.assertAlmostEqual(total, 1.0, delta=1e-6)

    def test_value_at_one(self):
        q = self.bounds.q
        expected = q / (2 * np.pi) * np.sqrt((self.bounds.lambda_max - 1) * (1 - self.bounds.lambda_min))
        self.assertAlmostEqual(mp_density(1.0, self.bounds), expected, places=10)

    def test_vectorized(self):
        grid = np.linspace(0.5, 1.5, 11)
        values = mp_density(grid, self.bounds)
        self.assertEqual(values.shape, (11,))
        self.assertAlmostEqual(values[5], mp_density(1.0, self.bounds))

    def test_cdf(self):
        self.assertEqual(mp_cdf(0.0, self.bounds), 0.0)
        self.assertEqual(mp_cdf(5.0, self.bounds), 1.0)
        values = mp_cdf(np.linspace(self.bounds.lambda_min, self.bounds.lambda_max, 9), self.bounds)
        self.assertTrue(np.all(np.diff(values) >= 0))


class TestNoiseSpectrum(unittest.TestCase):
    """Monte Carlo check of the bulk on a pure-noise panel."""

    def test_noise_panel_follows_bulk(self):
        c = correlation_matrix(generate_noise_panel(5000, 70, seed=1))
        bounds = mp_bounds(5000, 70)
        d = eigendecompose(c, bounds)
        distance, outside = mp_fit(d.eigenvalues, bounds)
        self.assertLess(distance, 0.05)
        self.assertLess(outside, 0.02)


class TestEigendecompose(unittest.TestCase):
    """Test cases for eigendecompose and bulk_deviation_report."""

    def test_two_by_two(self):
        d = eigendecompose(matrix([[1.0, 0.3], [0.3, 1.0]], t=100), mp_bounds(100, 2))
        np.testing.assert_allclose(d.eigenvalues, [1.3, 0.7])
        np.testing.assert_allclose(d.vector(1), [np.sqrt(0.5), np.sqrt(0.5)])
        np.testing.assert_allclose(np.abs(d.vector(2)), [np.sqrt(0.5), np.sqrt(0.5)])
        self.assertLess(d.vector(2)[0] * d.vector(2)[1], 0)

    def test_identity_is_bulk(self):
        d = eigendecompose(matrix(np.eye(71)), mp_bounds(5272, 71))
        self.assertEqual(bulk_deviation_report(d)["bulk"], 71)
        self.assertEqual(bulk_deviation_report(d)["above"], 0)

    def test_equicorrelated_closed_form(self):
        d = eigendecompose(matrix(equicorrelated(71, 0.57)), mp_bounds(5272, 71))
        self.assertAlmostEqual(d.eigenvalues[0], 40.9, places=8)
        np.testing.assert_allclose(d.eigenvalues[1:], 0.43, atol=1e-8)
        report = bulk_deviation_report(d)
        self.assertEqual((report["above"], report["bulk"], report["below"]), (1, 0, 70))
        self.assertAlmostEqual(report["explained_variance"], 40.9 / 71)

    def test_invariants(self):
        c = sample_matrix(generate_noise_panel(300, 12, seed=6))
        d = eigendecompose(c, mp_bounds(300, 12))
        u = d.eigenvectors
        self.assertLessEqual(np.max(np.abs(c.c - u @ np.diag(d.eigenvalues) @ u.T)), 1e-8)
        self.assertLessEqual(np.max(np.abs(u.T @ u - np.eye(12))), 1e-8)
        self.assertAlmostEqual(d.eigenvalues.sum(), 12.0, delta=1e-6)
        self.assertTrue(np.all(np.diff(d.eigenvalues) <= 0))
        for k in range(12):
            column = u[:, k]
            self.assertGreater(column[np.argmax(np.abs(column))], 0)

    def test_classification_monotone(self):
        bounds = mp_bounds(100, 10)
        order = {"below": 0, "bulk": 1, "above": 2}
        values = np.linspace(0.0, 3.0, 31)
        ranks = [order[classify(v, bounds)] for v in values]
        self.assertEqual(ranks, sorted(ranks))

    def test_non_symmetric_rejected(self):
        with self.assertRaises(NumericalError):
            eigendecompose(matrix([[1.0, 0.2], [0.3, 1.0]], t=100), mp_bounds(100, 2))

    def test_planted_six_blocks(self):
        returns, _ = generate_block_panel(crude71_spec(seed=3))
        c = sample_matrix(returns)
        d = eigendecompose(c, mp_bounds(c.t_effective, c.n))
        self.assertEqual(bulk_deviation_report(d)["above"], 6)


class TestLocalizePairs(unittest.TestCase):
    """Test cases for localize_pairs."""

    def test_identity_has_no_pairs(self):
        c = matrix(np.eye(6), t=100)
        d = eigendecompose(c, mp_bounds(100, 6))
        for result in localize_pairs(d, c, k_smallest=4):
            self.assertEqual(result.implied_pairs, [])

    def test_planted_pair_is_top_pair(self):
        for seed in range(20):
            with self.subTest(seed=seed):
                returns, pairs = generate_duplicate_pair_panel(20, 5000, 0.999, seed)
                c = sample_matrix(returns)
                d = eigendecompose(c, mp_bounds(c.t_effective, c.n))
                smallest = localize_pairs(d, c, k_smallest=1)[0]
                self.assertEqual(smallest.eigen_index, 20)
                self.assertEqual(smallest.top_pair(), pairs[0])
                self.assertEqual(smallest.implied_pairs[0]["rank"], 1)
                self.assertAlmostEqual(smallest.implied_pairs[0]["c"], 0.999, delta=0.002)

    def test_two_pairs_localized_separately(self):
        returns, pairs = generate_duplicate_pair_panel(20, 5000, (0.999, 0.99), seed=5)
        c = sample_matrix(returns)
        d = eigendecompose(c, mp_bounds(c.t_effective, c.n))
        first, second = localize_pairs(d, c, k_smallest=2)
        self.assertEqual(first.top_pair(), pairs[0])
        self.assertEqual(second.top_pair(), pairs[1])
        self.assertEqual(second.implied_pairs[0]["rank"], 2)

    def test_dominant_components_above_threshold(self):
        returns, _ = generate_duplicate_pair_panel(10, 2000, 0.995, seed=2)
        c = sample_matrix(returns)
        d = eigendecompose(c, mp_bounds(c.t_effective, c.n))
        for result in localize_pairs(d, c, k_smallest=3, dominance=0.4):
            for _, value in result.dominant_components:
                self.assertGreaterEqual(abs(value), 0.4)
            for entry in result.implied_pairs:
                i, j = entry["pair"]
                self.assertLess(d.eigenvectors[i, result.eigen_index - 1] * d.eigenvectors[j, result.eigen_index - 1], 0)

    def test_k_smallest_too_large(self):
        c = matrix(np.eye(3), t=100)
        with self.assertRaises(InputError):
            localize_pairs(eigendecompose(c, mp_bounds(100, 3)), c, k_smallest=4)


class TestReports(unittest.TestCase):

    def test_curves_and_report(self):
        c = sample_matrix(generate_noise_panel(500, 10, seed=8))
        d = eigendecompose(c, mp_bounds(500, 10))
        histogram, curve = spectrum_curves(d, n_bins=5, n_grid=20)
        self.assertEqual(list(histogram.columns), ["bin_center", "density"])
        self.assertEqual(len(curve), 20)
        report = spectrum_report(d, localize_pairs(d, c, 2))
        self.assertEqual(len(report["eigenvectors"]), 10)
        self.assertEqual(len(report["pairs"]), 2)
        self.assertEqual(report["above"] + report["bulk"] + report["below"], 10)


if __name__ == '__main__':
    unittest.main()
