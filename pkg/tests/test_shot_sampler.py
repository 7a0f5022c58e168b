"""Unit tests for finite-shot estimation and the complexity sweep."""

import unittest
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import ValidationError
from src.gates_channels import H, I2, X, Z
from src.oracle import oracle_power_sum
from src.protocols import power_sum_spec
from src.quantum_state import QuantumState
from src.shot_sampler import (
    BUDGET_GRID,
    ComplexityReport,
    complexity_sweep,
    default_instance,
    estimate_naive,
    estimate_qfs,
)

ZERO = QuantumState.basis([2], 0)


class TestBudgetGrid(unittest.TestCase):
    """Test the candidate budget grid."""

    def test_range_and_order(self):
        """Test budgets run from 8 to 2^18 strictly increasing."""
        self.assertEqual(BUDGET_GRID[0], 8)
        self.assertEqual(BUDGET_GRID[-1], 2 ** 18)
        self.assertTrue(all(a < b for a, b in zip(BUDGET_GRID, BUDGET_GRID[1:])))


class TestEstimators(unittest.TestCase):
    """Test the two finite-shot estimators."""

    def test_qfs_within_five_sigma(self):
        """Test the sampled QFS value of the linear H-versus-identity sum."""
        spec = power_sum_spec(2, 1, [0.5, 0.5], [H, I2], Z, ZERO)
        result = estimate_qfs(spec, 8192, seed=2019)
        self.assertEqual(result.prep_count, 8192)
        self.assertLess(abs(result.mean - 0.5), 5 * result.stderr)

    def test_naive_within_five_sigma(self):
        """Test the naive estimate of the same sum and its preparation count."""
        result = estimate_naive(2, 1, [0.5, 0.5], [H, I2], Z, ZERO, shots_per_branch=4096, seed=5)
        self.assertEqual(result.prep_count, 2 * 4096)
        self.assertEqual(result.shots, result.prep_count)
        self.assertGreater(result.stderr, 0)
        self.assertLess(abs(result.mean - 0.5), 5 * result.stderr)

    def test_naive_distinct_copy_observables(self):
        """Test per-copy observables multiply per-copy means."""
        plus = QuantumState.from_vector(np.array([1, 1]) / np.sqrt(2))
        result = estimate_naive(1, 2, [1.0], [I2], [X, X], plus, shots_per_branch=100, seed=1)
        self.assertEqual(result.mean, 1.0)
        self.assertEqual(result.prep_count, 200)
        result = estimate_naive(1, 2, [1.0], [I2], [X, Z], ZERO, shots_per_branch=100, seed=1)
        self.assertEqual(result.prep_count, 200)
        self.assertLessEqual(abs(result.mean), 1.0)

    def test_naive_reproducible(self):
        """Test equal seeds give equal estimates."""
        args = (2, 2, [0.3, 0.7], [H, I2], Z, ZERO)
        a = estimate_naive(*args, shots_per_branch=500, seed=9)
        b = estimate_naive(*args, shots_per_branch=500, seed=9)
        self.assertEqual(a, b)

    def test_naive_quadratic_bias(self):
        """Test the plug-in square of a zero-mean branch is biased by about 1/N."""
        n = 4
        values = [estimate_naive(1, 2, [1.0], [H], Z, ZERO, shots_per_branch=n, seed=s).mean
                  for s in range(2000)]
        self.assertAlmostEqual(oracle_power_sum(1, 2, [1.0], [H], Z, ZERO), 0.0, places=12)
        self.assertLess(abs(np.mean(values) - 1 / (2 * n)), 0.05)

    def test_invalid_shots(self):
        """Test a non-positive shot count is rejected."""
        with self.assertRaises(ValidationError):
            estimate_naive(2, 1, [0.5, 0.5], [H, I2], Z, ZERO, shots_per_branch=0, seed=1)


class TestComplexitySweep(unittest.TestCase):
    """Test the preparation-cost comparison."""

    @classmethod
    def setUpClass(cls):
        cls.report = complexity_sweep(default_instance(), seed=2019)

    def test_shape(self):
        """Test one row per epsilon with positive entries."""
        self.assertEqual(len(self.report.rows()), 4)
        self.assertEqual(self.report.d, 4)
        self.assertTrue(all(r > 0 for r in self.report.ratio))

    def test_median_ratio(self):
        """Test naive sampling costs between 2 and 8 times more at d=4."""
        self.assertGreaterEqual(self.report.median_ratio(), 2)
        self.assertLessEqual(self.report.median_ratio(), 8)

    def test_inverse_sqrt_scaling(self):
        """Test log(epsilon) against log(preparations) has slope near -1/2."""
        self.assertAlmostEqual(self.report.qfs_slope(), -0.5, delta=0.1)

    def test_budget_monotone_in_delta(self):
        """Test a smaller delta never needs fewer preparations."""
        loose = complexity_sweep(default_instance(), delta=0.2, seed=2019, repetitions=100)
        tight = complexity_sweep(default_instance(), delta=0.05, seed=2019, repetitions=100)
        for a, b in zip(tight.qfs_preps, loose.qfs_preps):
            self.assertGreaterEqual(a, b)
        for a, b in zip(tight.naive_preps, loose.naive_preps):
            self.assertGreaterEqual(a, b)

    def test_workers_do_not_change_result(self):
        """Test a worker pool reproduces the sequential sweep."""
        serial = complexity_sweep(default_instance(), seed=3, repetitions=50)
        pooled = complexity_sweep(default_instance(), seed=3, repetitions=50, workers=4)
        self.assertEqual(serial, pooled)

    def test_csv(self):
        """Test the CSV header and row count."""
        lines = self.report.to_csv().splitlines()
        self.assertEqual(lines[0], 'epsilon,naive_preps,qfs_preps,ratio')
        self.assertEqual(len(lines), 5)

    def test_invalid_delta(self):
        """Test delta must lie strictly between 0 and 1."""
        with self.assertRaises(ValidationError):
            complexity_sweep(default_instance(), delta=1.0)

    def test_report_rejects_non_positive(self):
        """Test report entries must be positive."""
        with self.assertRaises(ValidationError):
            ComplexityReport(epsilon_grid=(0.1,), naive_preps=(0,), qfs_preps=(8,), ratio=(0.0,), d=2, delta=0.1)


if __name__ == '__main__':
    unittest.main()
