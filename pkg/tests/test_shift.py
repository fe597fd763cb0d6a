#!/usr/bin/env python
"""
Tests for the dataset-shift lab: synthetic data, built-in classifiers, shift scenarios and experiments.
"""

import csv
import math
import tempfile
import unittest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from protclass.cox import ThetaGrid
from protclass.errors import ConfigError, DegenerateDataError
from protclass.jumper import JumperConfig
from protclass.shift import (
    CONCEPT_SHIFT,
    GAUSSIAN_NAIVE_BAYES,
    LOGISTIC_REGRESSION,
    UNPERTURBED,
    X_IMBALANCE,
    Y_IMBALANCE,
    Dataset,
    ShiftScenario,
    SyntheticSpec,
    apply_scenario,
    fit_simple,
    generate,
    predict_proba,
    run_scenario_experiment,
)


class TestSyntheticData(unittest.TestCase):
    """Test the synthetic generator."""

    def test_default_shapes(self):
        """Test K = 2 defaults give 2000 train and 1000 test rows of 20 features."""
        train, test = generate(SyntheticSpec())
        self.assertEqual(train.X.shape, (2000, 20))
        self.assertEqual(test.X.shape, (1000, 20))
        self.assertEqual(set(np.unique(train.y)), {0, 1})

    def test_deterministic(self):
        """Test the same seed gives identical datasets."""
        a_train, a_test = generate(SyntheticSpec(seed=7))
        b_train, b_test = generate(SyntheticSpec(seed=7))
        self.assertTrue(a_train.identical_to(b_train))
        self.assertTrue(a_test.identical_to(b_test))

    def test_seed_changes_data(self):
        """Test different seeds give different datasets."""
        a, _ = generate(SyntheticSpec(seed=1))
        b, _ = generate(SyntheticSpec(seed=2))
        self.assertFalse(a.identical_to(b))

    def test_balanced_classes(self):
        """Test class counts differ by at most one."""
        train, _ = generate(SyntheticSpec(K=3, n_train=301, n_test=10))
        counts = np.bincount(train.y, minlength=3)
        self.assertLessEqual(counts.max() - counts.min(), 1)

    def test_invalid_specs(self):
        """Test inconsistent settings are rejected."""
        with self.assertRaises(ConfigError):
            SyntheticSpec(n_informative=25, n_features=20)
        with self.assertRaises(ConfigError):
            SyntheticSpec(K=1)
        with self.assertRaises(ConfigError):
            SyntheticSpec(K=5, n_train=3)

    def test_no_separation_is_chance(self):
        """Test zero cluster separation leaves logistic accuracy near 0.5 at n = 10^4."""
        train, test = generate(SyntheticSpec(n_train=10_000, n_test=10_000, separation=0.0, seed=3))
        model = fit_simple(LOGISTIC_REGRESSION, train)
        accuracy = float(np.mean(model.predict_proba(test.X).argmax(axis=1) == test.y))
        self.assertAlmostEqual(accuracy, 0.5, delta=0.05)


class TestSimpleModels(unittest.TestCase):
    """Test the built-in classifiers."""

    def test_logistic_separable(self):
        """Test logistic regression separates well-separated clusters."""
        train, _ = generate(SyntheticSpec(separation=5.0, n_train=1000, n_test=10))
        model = fit_simple(LOGISTIC_REGRESSION, train)
        accuracy = float(np.mean(model.predict_proba(train.X).argmax(axis=1) == train.y))
        self.assertGreaterEqual(accuracy, 0.99)

    def test_naive_bayes_midpoint(self):
        """Test naive Bayes on mirror-image classes predicts [0.5, 0.5] at the midpoint."""
        X = np.array([[-1.0, 1.0], [-3.0, -1.0], [1.0, 1.0], [3.0, -1.0]])
        model = fit_simple(GAUSSIAN_NAIVE_BAYES, Dataset(X=X, y=[0, 0, 1, 1], K=2))
        np.testing.assert_allclose(predict_proba(model, [0.0, 0.0]).entries, [0.5, 0.5], atol=1e-12)

    def test_rows_sum_to_one(self):
        """Test both classifiers return rows on the simplex."""
        train, test = generate(SyntheticSpec(K=3, n_train=300, n_test=50))
        for kind in (LOGISTIC_REGRESSION, GAUSSIAN_NAIVE_BAYES):
            probs = fit_simple(kind, train).predict_proba(test.X)
            self.assertEqual(probs.shape, (50, 3))
            np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_unknown_kind(self):
        """Test an unknown classifier name is rejected."""
        train, _ = generate(SyntheticSpec(n_train=20, n_test=5))
        with self.assertRaises(ConfigError):
            fit_simple("random_forest", train)

    def test_single_class(self):
        """Test training on one class is refused."""
        data = Dataset(X=np.zeros((4, 2)), y=[1, 1, 1, 1], K=2)
        with self.assertRaises(DegenerateDataError):
            fit_simple(LOGISTIC_REGRESSION, data)

    def test_naive_bayes_missing_class(self):
        """Test naive Bayes needs every class."""
        data = Dataset(X=np.arange(8.0).reshape(4, 2), y=[0, 0, 1, 1], K=3)
        with self.assertRaises(DegenerateDataError):
            fit_simple(GAUSSIAN_NAIVE_BAYES, data)


class TestScenarios(unittest.TestCase):
    """Test shift scenarios."""

    def setUp(self):
        _, self.test = generate(SyntheticSpec(seed=5))

    def test_unperturbed_identity(self):
        """Test the unperturbed scenario keeps the test set and its order."""
        stream = apply_scenario(self.test, ShiftScenario(UNPERTURBED))
        self.assertTrue(stream.identical_to(self.test))

    def test_concept_shift_tail(self):
        """Test concept shift flips exactly the last 500 labels."""
        stream = apply_scenario(self.test, ShiftScenario(CONCEPT_SHIFT, 500, permute_after=False))
        np.testing.assert_array_equal(stream.X, self.test.X)
        np.testing.assert_array_equal(stream.y[:500], self.test.y[:500])
        np.testing.assert_array_equal(stream.y[500:], 1 - self.test.y[500:])

    def test_x_imbalance_tail(self):
        """Test x-imbalance keeps only tail rows with a negative first feature."""
        stream = apply_scenario(self.test, ShiftScenario(X_IMBALANCE, 500, permute_after=False))
        kept = int(np.sum(self.test.X[500:, 0] < 0.0))
        self.assertEqual(len(stream), 500 + kept)
        np.testing.assert_array_equal(stream.X[:500], self.test.X[:500])
        self.assertTrue(np.all(stream.X[500:, 0] < 0.0))

    def test_y_imbalance_tail(self):
        """Test y-imbalance shrinks the tail by its class-0 count."""
        stream = apply_scenario(self.test, ShiftScenario(Y_IMBALANCE, 500, permute_after=False))
        zeros = int(np.sum(self.test.y[500:] == 0))
        self.assertEqual(len(stream), 1000 - zeros)
        self.assertTrue(np.all(stream.y[500:] == 1))

    def test_permutation_keeps_rows(self):
        """Test shuffling reorders rows without changing the multiset of labels."""
        fixed = apply_scenario(self.test, ShiftScenario(CONCEPT_SHIFT, 500, permute_after=False))
        shuffled = apply_scenario(self.test, ShiftScenario(CONCEPT_SHIFT, 500, permute_after=True), seed=1)
        self.assertEqual(len(fixed), len(shuffled))
        np.testing.assert_array_equal(np.sort(fixed.y), np.sort(shuffled.y))
        self.assertFalse(np.array_equal(fixed.y, shuffled.y))

    def test_concept_shift_requires_binary(self):
        """Test concept shift refuses K > 2."""
        _, test = generate(SyntheticSpec(K=3, n_test=600))
        with self.assertRaises(ConfigError):
            apply_scenario(test, ShiftScenario(CONCEPT_SHIFT))

    def test_tail_longer_than_test(self):
        """Test a tail beyond the test set is rejected."""
        with self.assertRaises(ConfigError):
            apply_scenario(self.test, ShiftScenario(Y_IMBALANCE, 1001))

    def test_unknown_kind(self):
        """Test unknown scenario names are rejected."""
        with self.assertRaises(ConfigError):
            ShiftScenario("label_noise")


class TestExperiment(unittest.TestCase):
    """Test scenario experiments."""

    def test_neutral_grid_protected_equals_base(self):
        """Test a neutral-only grid gives protected metrics equal to the standard ones."""
        config = JumperConfig(grid=ThetaGrid.neutral_only(2))
        table = run_scenario_experiment(
            SyntheticSpec(n_train=400, n_test=300),
            ShiftScenario(UNPERTURBED, 100),
            LOGISTIC_REGRESSION,
            baselines=(),
            seeds=(0, 1),
            config=config,
        )
        standard = (UNPERTURBED, LOGISTIC_REGRESSION, "base", False)
        protected = (UNPERTURBED, LOGISTIC_REGRESSION, "base", True)
        for metric in ("log_loss", "brier", "ece", "accuracy", "auc"):
            for a, b in zip(table.values(standard, metric), table.values(protected, metric)):
                self.assertAlmostEqual(a, b, places=9)

    def test_concept_shift_protection_helps(self):
        """Test protection lowers mean ECE and log loss under concept shift over 5 seeds."""
        table = run_scenario_experiment(
            SyntheticSpec(), ShiftScenario(CONCEPT_SHIFT, 500), LOGISTIC_REGRESSION, baselines=()
        )
        standard = (CONCEPT_SHIFT, LOGISTIC_REGRESSION, "base", False)
        protected = (CONCEPT_SHIFT, LOGISTIC_REGRESSION, "base", True)
        self.assertLess(table.mean(protected, "ece"), table.mean(standard, "ece"))
        self.assertLess(table.mean(protected, "log_loss"), table.mean(standard, "log_loss"))

    def test_y_imbalance_protection_helps(self):
        """Test protection does not raise mean ECE or log loss under y-imbalance over 5 seeds."""
        table = run_scenario_experiment(
            SyntheticSpec(), ShiftScenario(Y_IMBALANCE, 500), LOGISTIC_REGRESSION, baselines=()
        )
        standard = (Y_IMBALANCE, LOGISTIC_REGRESSION, "base", False)
        protected = (Y_IMBALANCE, LOGISTIC_REGRESSION, "base", True)
        self.assertEqual(len(table.values(protected, "ece")), 5)
        self.assertLessEqual(table.mean(protected, "ece"), table.mean(standard, "ece"))
        self.assertLessEqual(table.mean(protected, "log_loss"), table.mean(standard, "log_loss"))

    def test_y_imbalance_regret_bounded(self):
        """Test the protected regret stays within log 2 on every seed."""
        table = run_scenario_experiment(SyntheticSpec(), ShiftScenario(Y_IMBALANCE, 500), GAUSSIAN_NAIVE_BAYES)
        for calibrator in ("base", "platt", "temperature", "isotonic"):
            key = (Y_IMBALANCE, GAUSSIAN_NAIVE_BAYES, calibrator, True)
            regrets = table.values(key, "regret")
            self.assertEqual(len(regrets), 5)
            for regret in regrets:
                self.assertLessEqual(regret, math.log(2.0) + 1e-9)

    def test_table_rows_and_csv(self):
        """Test the table lists every cell and writes a matching CSV."""
        table = run_scenario_experiment(
            SyntheticSpec(n_train=300, n_test=200),
            ShiftScenario(CONCEPT_SHIFT, 100),
            LOGISTIC_REGRESSION,
            seeds=(0, 1),
        )
        self.assertEqual(len(table.cells()), 8)
        header = table.header()
        self.assertEqual(header[-2:], ["seed_0", "seed_1"])
        rows = table.rows()
        # five metrics per cell plus regret for the four protected cells
        self.assertEqual(len(rows), 8 * 5 + 4)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "table.csv")
            table.write_csv(path)
            with open(path, newline="") as handle:
                written = list(csv.reader(handle))
        self.assertEqual(written[0], header)
        self.assertEqual(len(written), len(rows) + 1)
        self.assertIn(written[1][3], ("true", "false"))

    def test_grid_class_count_mismatch(self):
        """Test a jumper grid for the wrong class count is rejected."""
        with self.assertRaises(ConfigError):
            run_scenario_experiment(
                SyntheticSpec(n_train=100, n_test=50),
                ShiftScenario(UNPERTURBED, 10),
                LOGISTIC_REGRESSION,
                config=JumperConfig.default(K=3),
            )


if __name__ == "__main__":
    unittest.main()
