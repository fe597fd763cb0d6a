#!/usr/bin/env python
"""
Tests for the prequential driver and jumper snapshots.
"""

import json
import tempfile
import unittest
import sys
import os
from pathlib import Path

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from protclass.cox import build_default_grid
from protclass.errors import ProtocolError, SnapshotError
from protclass.jumper import JumperConfig, init, predict, process_stream
from protclass.prequential import (
    SNAPSHOT_FORMAT,
    PrequentialDriver,
    load_snapshot,
    prequential_drive,
    save_snapshot,
)
from protclass.streams import LabeledStream, clamp_probs


def random_labeled_stream(n, K, seed):
    rng = np.random.default_rng(seed)
    probs = clamp_probs(rng.dirichlet(np.ones(K), size=n))
    return LabeledStream(probs, rng.integers(0, K, size=n))


class SnapshotCase(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()


class TestDriver(unittest.TestCase):
    """Test the predict-then-learn driver."""

    def test_matches_process_stream(self):
        """Test the driver reproduces the engine's batch fold exactly."""
        config = JumperConfig.default(K=3)
        stream = random_labeled_stream(100, 3, 0)
        expected, final = process_stream(config, stream)
        outcomes, state = prequential_drive(stream, config)
        self.assertEqual([o.protected_p for o in outcomes], [o.protected_p for o in expected])
        self.assertEqual(state.P, final.P)
        np.testing.assert_array_equal(state.A, final.A)

    def test_label_before_prediction(self):
        """Test a label with nothing outstanding is a protocol error at step 1."""
        driver = PrequentialDriver(JumperConfig.default(K=2))
        with self.assertRaises(ProtocolError) as ctx:
            driver.learn_one(0)
        self.assertEqual(ctx.exception.step, 1)
        self.assertIn("step 1", str(ctx.exception))

    def test_two_predictions(self):
        """Test a second prediction before the label names the pending step."""
        driver = PrequentialDriver(JumperConfig.default(K=2))
        driver.predict_one([0.6, 0.4])
        driver.learn_one(0)
        driver.predict_one([0.6, 0.4])
        with self.assertRaises(ProtocolError) as ctx:
            driver.predict_one([0.5, 0.5])
        self.assertEqual(ctx.exception.step, 2)

    def test_learn_returns_normalizer(self):
        """Test the completed step carries C equal to the protected probability of the label."""
        driver = PrequentialDriver(JumperConfig.default(K=2))
        q = driver.predict_one([0.7, 0.3])
        outcome = driver.learn_one(1)
        self.assertEqual(outcome.normalizer_C, driver.state.normalizer)
        self.assertAlmostEqual(outcome.normalizer_C, q[1], delta=1e-12)
        self.assertEqual(driver.step_count, 1)


class TestSnapshots(SnapshotCase):
    """Test snapshot persistence."""

    def test_round_trip_exact(self):
        """Test a saved ledger loads back bit for bit."""
        config = JumperConfig.default(K=2)
        _, state = process_stream(config, random_labeled_stream(50, 2, 1))
        path = save_snapshot(self.dir / "snap.json", config, state)
        loaded = load_snapshot(path, config)
        self.assertEqual(loaded.P, state.P)
        np.testing.assert_array_equal(loaded.A, state.A)
        self.assertEqual(loaded.step_count, 50)
        self.assertEqual(json.loads(path.read_text())["format"], SNAPSHOT_FORMAT)

    def test_mixed_state_refused(self):
        """Test a ledger with an outstanding prediction cannot be saved."""
        config = JumperConfig.default(K=2)
        _, mixed = predict(config, init(config), [0.5, 0.5])
        with self.assertRaises(SnapshotError):
            save_snapshot(self.dir / "snap.json", config, mixed)

    def test_other_config_refused(self):
        """Test a snapshot cannot be loaded under a different configuration."""
        config = JumperConfig.default(K=2)
        path = save_snapshot(self.dir / "snap.json", config, init(config))
        with self.assertRaises(SnapshotError):
            load_snapshot(path, JumperConfig(grid=build_default_grid(2), pi=0.3))

    def test_version_checked(self):
        """Test an unknown version is refused."""
        config = JumperConfig.default(K=2)
        path = save_snapshot(self.dir / "snap.json", config, init(config))
        document = json.loads(path.read_text())
        document["version"] = 99
        path.write_text(json.dumps(document))
        with self.assertRaises(SnapshotError):
            load_snapshot(path, config)

    def test_garbage_refused(self):
        """Test a file that is not JSON is refused."""
        path = self.dir / "snap.json"
        path.write_text("not json")
        with self.assertRaises(SnapshotError):
            load_snapshot(path, JumperConfig.default(K=2))

    def edited_snapshot(self, config, edit):
        _, state = process_stream(config, random_labeled_stream(20, 2, 5))
        path = save_snapshot(self.dir / "snap.json", config, state)
        document = json.loads(path.read_text())
        edit(document["state"])
        path.write_text(json.dumps(document))
        return path

    def test_negative_entry_refused(self):
        """Test a ledger with a negative weight is refused even when the total is still 1."""
        config = JumperConfig.default(K=2)

        def edit(state):
            moved = state["A"][0][1] + 0.25
            state["A"][0][1] -= moved
            state["P"] += moved

        path = self.edited_snapshot(config, edit)
        with self.assertRaises(SnapshotError):
            load_snapshot(path, config)

    def test_mass_off_one_refused(self):
        """Test a ledger whose total mass is not 1 within 1e-9 is refused."""
        config = JumperConfig.default(K=2)

        def edit(state):
            state["P"] += 1e-6

        path = self.edited_snapshot(config, edit)
        with self.assertRaises(SnapshotError) as ctx:
            load_snapshot(path, config)
        self.assertIn("total mass", str(ctx.exception))


class TestResume(SnapshotCase):
    """Test interrupted runs."""

    def test_checkpoint_and_resume_identical(self):
        """Test stopping at step 500 and resuming gives the uninterrupted run."""
        config = JumperConfig.default(K=2)
        stream = random_labeled_stream(1000, 2, 2)
        full, full_state = prequential_drive(stream, config)

        snapshot = self.dir / "snap.json"
        first, _ = prequential_drive(stream, config, checkpoint_path=snapshot, stop_after=500)
        self.assertEqual(len(first), 500)
        second, state = prequential_drive(stream, config, resume_from=snapshot)
        self.assertEqual(len(second), 500)

        self.assertEqual([o.protected_p for o in first + second], [o.protected_p for o in full])
        self.assertEqual(state.P, full_state.P)
        np.testing.assert_array_equal(state.A, full_state.A)
        self.assertEqual(state.step_count, 1000)

    def test_periodic_checkpoints(self):
        """Test checkpoint_every writes snapshots as the run goes."""
        config = JumperConfig.default(K=2)
        stream = random_labeled_stream(30, 2, 3)
        snapshot = self.dir / "snap.json"
        prequential_drive(stream, config, checkpoint_path=snapshot, checkpoint_every=10, stop_after=25)
        self.assertEqual(load_snapshot(snapshot, config).step_count, 25)


if __name__ == "__main__":
    unittest.main()
