#!/usr/bin/env python
"""
Tests for the plugin tool handlers: every handler returns a JSON string and reports failures as {"error": ...}.
"""

import json
import math
import tempfile
import unittest
import sys
import os
from pathlib import Path

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from tools import handle_calibrate, handle_experiment, handle_oracle_check, handle_simulate


class TestCalibrateTool(unittest.TestCase):
    """Test the calibrate handler."""

    def test_inline_records(self):
        """Test inline records are protected and reported without written outputs."""
        records = [{"p": [0.8, 0.2], "y": 0}, {"p": [0.3, 0.7], "y": 1}, {"p": [0.9, 0.1], "y": 1}]
        result = json.loads(handle_calibrate({"records": records, "pi": 0.25}))
        self.assertNotIn("error", result)
        self.assertEqual(result["n"], 3)
        self.assertAlmostEqual(result["protection_bound"], math.log(4.0), places=12)
        self.assertTrue(result["within_bound"])
        self.assertNotIn("outputs", result)

    def test_stream_path_with_output(self):
        """Test a stream file with an output path keeps the written files."""
        with tempfile.TemporaryDirectory() as tmp:
            stream = Path(tmp) / "s.jsonl"
            stream.write_text('{"p": [0.6, 0.4], "y": 0}\n{"p": [0.2, 0.8], "y": 1}\n')
            output = Path(tmp) / "out.jsonl"
            result = json.loads(handle_calibrate({"stream_path": str(stream), "output_path": str(output)}))
            self.assertEqual(result["outputs"]["per_step"], str(output))
            self.assertTrue(output.exists())

    def test_errors_are_returned(self):
        """Test missing input, malformed records and bad settings come back as errors."""
        self.assertIn("error", json.loads(handle_calibrate({})))
        self.assertIn("error", json.loads(handle_calibrate({"records": []})))
        self.assertIn("error", json.loads(handle_calibrate({"records": [{"p": [0.5, 0.5]}]})))
        self.assertIn("error", json.loads(handle_calibrate({"records": [{"p": [0.5, 0.5], "y": 0}], "pi": 2.0})))


class TestOtherTools(unittest.TestCase):
    """Test the simulate, experiment and oracle-check handlers."""

    def test_simulate(self):
        """Test a small simulated stream is written."""
        with tempfile.TemporaryDirectory() as tmp:
            output = str(Path(tmp) / "s.csv")
            result = json.loads(
                handle_simulate({"output_path": output, "n_train": 100, "n_test": 50, "affected_tail": 20})
            )
            self.assertEqual(result["test_records"], 50)
            self.assertTrue(Path(output).exists())

    def test_simulate_errors(self):
        """Test a missing output path and an unknown scenario are reported."""
        self.assertIn("error", json.loads(handle_simulate({})))
        with tempfile.TemporaryDirectory() as tmp:
            params = {"output_path": str(Path(tmp) / "s.csv"), "scenario": "drift"}
            self.assertIn("error", json.loads(handle_simulate(params)))

    def test_experiment_errors(self):
        """Test missing paths and an unreadable config are reported."""
        self.assertIn("error", json.loads(handle_experiment({"config_path": "x.cfg"})))
        with tempfile.TemporaryDirectory() as tmp:
            params = {"config_path": str(Path(tmp) / "missing.cfg"), "output_path": str(Path(tmp) / "t.csv")}
            self.assertIn("error", json.loads(handle_experiment(params)))

    def test_oracle_check(self):
        """Test a short battery passes and bad instance counts are reported."""
        result = json.loads(handle_oracle_check({"instances": 3, "seed": 5}))
        self.assertTrue(result["ok"])
        self.assertIn("error", json.loads(handle_oracle_check({"instances": 0})))


if __name__ == "__main__":
    unittest.main()
