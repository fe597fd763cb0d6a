#!/usr/bin/env python
"""
Tests for the subcommand implementations and the command-line entry point.
"""

import csv
import json
import math
import tempfile
import unittest
import sys
import os
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO
from pathlib import Path

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from protclass.cli import EXIT_DOMAIN_ERROR, EXIT_OK, EXIT_USAGE_ERROR, main
from protclass.commands import cmd_calibrate, cmd_experiment, cmd_oracle_check, cmd_prequential, cmd_simulate
from protclass.config import RunConfig
from protclass.errors import StreamFormatError
from protclass.shift import CONCEPT_SHIFT, UNPERTURBED, ShiftScenario, SyntheticSpec
from protclass.streams import parse_stream

FIXTURE = Path(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))) / "protclass" / "data" / "calibrate_200.jsonl"


class CommandCase(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()


class TestCalibrate(CommandCase):
    """Test the calibrate command."""

    def test_report_on_fixture(self):
        """Test the report on the bundled 200-record stream."""
        out = self.dir / "protected.jsonl"
        report = cmd_calibrate(FIXTURE, out)
        self.assertEqual(report["n"], 200)
        self.assertEqual(report["K"], 2)
        self.assertEqual(len(report["grid"]), 9)
        self.assertAlmostEqual(report["protection_bound"], math.log(2.0), places=12)
        self.assertLessEqual(report["regret"], math.log(2.0) + 1e-9)
        self.assertTrue(report["within_bound"])
        for metric in ("log_loss", "brier", "ece", "accuracy", "auc"):
            self.assertIn(metric, report["base"])
            self.assertIn(metric, report["protected"])
        for key in ("per_step", "report", "reliability", "cumulative"):
            self.assertTrue(Path(report["outputs"][key]).exists())
        self.assertEqual(Path(report["outputs"]["report"]).name, "protected.report.json")
        saved = json.loads(Path(report["outputs"]["report"]).read_text())
        self.assertEqual(saved["config_hash"], report["config_hash"])

    def test_per_step_output(self):
        """Test the per-step file keeps every record and adds p_protected on the simplex."""
        out = self.dir / "protected.jsonl"
        cmd_calibrate(FIXTURE, out)
        records = [json.loads(line) for line in out.read_text().splitlines()]
        self.assertEqual(len(records), 200)
        self.assertEqual(records[0]["id"], "r001")
        for record in records:
            self.assertAlmostEqual(sum(record["p_protected"]), 1.0, delta=1e-9)

    def test_neutral_grid_passes_through(self):
        """Test a neutral-only grid returns the base predictions."""
        out = self.dir / "neutral.jsonl"
        report = cmd_calibrate(FIXTURE, out, RunConfig(betas=(1.0,), alpha_magnitudes=()))
        for line in out.read_text().splitlines():
            record = json.loads(line)
            np.testing.assert_allclose(record["p_protected"], record["p"], atol=1e-12)
        self.assertAlmostEqual(report["regret"], 0.0, delta=1e-9)

    def test_cumulative_and_weights(self):
        """Test the cumulative-loss and weights files have one row per step."""
        out = self.dir / "protected.csv"
        weights = self.dir / "weights.csv"
        report = cmd_calibrate(FIXTURE, out, weights_path=weights)
        with open(report["outputs"]["cumulative"], newline="") as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(rows[0][0], "step")
        self.assertEqual(len(rows), 201)
        with open(weights, newline="") as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(len(rows[0]), 1 + 9)
        self.assertEqual(len(rows), 201)
        # calibrator weights plus the base weight make up the whole ledger
        self.assertLessEqual(sum(float(v) for v in rows[-1][1:]), 1.0 + 1e-9)

    def test_empty_stream(self):
        """Test an empty stream is refused."""
        empty = self.dir / "empty.jsonl"
        empty.write_text("")
        with self.assertRaises(StreamFormatError):
            cmd_calibrate(empty, self.dir / "out.jsonl")


class TestSimulate(CommandCase):
    """Test the simulate command."""

    def test_deterministic_files(self):
        """Test two runs with the same seed write identical files."""
        spec = SyntheticSpec(n_train=200, n_test=100, seed=4)
        scenario = ShiftScenario(CONCEPT_SHIFT, 50)
        first = cmd_simulate(self.dir / "a.jsonl", spec, scenario)
        second = cmd_simulate(self.dir / "b.jsonl", spec, scenario)
        self.assertEqual((self.dir / "a.jsonl").read_text(), (self.dir / "b.jsonl").read_text())
        self.assertEqual(first["test_records"], 100)
        self.assertEqual(second["calibration_records"], 100)
        self.assertTrue((self.dir / "a.calibration.jsonl").exists())

    def test_output_is_a_stream(self):
        """Test the written file parses back as a binary stream."""
        cmd_simulate(self.dir / "s.csv", SyntheticSpec(n_train=100, n_test=60), ShiftScenario(UNPERTURBED, 0))
        stream = parse_stream(self.dir / "s.csv")
        self.assertEqual(len(stream), 60)
        self.assertEqual(stream.K, 2)


class TestExperimentAndOracle(CommandCase):
    """Test the experiment and oracle-check commands."""

    def test_experiment_cells(self):
        """Test 2 scenarios, 2 classifiers, 4 calibrators and 2 variants give 32 cells."""
        config = self.dir / "battery.cfg"
        config.write_text(
            "scenarios = unperturbed, concept_shift\n"
            "classifiers = logistic_regression, gaussian_naive_bayes\n"
            "baselines = platt, temperature, isotonic\n"
            "seeds = 0\nn_train = 200\nn_test = 100\naffected_tail = 50\n",
            encoding="utf-8",
        )
        out = self.dir / "table.csv"
        summary = cmd_experiment(config, out)
        self.assertEqual(summary["cells"], 32)
        with open(out, newline="") as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(len(rows) - 1, summary["rows"])

    def test_oracle_check(self):
        """Test a short battery passes and writes its report."""
        report_path = self.dir / "oracle.json"
        report = cmd_oracle_check(instances=10, seed=2, report_path=report_path)
        self.assertTrue(report.ok)
        self.assertEqual(json.loads(report_path.read_text())["passed"], 10)


class TestPrequentialCommand(CommandCase):
    """Test the prequential command."""

    def test_stop_and_resume(self):
        """Test an interrupted replay resumes where it stopped and matches calibrate."""
        snapshot = self.dir / "snap.json"
        first = cmd_prequential(FIXTURE, self.dir / "part1.jsonl", checkpoint_path=snapshot, stop_after=100)
        self.assertEqual((first["first_step"], first["last_step"]), (1, 100))
        second = cmd_prequential(FIXTURE, self.dir / "part2.jsonl", resume_from=snapshot)
        self.assertEqual((second["first_step"], second["last_step"]), (101, 200))
        self.assertEqual(first["jumper_hash"], second["jumper_hash"])

        cmd_calibrate(FIXTURE, self.dir / "full.jsonl")
        replayed = [
            json.loads(line)["p_protected"]
            for name in ("part1.jsonl", "part2.jsonl")
            for line in (self.dir / name).read_text().splitlines()
        ]
        full = [json.loads(line)["p_protected"] for line in (self.dir / "full.jsonl").read_text().splitlines()]
        self.assertEqual(replayed, full)


class TestCli(CommandCase):
    """Test exit codes of the entry point."""

    def run_main(self, argv):
        with redirect_stdout(StringIO()) as out, redirect_stderr(StringIO()):
            code = main(argv)
        return code, out.getvalue()

    def test_calibrate_ok(self):
        """Test a successful run exits 0 and prints a JSON summary."""
        code, out = self.run_main(["calibrate", str(FIXTURE), "-o", str(self.dir / "p.jsonl"), "--pi", "0.25"])
        self.assertEqual(code, EXIT_OK)
        summary = json.loads(out)
        self.assertAlmostEqual(summary["protection_bound"], math.log(4.0), places=12)
        self.assertTrue(summary["within_bound"])

    def test_usage_errors(self):
        """Test missing subcommands and unknown flags exit 2."""
        self.assertEqual(self.run_main([])[0], EXIT_USAGE_ERROR)
        self.assertEqual(self.run_main(["calibrate", str(FIXTURE), "--bogus"])[0], EXIT_USAGE_ERROR)
        self.assertEqual(self.run_main(["simulate", "-o", "x.csv", "--scenario", "drift"])[0], EXIT_USAGE_ERROR)

    def test_help_exits_zero(self):
        """Test --help exits 0."""
        self.assertEqual(self.run_main(["--help"])[0], EXIT_OK)

    def test_domain_errors(self):
        """Test a missing file, a bad stream and a bad setting exit 1."""
        out = str(self.dir / "p.jsonl")
        self.assertEqual(self.run_main(["calibrate", str(self.dir / "missing.jsonl"), "-o", out])[0], EXIT_DOMAIN_ERROR)
        bad = self.dir / "bad.jsonl"
        bad.write_text('{"p": [0.7, 0.7], "y": 0}\n')
        self.assertEqual(self.run_main(["calibrate", str(bad), "-o", out])[0], EXIT_DOMAIN_ERROR)
        self.assertEqual(self.run_main(["calibrate", str(FIXTURE), "-o", out, "--pi", "1.5"])[0], EXIT_DOMAIN_ERROR)

    def test_undecodable_stream_exits_one(self):
        """Test a stream with bytes that are not UTF-8 exits 1 and names the line."""
        bad = self.dir / "bytes.jsonl"
        bad.write_bytes(b'{"p": [0.7, 0.3], "y": 0}\n{"p": [0.7, 0.3], "y": 1, "id": "\xff\xfe"}\n')
        with redirect_stdout(StringIO()), redirect_stderr(StringIO()) as err:
            code = main(["calibrate", str(bad), "-o", str(self.dir / "p.jsonl")])
        self.assertEqual(code, EXIT_DOMAIN_ERROR)
        self.assertIn(":2:", err.getvalue())

    def test_oracle_check_command(self):
        """Test the oracle-check subcommand prints its report."""
        code, out = self.run_main(["oracle-check", "--instances", "5"])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(json.loads(out)["ok"])


if __name__ == "__main__":
    unittest.main()
