#!/usr/bin/env python
"""
File Description: Implementations of the command-line subcommands.

Each cmd_* function does the work of one subcommand, writes its files and returns a JSON-ready summary. Argument
parsing lives in protclass.cli and the plugin handlers in tools/ call these functions directly.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import csv
import json
import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from protclass.config import ExperimentConfig, RunConfig, jumper_fingerprint, load_experiment_config
from protclass.errors import StreamFormatError
from protclass.jumper import JumperConfig, theta_weights
from protclass.martingale import MartingaleLedger
from protclass.metrics import cumulative_losses, evaluate, reliability
from protclass.oracle import OracleCheckReport, run_oracle_battery
from protclass.prequential import PrequentialDriver, prequential_drive
from protclass.shift.datasets import SyntheticSpec, generate
from protclass.shift.experiment import ExperimentTable, run_scenario_experiment
from protclass.shift.models import LOGISTIC_REGRESSION, fit_simple
from protclass.shift.scenarios import ShiftScenario, apply_scenario
from protclass.streams import DEFAULT_CLAMP_EPSILON, LabeledStream, clamp_probs, emit_stream, parse_stream

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PROTECTED_FIELD = "p_protected"
BOUND_SLACK = 1e-9


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}.{suffix}")


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")


def _write_rows(path: Path, header: list, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _regret(stream: LabeledStream, protected: np.ndarray) -> float:
    rows = np.arange(len(stream))
    return float(np.sum(np.log(stream.probs[rows, stream.labels]) - np.log(protected[rows, stream.labels])))


# ****************************************        Function Declaration        **************************************** #
def cmd_calibrate(
    stream_path: PathLike,
    output_path: PathLike,
    run: Optional[RunConfig] = None,
    fmt: Optional[str] = None,
    report_path: Optional[PathLike] = None,
    reliability_path: Optional[PathLike] = None,
    cumulative_path: Optional[PathLike] = None,
    weights_path: Optional[PathLike] = None,
) -> dict:
    """
    Protect a stream of base predictions and report on the result.

    Writes the per-step file (input records plus p_protected), a JSON report comparing base and protected metrics,
    reliability points and cumulative losses as CSV, and optionally the per-step calibrator weights.

    :param stream_path: Input stream (jsonl or csv).
    :param output_path: Per-step output; its format follows its suffix.
    :param run: Settings; defaults when omitted.
    :param fmt: Input format when the suffix does not tell.
    :param report_path: Defaults to <output stem>.report.json next to the output.
    :param reliability_path: Defaults to <output stem>.reliability.csv.
    :param cumulative_path: Defaults to <output stem>.cumulative.csv.
    :param weights_path: Written only when given.
    :return: The report.
    """
    run = run or RunConfig()
    output_path = Path(output_path)
    stream = parse_stream(stream_path, fmt, epsilon=run.clamp_epsilon)
    if len(stream) == 0:
        raise StreamFormatError("stream holds no records", path=str(stream_path))
    config = run.jumper_config(stream.K)

    driver = PrequentialDriver(config)
    ledger = MartingaleLedger(config.grid)
    protected = np.empty_like(stream.probs)
    weights = []
    for i, record in enumerate(stream):
        driver.predict_one(record.p)
        outcome = driver.learn_one(record.y)
        protected[i] = outcome.protected_p.entries
        ledger.record(outcome, record.y)
        if weights_path is not None:
            weights.append(theta_weights(driver.state))

    emit_stream(stream, output_path, extra={PROTECTED_FIELD: protected})
    base_report = evaluate(stream.probs, stream.labels, bins=run.ece_bins, norm=run.ece_norm)
    protected_report = evaluate(protected, stream.labels, bins=run.ece_bins, norm=run.ece_norm)
    regret = _regret(stream, protected)
    best, best_value = ledger.best_calibrator()

    report_path = Path(report_path) if report_path else _sibling(output_path, "report.json")
    reliability_path = Path(reliability_path) if reliability_path else _sibling(output_path, "reliability.csv")
    cumulative_path = Path(cumulative_path) if cumulative_path else _sibling(output_path, "cumulative.csv")

    rel_rows = []
    for variant, probs in (("base", stream.probs), ("protected", protected)):
        curve = reliability(probs, stream.labels, bins=run.ece_bins)
        rel_rows.extend([variant, *row] for row in curve.rows())
    _write_rows(reliability_path, ["variant", "class", "bin", "mean_predicted", "frequency", "weight"], rel_rows)

    base_log, base_brier = cumulative_losses(stream.probs, stream.labels)
    prot_log, prot_brier = cumulative_losses(protected, stream.labels)
    _write_rows(
        cumulative_path,
        ["step", "base_log_loss", "protected_log_loss", "base_brier", "protected_brier"],
        (
            [n + 1, float(base_log[n]), float(prot_log[n]), float(base_brier[n]), float(prot_brier[n])]
            for n in range(len(stream))
        ),
    )
    outputs = {
        "per_step": str(output_path),
        "report": str(report_path),
        "reliability": str(reliability_path),
        "cumulative": str(cumulative_path),
    }
    if weights_path is not None:
        weights_path = Path(weights_path)
        _write_rows(
            weights_path,
            ["step"] + [f"theta_{i}" for i in range(len(config.grid))],
            ([n + 1, *map(float, w)] for n, w in enumerate(weights)),
        )
        outputs["weights"] = str(weights_path)

    report = {
        "n": len(stream),
        "K": stream.K,
        "clamp_epsilon": run.clamp_epsilon,
        "config_hash": run.config_hash(),
        "jumper_hash": jumper_fingerprint(config),
        "config": run.to_dict(),
        "grid": config.grid.to_list(),
        "base": base_report.to_dict(),
        "protected": protected_report.to_dict(),
        "regret": regret,
        "protection_bound": config.protection_cost,
        "within_bound": regret <= config.protection_cost + BOUND_SLACK,
        "best_calibrator": {"theta": best.to_dict(), "log_martingale": best_value},
        "outputs": outputs,
    }
    _write_json(report_path, report)
    logger.info(
        "calibrated %d records: log loss %.4f -> %.4f (regret %.4f, bound %.4f)",
        len(stream),
        base_report.log_loss,
        protected_report.log_loss,
        regret,
        config.protection_cost,
    )
    return report


# ****************************************        Function Declaration        **************************************** #
def cmd_simulate(
    output_path: PathLike,
    spec: Optional[SyntheticSpec] = None,
    scenario: Optional[ShiftScenario] = None,
    model_kind: str = LOGISTIC_REGRESSION,
    fmt: Optional[str] = None,
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON,
) -> dict:
    """
    Generate a synthetic dataset, train a built-in classifier and save its predictions as streams.

    The test stream (after the scenario) goes to output_path; the calibration split, predicted by the same model,
    goes to <output stem>.calibration.<suffix>.
    """
    spec = spec or SyntheticSpec()
    scenario = scenario or ShiftScenario()
    output_path = Path(output_path)
    train, test = generate(spec)
    half = len(train) // 2
    model = fit_simple(model_kind, train.take(slice(0, half)))
    calibration = train.take(slice(half, None))
    shifted = apply_scenario(test, scenario, seed=spec.seed)

    test_stream = LabeledStream(clamp_probs(model.predict_proba(shifted.X), clamp_epsilon), shifted.y)
    calibration_stream = LabeledStream(clamp_probs(model.predict_proba(calibration.X), clamp_epsilon), calibration.y)
    calibration_path = output_path.with_name(f"{output_path.stem}.calibration{output_path.suffix}")
    emit_stream(test_stream, output_path, fmt)
    emit_stream(calibration_stream, calibration_path, fmt)
    logger.info("simulated %s: %d test records written to %s", scenario.kind, len(test_stream), output_path)
    return {
        "spec": spec.to_dict(),
        "scenario": {"kind": scenario.kind, "affected_tail": scenario.affected_tail,
                     "permute_after": scenario.permute_after},
        "classifier": model_kind,
        "test_records": len(test_stream),
        "calibration_records": len(calibration_stream),
        "outputs": {"test": str(output_path), "calibration": str(calibration_path)},
    }


# ****************************************        Function Declaration        **************************************** #
def run_experiment(config: ExperimentConfig) -> ExperimentTable:
    """Every scenario crossed with every classifier, merged into one table."""
    jumper = config.run.jumper_config(config.K)
    table: Optional[ExperimentTable] = None
    for kind in config.scenarios:
        for classifier in config.classifiers:
            part = run_scenario_experiment(
                config.synthetic_spec(config.seeds[0]),
                config.scenario(kind),
                classifier,
                protection=config.protection,
                baselines=config.baselines,
                seeds=config.seeds,
                config=jumper,
                clamp_epsilon=config.run.clamp_epsilon,
                ece_bins=config.run.ece_bins,
                ece_norm=config.run.ece_norm,
            )
            table = part if table is None else table.merge(part)
    return table


def cmd_experiment(config_path: PathLike, output_path: PathLike) -> dict:
    """Run the battery described by a config file and write the metrics table as CSV."""
    config = load_experiment_config(config_path)
    table = run_experiment(config)
    table.write_csv(output_path)
    logger.info("experiment table with %d cells written to %s", len(table.cells()), output_path)
    return {"cells": len(table.cells()), "rows": len(table.rows()), "output": str(output_path),
            "config_hash": config.run.config_hash()}


def cmd_oracle_check(
    instances: int = 100, seed: int = 0, tolerance: float = 1e-9, report_path: Optional[PathLike] = None
) -> OracleCheckReport:
    report = run_oracle_battery(instances=instances, seed=seed, tolerance=tolerance)
    if report_path is not None:
        _write_json(Path(report_path), report.to_dict())
    return report


# ****************************************        Function Declaration        **************************************** #
def cmd_prequential(
    stream_path: PathLike,
    output_path: PathLike,
    run: Optional[RunConfig] = None,
    fmt: Optional[str] = None,
    resume_from: Optional[PathLike] = None,
    checkpoint_path: Optional[PathLike] = None,
    checkpoint_every: Optional[int] = None,
    stop_after: Optional[int] = None,
) -> Dict[str, object]:
    """
    Replay a stream one record at a time, optionally resuming from and writing snapshots.

    The per-step file holds the records processed by this call only.
    """
    run = run or RunConfig()
    stream = parse_stream(stream_path, fmt, epsilon=run.clamp_epsilon)
    config: JumperConfig = run.jumper_config(stream.K)
    outcomes, state = prequential_drive(
        stream,
        config,
        resume_from=resume_from,
        checkpoint_path=checkpoint_path,
        checkpoint_every=checkpoint_every,
        stop_after=stop_after,
    )
    start = state.step_count - len(outcomes)
    processed = stream.window(start, state.step_count)
    protected = np.array([o.protected_p.entries for o in outcomes]).reshape(len(outcomes), stream.K)
    emit_stream(processed, output_path, extra={PROTECTED_FIELD: protected})
    return {
        "first_step": start + 1,
        "last_step": state.step_count,
        "records": len(stream),
        "snapshot": str(checkpoint_path) if checkpoint_path is not None else None,
        "output": str(output_path),
        "jumper_hash": jumper_fingerprint(config),
    }
