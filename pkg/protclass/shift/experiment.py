#!/usr/bin/env python
"""
File Description: Shift experiments comparing standard and protected predictions.

For every seed a dataset is drawn, a built-in classifier is trained on the first half of the training rows, the
baseline calibrators are fitted on the second half, and the chosen scenario turns the test set into a stream. Each
prediction variant (the raw base and each baseline) is scored as is and after a fresh Composite Jumper has been run
over the stream.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from protclass.baselines import make_baseline
from protclass.errors import ConfigError
from protclass.jumper import JumperConfig, process_stream
from protclass.metrics import DEFAULT_ECE_BINS, DEFAULT_ECE_NORM, MetricsReport, evaluate
from protclass.shift.datasets import SyntheticSpec, generate
from protclass.shift.models import fit_simple
from protclass.shift.scenarios import ShiftScenario, apply_scenario
from protclass.streams import DEFAULT_CLAMP_EPSILON, LabeledStream, clamp_probs

logger = logging.getLogger(__name__)

BASE = "base"
DEFAULT_BASELINES = ("platt", "temperature", "isotonic")
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
TABLE_METRICS = ("log_loss", "brier", "ece", "accuracy", "auc")
REGRET = "regret"

CellKey = Tuple[str, str, str, bool]


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass
class ExperimentTable:
    """
    Per-seed metrics of every (scenario, classifier, calibrator, protected) cell.

    regrets holds, for protected cells, the cumulative log loss of the protected stream minus that of the same
    calibrator's standard stream, one value per seed.
    """

    seeds: Tuple[int, ...]
    reports: Dict[CellKey, List[MetricsReport]] = field(default_factory=dict)
    regrets: Dict[CellKey, List[float]] = field(default_factory=dict)

    def cells(self) -> List[CellKey]:
        return list(self.reports)

    def values(self, key: CellKey, metric: str) -> List[Optional[float]]:
        if metric == REGRET:
            return list(self.regrets[key])
        return [getattr(report, metric) for report in self.reports[key]]

    def mean(self, key: CellKey, metric: str) -> Optional[float]:
        values = self.values(key, metric)
        if any(v is None for v in values):
            return None
        return float(np.mean(values))

    def merge(self, other: "ExperimentTable") -> "ExperimentTable":
        if other.seeds != self.seeds:
            raise ConfigError(f"cannot merge tables over different seeds {self.seeds} and {other.seeds}")
        return ExperimentTable(
            seeds=self.seeds,
            reports={**self.reports, **other.reports},
            regrets={**self.regrets, **other.regrets},
        )

    def header(self) -> List[str]:
        return ["scenario", "classifier", "calibrator", "protected", "metric", "mean"] + [
            f"seed_{s}" for s in self.seeds
        ]

    def rows(self) -> List[list]:
        out = []
        for key in self.reports:
            scenario, classifier, calibrator, protected = key
            metrics = TABLE_METRICS + ((REGRET,) if key in self.regrets else ())
            for metric in metrics:
                values = self.values(key, metric)
                if any(v is None for v in values):
                    continue
                out.append([scenario, classifier, calibrator, str(protected).lower(), metric, self.mean(key, metric)])
                out[-1].extend(values)
        return out

    def write_csv(self, path: Union[str, Path]):
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(self.header())
            for row in self.rows():
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


# ****************************************        Function Declaration        **************************************** #
def _protect(config: JumperConfig, probs: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, float]:
    stream = LabeledStream(probs, labels)
    outcomes, _ = process_stream(config, stream)
    protected = np.array([o.protected_p.entries for o in outcomes])
    rows = np.arange(len(labels))
    regret = float(np.sum(np.log(stream.probs[rows, labels]) - np.log(protected[rows, labels])))
    return protected, regret


def run_seed(
    spec: SyntheticSpec,
    scenario: ShiftScenario,
    model_kind: str,
    baselines: Sequence[str],
    protection: Sequence[bool],
    config: JumperConfig,
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON,
    ece_bins: int = DEFAULT_ECE_BINS,
    ece_norm: str = DEFAULT_ECE_NORM,
) -> Tuple[Dict[Tuple[str, bool], MetricsReport], Dict[str, float]]:
    """
    One seed of an experiment; spec.seed drives the data, the scenario shuffle and nothing else.

    :return: Reports keyed by (calibrator, protected) and the protected regret per calibrator.
    """
    train, test = generate(spec)
    half = len(train) // 2
    model = fit_simple(model_kind, train.take(slice(0, half)))
    calibration = train.take(slice(half, None))
    stream = apply_scenario(test, scenario, seed=spec.seed)
    if len(stream) == 0:
        raise ConfigError(f"scenario {scenario.kind} left an empty test stream")

    calibration_probs = clamp_probs(model.predict_proba(calibration.X), clamp_epsilon)
    test_probs = clamp_probs(model.predict_proba(stream.X), clamp_epsilon)
    variants = {BASE: test_probs}
    for name in baselines:
        calibrator = make_baseline(name, clamp_epsilon).fit(calibration_probs, calibration.y)
        variants[name] = calibrator.transform(test_probs)

    reports: Dict[Tuple[str, bool], MetricsReport] = {}
    regrets: Dict[str, float] = {}
    for name, probs in variants.items():
        if False in protection:
            reports[(name, False)] = evaluate(probs, stream.y, bins=ece_bins, norm=ece_norm)
        if True in protection:
            protected, regret = _protect(config, probs, stream.y)
            reports[(name, True)] = evaluate(protected, stream.y, bins=ece_bins, norm=ece_norm)
            regrets[name] = regret
            if regret > config.protection_cost + 1e-9:
                logger.warning("seed %d %s: regret %.6g exceeds log(1/pi)", spec.seed, name, regret)
    return reports, regrets


def run_scenario_experiment(
    spec: SyntheticSpec,
    scenario: ShiftScenario,
    model_kind: str,
    protection: Sequence[bool] = (False, True),
    baselines: Sequence[str] = DEFAULT_BASELINES,
    seeds: Iterable[int] = DEFAULT_SEEDS,
    config: Optional[JumperConfig] = None,
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON,
    ece_bins: int = DEFAULT_ECE_BINS,
    ece_norm: str = DEFAULT_ECE_NORM,
) -> ExperimentTable:
    """
    Run one scenario with one classifier over several seeds.

    :param spec: Dataset description; its seed is replaced by each experiment seed.
    :param scenario: Shift applied to the test set.
    :param model_kind: Built-in classifier.
    :param protection: Which variants to score: False for standard, True for protected.
    :param baselines: Baseline calibrators besides the raw base.
    :param seeds: Experiment seeds.
    :param config: Composite Jumper configuration; the default grid for spec.K when omitted.
    :return: A table with one cell per (calibrator, protected) pair.
    """
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ConfigError("at least one seed is required")
    if not protection:
        raise ConfigError("select at least one of the standard and protected variants")
    config = config if config is not None else JumperConfig.default(spec.K)
    if config.K != spec.K:
        raise ConfigError(f"jumper grid is for K={config.K}, dataset has K={spec.K}")

    table = ExperimentTable(seeds=seeds)
    for seed in seeds:
        reports, regrets = run_seed(
            replace(spec, seed=seed),
            scenario,
            model_kind,
            baselines,
            protection,
            config,
            clamp_epsilon=clamp_epsilon,
            ece_bins=ece_bins,
            ece_norm=ece_norm,
        )
        for (calibrator, protected), report in reports.items():
            key = (scenario.kind, model_kind, calibrator, protected)
            table.reports.setdefault(key, []).append(report)
            if protected:
                table.regrets.setdefault(key, []).append(regrets[calibrator])
        logger.info("%s / %s: seed %d done", scenario.kind, model_kind, seed)
    return table
