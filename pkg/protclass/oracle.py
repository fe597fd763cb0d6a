#!/usr/bin/env python
"""
File Description: Brute-force trajectory oracle for the Composite Jumper.

The Composite Jumper is the posterior predictive of a mixture: the base predictor with prior weight pi, plus, for
each jump rate J, a Markov chain over calibrators that starts on the neutral calibrator and, before every prediction
(including the first), stays put with probability 1 - J or jumps to a uniformly drawn calibrator with probability J.

This module evaluates that mixture by listing every calibrator trajectory explicitly. It shares no arithmetic with the
engine's recursion, so agreement between the two checks the recursion. Only tiny instances are feasible.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from dataclasses import dataclass
from itertools import product
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from protclass.cox import ProbVector, ThetaGrid, ThetaParams
from protclass.errors import ConfigError, OracleTooLargeError
from protclass.jumper import JumperConfig, process_stream
from protclass.streams import LabeledStream, StreamRecord

logger = logging.getLogger(__name__)

MAX_ENUMERATION = 10**6


# ****************************************        Function Declaration        **************************************** #
def transition_probability(jump_rate: float, n_thetas: int, same: bool) -> float:
    """Probability of moving between two calibrators in one step of the jump chain."""
    if same:
        return (1.0 - jump_rate) + jump_rate / n_thetas
    return jump_rate / n_thetas


def trajectory_weight(config: JumperConfig, jump_rate: float, trajectory: Sequence[int]) -> float:
    """
    Prior weight of one calibrator trajectory under one jump rate, (1 - pi) / |J| times its transition
    probabilities, starting from the neutral calibrator (index 0).
    """
    n = len(config.grid)
    weight = (1.0 - config.pi) / len(config.jump_rates)
    previous = 0
    for theta in trajectory:
        weight *= transition_probability(jump_rate, n, theta == previous)
        previous = theta
    return weight


def _guard(config: JumperConfig, horizon: int):
    size = len(config.grid) ** horizon * len(config.jump_rates)
    if size > MAX_ENUMERATION:
        raise OracleTooLargeError(
            f"{len(config.grid)}^{horizon} trajectories x {len(config.jump_rates)} jump rates = {size} "
            f"exceeds the enumeration limit {MAX_ENUMERATION}"
        )


def prior_mass(config: JumperConfig, horizon: int) -> float:
    """pi plus the prior weight of every length-`horizon` trajectory under every jump rate; 1 up to rounding."""
    _guard(config, horizon)
    total = config.pi
    for rate in config.jump_rates:
        for trajectory in product(range(len(config.grid)), repeat=horizon):
            total += trajectory_weight(config, rate, trajectory)
    return total


# ****************************************        Function Declaration        **************************************** #
def enumerate_predict(
    config: JumperConfig, stream: Union[LabeledStream, Iterable], horizon: Optional[int] = None
) -> List[ProbVector]:
    """
    Posterior-predictive mixture at each of the first `horizon` steps, by explicit enumeration.

    At step t every trajectory prefix of length t + 1 is listed once. Its weight is the prior weight of the prefix
    times the probabilities its calibrators gave the observed labels on steps before t. Later steps never enter.

    :param config: Engine configuration (grid, pi, jump rates).
    :param stream: Records (p, y); only the first `horizon` are used.
    :param horizon: Number of steps; defaults to the stream length.
    :return: One prediction per step.
    :raises OracleTooLargeError: If |grid|^horizon * |J| exceeds 10^6.
    """
    records: List[Tuple[np.ndarray, int]] = []
    for rec in stream:
        if isinstance(rec, StreamRecord):
            records.append((np.asarray(rec.p, dtype=float), rec.y))
        else:
            records.append((np.asarray(rec[0], dtype=float), int(rec[1])))
    if horizon is None:
        horizon = len(records)
    if horizon > len(records):
        raise ConfigError(f"horizon {horizon} exceeds stream length {len(records)}")
    if horizon == 0:
        return []
    _guard(config, horizon)

    n_thetas = len(config.grid)
    probs = [p / p.sum() for p, _ in records[:horizon]]
    labels = [y for _, y in records[:horizon]]
    calibrated = [np.array([_cox(p, theta) for theta in config.grid]) for p in probs]
    likelihood = [[float(calibrated[t][i, labels[t]]) for i in range(n_thetas)] for t in range(horizon)]

    predictions: List[ProbVector] = []
    base_weight = config.pi
    for t in range(horizon):
        # weight on the calibrator in use at step t, summed over prefixes ending there
        theta_mass = np.zeros(n_thetas)
        for rate in config.jump_rates:
            for prefix in product(range(n_thetas), repeat=t + 1):
                weight = trajectory_weight(config, rate, prefix)
                for s in range(t):
                    weight *= likelihood[s][prefix[s]]
                theta_mass[prefix[t]] += weight
        mixture = base_weight * probs[t] + theta_mass @ calibrated[t]
        total = base_weight + theta_mass.sum()
        predictions.append(ProbVector._trusted(mixture / total))
        base_weight *= probs[t][labels[t]]
    return predictions


def _cox(p: np.ndarray, theta: ThetaParams) -> np.ndarray:
    numer = np.array([p[k] ** theta.beta * np.exp(theta.alpha[k]) for k in range(len(p))])
    return numer / numer.sum()


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class OracleCheckReport:
    """Outcome of a randomised oracle battery."""

    instances: int
    passed: int
    max_abs_error: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.passed == self.instances

    def to_dict(self) -> dict:
        return {
            "instances": self.instances,
            "passed": self.passed,
            "max_abs_error": self.max_abs_error,
            "tolerance": self.tolerance,
            "ok": self.ok,
        }


def random_instance(rng: np.random.Generator, max_steps: int = 6, max_thetas: int = 4, max_rates: int = 2):
    """
    Draw a tiny random oracle instance: config and stream with n <= max_steps, K in {2, 3}.

    :return: (JumperConfig, list of (p, y) pairs)
    """
    K = int(rng.choice([2, 3]))
    n_thetas = int(rng.integers(1, max_thetas + 1))
    members = [ThetaParams.neutral(K)]
    while len(members) < n_thetas:
        candidate = ThetaParams(
            alpha=tuple(rng.choice([0.0, 1.0, -1.0, 0.5], size=K)),
            beta=float(rng.choice([0.5, 1.0, 2.0, 3.0])),
        )
        if not any(candidate.same_as(m) for m in members):
            members.append(candidate)
    n_rates = int(rng.integers(1, max_rates + 1))
    rates = tuple(float(r) for r in rng.choice([0.5, 0.2, 0.1, 0.01], size=n_rates, replace=False))
    config = JumperConfig(grid=ThetaGrid(members), pi=float(rng.uniform(0.05, 0.95)), jump_rates=rates)
    n_steps = int(rng.integers(1, max_steps + 1))
    stream = []
    for _ in range(n_steps):
        p = rng.dirichlet(np.ones(K))
        p = np.clip(p, 1e-3, None)
        stream.append((p / p.sum(), int(rng.integers(K))))
    return config, stream


def max_deviation(config: JumperConfig, stream: Sequence) -> float:
    """Largest absolute difference between engine and oracle predictions over the stream."""
    outcomes, _ = process_stream(config, stream)
    expected = enumerate_predict(config, stream)
    deviation = 0.0
    for outcome, oracle_p in zip(outcomes, expected):
        deviation = max(deviation, float(np.max(np.abs(outcome.protected_p.entries - oracle_p.entries))))
    return deviation


def run_oracle_battery(instances: int = 100, seed: int = 0, tolerance: float = 1e-9) -> OracleCheckReport:
    """Compare engine and oracle on `instances` random tiny instances."""
    rng = np.random.default_rng(seed)
    passed = 0
    worst = 0.0
    for i in range(instances):
        config, stream = random_instance(rng)
        deviation = max_deviation(config, stream)
        worst = max(worst, deviation)
        if deviation < tolerance:
            passed += 1
        else:
            logger.warning("oracle instance %d deviates by %.3g", i, deviation)
    logger.info("oracle battery: %d/%d within %g (max deviation %.3g)", passed, instances, tolerance, worst)
    return OracleCheckReport(instances=instances, passed=passed, max_abs_error=worst, tolerance=tolerance)
