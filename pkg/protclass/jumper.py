#!/usr/bin/env python
"""
File Description: The Composite Jumper predictor.

The predictor mixes the base prediction with Cox-calibrated versions of it. Its capital ledger holds a weight P for
the base and a matrix A[J, theta] for every jump rate J and calibrator theta. Each step:

1. jump mixing: for each J, a fraction J of row J's mass is spread uniformly over all calibrators;
2. prediction: p' = P * p + sum_{J, theta} A[J, theta] * f_theta(p);
3. update: every weight is multiplied by the probability its component gave the observed label, then all weights
   are divided by their total C, which equals p'(y).

The protected predictor's cumulative log loss never exceeds the base's by more than log(1 / pi).
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from protclass.cox import ProbVector, ThetaGrid, build_default_grid
from protclass.errors import ConfigError, InvalidLabelError, InvalidProbabilityError, ProtocolError
from protclass.streams import LabeledStream, StreamRecord

logger = logging.getLogger(__name__)

DEFAULT_PI = 0.5
DEFAULT_JUMP_RATES = (1e-2, 1e-3, 1e-4)
UNDERFLOW_FLOOR = 1e-300


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True, eq=False)
class JumperConfig:
    """
    Parameters of the Composite Jumper: calibrator grid, base prior weight pi and the jump rates.

    :param grid: Calibrators; index 0 must be neutral.
    :param pi: Prior weight of the base component, in (0, 1).
    :param jump_rates: Distinct rates in (0, 1).
    """

    grid: ThetaGrid
    pi: float = DEFAULT_PI
    jump_rates: Tuple[float, ...] = DEFAULT_JUMP_RATES
    _rates: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.grid, ThetaGrid):
            raise ConfigError(f"grid must be a ThetaGrid, got {type(self.grid).__name__}")
        pi = float(self.pi)
        if not 0.0 < pi < 1.0:
            raise ConfigError(f"pi must lie in (0, 1), got {self.pi}")
        rates = tuple(float(j) for j in self.jump_rates)
        if not rates:
            raise ConfigError("at least one jump rate is required")
        if any(not 0.0 < j < 1.0 for j in rates):
            raise ConfigError(f"jump rates must lie in (0, 1), got {rates}")
        if len(set(rates)) != len(rates):
            raise ConfigError(f"jump rates must be distinct, got {rates}")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "jump_rates", rates)
        rate_arr = np.array(rates, dtype=float)
        rate_arr.flags.writeable = False
        object.__setattr__(self, "_rates", rate_arr)

    @classmethod
    def default(cls, K: int, pi: float = DEFAULT_PI) -> "JumperConfig":
        """Default grid for K classes with the default jump rates."""
        return cls(grid=build_default_grid(K), pi=pi)

    @property
    def K(self) -> int:
        return self.grid.K

    @property
    def protection_cost(self) -> float:
        """Worst-case cumulative log-loss regret against the base, log(1 / pi)."""
        return -math.log(self.pi)

    def to_dict(self) -> dict:
        return {"pi": self.pi, "jump_rates": list(self.jump_rates), "grid": self.grid.to_list()}


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True, eq=False)
class JumperState:
    """
    Capital ledger of the Composite Jumper.

    :param P: Base weight.
    :param A: Array of shape (len(jump_rates), len(grid)).
    :param step_count: Number of completed updates.
    :param normalizer: C from the most recent update (1.0 before the first).
    :param pending: Calibrated predictions of the current step once predict() has mixed the weights; None between
        steps. A state with pending set is a "mixed" state and must be passed to update().
    """

    P: float
    A: np.ndarray
    step_count: int = 0
    normalizer: float = 1.0
    pending: Optional[np.ndarray] = None

    @property
    def total_mass(self) -> float:
        return float(self.P + self.A.sum())

    @property
    def is_mixed(self) -> bool:
        return self.pending is not None


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class StepOutcome:
    """
    Result of one step.

    :param protected_p: Prediction of the Composite Jumper.
    :param base_p: The base prediction it was built from.
    :param normalizer_C: The update's normalising constant, equal to protected_p at the observed label. None until
        the label is known.
    """

    protected_p: ProbVector
    base_p: ProbVector
    normalizer_C: Optional[float] = None


# ****************************************        Function Declaration        **************************************** #
def init(config: JumperConfig) -> JumperState:
    """
    Initial ledger: P = pi and, for every jump rate, (1 - pi) / |J| on the neutral calibrator.
    """
    A = np.zeros((len(config.jump_rates), len(config.grid)))
    A[:, 0] = (1.0 - config.pi) / len(config.jump_rates)
    A.flags.writeable = False
    return JumperState(P=config.pi, A=A)


def _as_probs(p: Union[ProbVector, Sequence[float], np.ndarray], K: int) -> np.ndarray:
    if isinstance(p, ProbVector):
        arr = p.entries
    else:
        arr = ProbVector(p).entries
    if arr.shape[0] != K:
        raise InvalidProbabilityError(f"prediction has {arr.shape[0]} classes, engine is configured for {K}")
    return arr


def predict(
    config: JumperConfig, state: JumperState, p: Union[ProbVector, Sequence[float]]
) -> Tuple[StepOutcome, JumperState]:
    """
    Apply jump mixing to the ledger, then form the protected prediction.

    :param config: Engine configuration.
    :param state: Ledger after the previous update (or init).
    :param p: Base prediction for this step.
    :return: The outcome (without normalizer) and the mixed state to pass to update().
    :raises ProtocolError: If state is already mixed, i.e. a prediction is outstanding.
    """
    if state.pending is not None:
        raise ProtocolError("a prediction is already outstanding; supply its label first", step=state.step_count + 1)
    base = _as_probs(p, config.K)

    rates = config._rates[:, np.newaxis]
    row_mass = state.A.sum(axis=1, keepdims=True)
    mixed = (1.0 - rates) * state.A + rates * row_mass / len(config.grid)

    calibrated = config.grid.apply(base)
    calibrated.flags.writeable = False
    protected = state.P * base + mixed.sum(axis=0) @ calibrated

    mixed.flags.writeable = False
    mixed_state = replace(state, A=mixed, pending=calibrated)
    outcome = StepOutcome(protected_p=ProbVector._trusted(protected), base_p=ProbVector._trusted(base))
    return outcome, mixed_state


def update(
    config: JumperConfig, mixed_state: JumperState, p: Union[ProbVector, Sequence[float]], y: int
) -> JumperState:
    """
    Bayes-update the mixed ledger with the observed label and renormalise.

    :param config: Engine configuration.
    :param mixed_state: State returned by predict() for this step.
    :param p: The same base prediction that was passed to predict().
    :param y: Observed label in 0..K-1.
    :return: The ledger for the next step.
    :raises ProtocolError: If no prediction is outstanding.
    :raises InvalidLabelError: If y is out of range.
    """
    if mixed_state.pending is None:
        raise ProtocolError("label supplied before a prediction was requested", step=mixed_state.step_count + 1)
    base = _as_probs(p, config.K)
    if isinstance(y, bool) or not 0 <= int(y) < config.K:
        raise InvalidLabelError(f"label {y!r} outside 0..{config.K - 1}")
    y = int(y)

    P = mixed_state.P * base[y]
    A = mixed_state.A * mixed_state.pending[:, y]
    C = P + A.sum()
    if C <= 0.0:
        raise InvalidProbabilityError(
            f"every component assigned probability 0 to label {y} at step {mixed_state.step_count + 1}"
        )
    assert C >= UNDERFLOW_FLOOR, "Composite Jumper mass underflowed before normalisation."
    A = A / C
    A.flags.writeable = False
    return JumperState(P=P / C, A=A, step_count=mixed_state.step_count + 1, normalizer=float(C))


def _records(stream: Union[LabeledStream, Iterable]) -> Iterable[Tuple[object, int]]:
    for rec in stream:
        if isinstance(rec, StreamRecord):
            yield rec.p, rec.y
        else:
            yield rec[0], rec[1]


def process_stream(
    config: JumperConfig, stream: Union[LabeledStream, Iterable]
) -> Tuple[List[StepOutcome], JumperState]:
    """
    Fold predict and update over a stream in order.

    :param config: Engine configuration.
    :param stream: A LabeledStream or any iterable of (p, y) pairs.
    :return: One StepOutcome per record and the final ledger.
    """
    state = init(config)
    outcomes: List[StepOutcome] = []
    K = None
    for p, y in _records(stream):
        if K is None:
            K = len(p)
        elif len(p) != K:
            raise InvalidProbabilityError(f"record {len(outcomes) + 1} has {len(p)} classes, expected {K}")
        outcome, mixed = predict(config, state, p)
        state = update(config, mixed, outcome.base_p, y)
        outcomes.append(replace(outcome, normalizer_C=state.normalizer))
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug("step %d: P=%.6g C=%.6g", state.step_count, state.P, state.normalizer)
    logger.info("processed %d steps; final base weight %.6g", state.step_count, state.P)
    return outcomes, state


def theta_weights(state: JumperState) -> np.ndarray:
    """Posterior mass on each calibrator, summed over jump rates."""
    return state.A.sum(axis=0)


# ******************************************    Class Declaration Start     ****************************************** #
class CompositeJumper:
    """
    Stateful learn-one / predict-one wrapper around the engine.

        jumper = CompositeJumper(JumperConfig.default(K=2))
        for p, y in stream:
            q = jumper.predict_proba_one(p)
            jumper.learn_one(p, y)

    A label may only be supplied for the prediction most recently requested.
    """

    def __init__(self, config: JumperConfig, state: Optional[JumperState] = None):
        self.config = config
        self.state = state if state is not None else init(config)
        self._last_base: Optional[ProbVector] = None

    # ******************************        Class Method Declaration        ****************************************** #
    def predict_proba_one(self, p: Union[ProbVector, Sequence[float]]) -> ProbVector:
        outcome, self.state = predict(self.config, self.state, p)
        self._last_base = outcome.base_p
        return outcome.protected_p

    # ******************************        Class Method Declaration        ****************************************** #
    def learn_one(self, p: Union[ProbVector, Sequence[float], None], y: int) -> float:
        """
        Supply the label for the outstanding prediction.

        :param p: The base prediction passed to predict_proba_one, or None to reuse it.
        :param y: Observed label.
        :return: The step's normalizer C (the protected probability of y).
        """
        step = self.state.step_count + 1
        if self._last_base is None:
            raise ProtocolError("label supplied before a prediction was requested", step=step)
        if p is not None and not np.array_equal(_as_probs(p, self.config.K), self._last_base.entries):
            raise ProtocolError("learn_one received a different base prediction than predict_proba_one", step=step)
        self.state = update(self.config, self.state, self._last_base, y)
        self._last_base = None
        return self.state.normalizer

    # ******************************        Class Method Declaration        ****************************************** #
    def reset(self):
        self.state = init(self.config)
        self._last_base = None

    def __repr__(self) -> str:
        return f"CompositeJumper(K={self.config.K}, grid={len(self.config.grid)}, steps={self.state.step_count})"


# ******************************************    Demo / Test Routine         ****************************************** #
if __name__ == "__main__":
    demo_config = JumperConfig.default(K=2)
    demo_stream = [([0.9, 0.1], 1), ([0.8, 0.2], 1), ([0.7, 0.3], 1), ([0.95, 0.05], 0)]
    results, final = process_stream(demo_config, demo_stream)
    for n, res in enumerate(results, start=1):
        print(f"step {n}: base={res.base_p.tolist()} protected={res.protected_p.tolist()}")
    print(f"final base weight: {final.P:.6f}")
