#!/usr/bin/env python
"""
File Description: Temperature scaling, softmax(ln p / T) with a single fitted T.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp, softmax

from protclass.errors import ConfigError, DegenerateDataError
from protclass.streams import DEFAULT_CLAMP_EPSILON, clamp_probs

logger = logging.getLogger(__name__)

TEMPERATURE_BOUNDS = (0.05, 20.0)
TEMPERATURE_TOLERANCE = 1e-6


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class TemperatureModel:
    """
    :param T: Positive temperature; T > 1 flattens predictions and T < 1 sharpens them.
    :param at_boundary: The fit ended on an end of the search interval.
    """

    T: float
    at_boundary: bool = False
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ConfigError(f"temperature must be positive and finite, got {self.T}")

    def apply(self, probs: np.ndarray) -> np.ndarray:
        log_probs = np.log(clamp_probs(probs, self.clamp_epsilon))
        return softmax(log_probs / self.T, axis=-1)


# ****************************************        Function Declaration        **************************************** #
def temperature_objective(T: float, log_probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean log loss of softmax(log_probs / T)."""
    z = log_probs / T
    return float(np.mean(logsumexp(z, axis=1) - z[np.arange(len(labels)), labels]))


def fit_temperature(
    probs: np.ndarray,
    labels: np.ndarray,
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON,
    bounds: Tuple[float, float] = TEMPERATURE_BOUNDS,
) -> TemperatureModel:
    """
    Bounded Brent search for T, then the best of the optimum, both bounds and T = 1.

    :param probs: (n, K) probabilities; clamped before the logarithm.
    :param labels: (n,) labels.
    :raises DegenerateDataError: On empty input.
    """
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if len(labels) == 0 or probs.shape[0] != len(labels):
        raise DegenerateDataError("temperature scaling needs matching non-empty predictions and labels")
    log_probs = np.log(clamp_probs(probs, clamp_epsilon))

    low, high = bounds
    result = minimize_scalar(
        temperature_objective,
        bounds=(low, high),
        args=(log_probs, labels),
        method="bounded",
        options={"xatol": TEMPERATURE_TOLERANCE},
    )
    best: Optional[float] = None
    best_loss = math.inf
    for candidate in (float(result.x), low, high, 1.0):
        loss = temperature_objective(candidate, log_probs, labels)
        if loss < best_loss:
            best, best_loss = candidate, loss
    at_boundary = best in (low, high)
    if at_boundary:
        logger.warning("temperature fit ended on the search boundary T=%g", best)
    logger.debug("temperature fit T=%.6g loss=%.6g", best, best_loss)
    return TemperatureModel(T=best, at_boundary=at_boundary, clamp_epsilon=clamp_epsilon)


# ******************************************    Class Declaration Start     ****************************************** #
class TemperatureCalibrator:
    name = "temperature"

    def __init__(self, clamp_epsilon: float = DEFAULT_CLAMP_EPSILON):
        self.clamp_epsilon = clamp_epsilon
        self.model: Optional[TemperatureModel] = None

    def fit(self, probs: np.ndarray, labels: np.ndarray) -> "TemperatureCalibrator":
        self.model = fit_temperature(probs, labels, self.clamp_epsilon)
        return self

    def transform(self, probs: np.ndarray) -> np.ndarray:
        if self.model is None:
            raise DegenerateDataError("TemperatureCalibrator.transform called before fit")
        return clamp_probs(self.model.apply(probs), self.clamp_epsilon)
