#!/usr/bin/env python
"""
File Description: Platt scaling, a two-parameter logistic recalibration of a score.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from protclass.errors import DegenerateDataError, InvalidLabelError
from protclass.streams import DEFAULT_CLAMP_EPSILON, clamp_probs

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-8
MAX_ITERATIONS = 1000


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class PlattModel:
    """
    Maps a score s to sigmoid(a * s + b).

    :param a: Slope.
    :param b: Intercept.
    :param degenerate: Set when the training labels held a single class; the model then predicts the clamped
        class rate whatever the score.
    """

    a: float
    b: float
    degenerate: bool = False
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON

    def predict(self, scores: Union[np.ndarray, Sequence[float]]) -> np.ndarray:
        """Probability of class 1 for each score, clipped to [epsilon, 1 - epsilon]."""
        z = self.a * np.asarray(scores, dtype=float) + self.b
        return np.clip(expit(z), self.clamp_epsilon, 1.0 - self.clamp_epsilon)


# ****************************************        Function Declaration        **************************************** #
def platt_objective(params: np.ndarray, scores: np.ndarray, labels: np.ndarray):
    """Mean log loss of sigmoid(a * s + b) and its gradient in (a, b)."""
    z = params[0] * scores + params[1]
    loss = np.mean(np.logaddexp(0.0, z) - labels * z)
    residual = expit(z) - labels
    return float(loss), np.array([np.mean(residual * scores), np.mean(residual)])


def probability_scores(probs: np.ndarray, clamp_epsilon: float = DEFAULT_CLAMP_EPSILON) -> np.ndarray:
    """Logit of clamped probabilities, so that (a, b) = (1, 0) reproduces the input."""
    p = np.clip(np.asarray(probs, dtype=float), clamp_epsilon, 1.0 - clamp_epsilon)
    return logit(p)


def fit_platt(
    scores: Union[np.ndarray, Sequence[float]],
    labels: Union[np.ndarray, Sequence[int]],
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON,
) -> PlattModel:
    """
    Fit (a, b) by minimising the mean log loss with BFGS from the identity (1, 0).

    :param scores: Real-valued scores.
    :param labels: Binary labels.
    :param clamp_epsilon: Clamp applied to the degenerate class rate and to predictions.
    :return: The fitted model; flagged degenerate when only one class is present.
    :raises DegenerateDataError: On empty input.
    :raises InvalidLabelError: If a label is not 0 or 1.
    """
    s = np.asarray(scores, dtype=float).reshape(-1)
    y = np.asarray(labels, dtype=float).reshape(-1)
    if len(s) == 0 or len(s) != len(y):
        raise DegenerateDataError(f"Platt scaling needs matching non-empty scores and labels, got {len(s)}/{len(y)}")
    if np.any((y != 0.0) & (y != 1.0)):
        raise InvalidLabelError("Platt scaling takes binary labels")

    rate = float(np.mean(y))
    if rate in (0.0, 1.0):
        clamped = min(max(rate, clamp_epsilon), 1.0 - clamp_epsilon)
        logger.warning("Platt scaling on single-class data; predicting the clamped class rate %g", clamped)
        return PlattModel(a=0.0, b=float(logit(clamped)), degenerate=True, clamp_epsilon=clamp_epsilon)

    start = np.array([1.0, 0.0])
    result = minimize(
        platt_objective,
        start,
        args=(s, y),
        jac=True,
        method="BFGS",
        options={"gtol": GRADIENT_TOLERANCE, "maxiter": MAX_ITERATIONS},
    )
    params = result.x
    if not np.all(np.isfinite(params)) or platt_objective(params, s, y)[0] > platt_objective(start, s, y)[0]:
        params = start
    logger.debug("Platt fit a=%.6g b=%.6g (%s)", params[0], params[1], result.message)
    return PlattModel(a=float(params[0]), b=float(params[1]), clamp_epsilon=clamp_epsilon)


# ******************************************    Class Declaration Start     ****************************************** #
class PlattCalibrator:
    """
    Platt scaling for probability vectors. Binary streams use one model on logit(p_1); K > 2 fits one model per
    class against the rest and renormalises.
    """

    name = "platt"

    def __init__(self, clamp_epsilon: float = DEFAULT_CLAMP_EPSILON):
        self.clamp_epsilon = clamp_epsilon
        self.models: Optional[List[PlattModel]] = None

    def fit(self, probs: np.ndarray, labels: np.ndarray) -> "PlattCalibrator":
        probs = np.asarray(probs, dtype=float)
        labels = np.asarray(labels).reshape(-1)
        if probs.shape[1] == 2:
            self.models = [fit_platt(probability_scores(probs[:, 1], self.clamp_epsilon), labels, self.clamp_epsilon)]
        else:
            self.models = [
                fit_platt(probability_scores(probs[:, k], self.clamp_epsilon), labels == k, self.clamp_epsilon)
                for k in range(probs.shape[1])
            ]
        return self

    def transform(self, probs: np.ndarray) -> np.ndarray:
        if self.models is None:
            raise DegenerateDataError("PlattCalibrator.transform called before fit")
        probs = np.asarray(probs, dtype=float)
        if len(self.models) == 1:
            q = self.models[0].predict(probability_scores(probs[:, 1], self.clamp_epsilon))
            out = np.column_stack([1.0 - q, q])
        else:
            out = np.column_stack(
                [m.predict(probability_scores(probs[:, k], self.clamp_epsilon)) for k, m in enumerate(self.models)]
            )
        return clamp_probs(out, self.clamp_epsilon)
