#!/usr/bin/env python
"""
File Description: Isotonic regression by pool-adjacent-violators.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from protclass.errors import DegenerateDataError
from protclass.streams import DEFAULT_CLAMP_EPSILON, clamp_probs

logger = logging.getLogger(__name__)


# ****************************************        Function Declaration        **************************************** #
def pav(targets: Union[np.ndarray, Sequence[float]], weights: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Weighted least-squares nondecreasing fit to a sequence by pooling adjacent violators.

    :param targets: Values in the order of the (already sorted) scores.
    :param weights: Positive weights; all ones by default.
    :return: Fitted values, one per target.
    """
    y = np.asarray(targets, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    # blocks as parallel stacks: weighted mean, total weight, length
    means: List[float] = []
    totals: List[float] = []
    sizes: List[int] = []
    for value, weight in zip(y, w):
        means.append(float(value))
        totals.append(float(weight))
        sizes.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            mean, total, size = means.pop(), totals.pop(), sizes.pop()
            merged = totals[-1] + total
            means[-1] = (means[-1] * totals[-1] + mean * total) / merged
            totals[-1] = merged
            sizes[-1] += size
    return np.repeat(means, sizes)


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True, eq=False)
class IsotonicModel:
    """
    Stepwise-constant nondecreasing map from score to probability.

    :param breakpoints: Strictly increasing scores seen in training.
    :param values: Fitted value at each breakpoint, nondecreasing.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON

    def predict(self, scores: Union[np.ndarray, Sequence[float]]) -> np.ndarray:
        s = np.asarray(scores, dtype=float)
        index = np.clip(np.searchsorted(self.breakpoints, s, side="right") - 1, 0, len(self.values) - 1)
        return np.clip(self.values[index], self.clamp_epsilon, 1.0 - self.clamp_epsilon)


def fit_isotonic(
    scores: Union[np.ndarray, Sequence[float]],
    targets: Union[np.ndarray, Sequence[float]],
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON,
) -> IsotonicModel:
    """
    Fit a nondecreasing map from scores to targets (binary labels or any regression targets).

    Equal scores are pooled into one point, weighted by their count, before PAV runs.

    :raises DegenerateDataError: On empty input.
    """
    s = np.asarray(scores, dtype=float).reshape(-1)
    y = np.asarray(targets, dtype=float).reshape(-1)
    if len(s) == 0 or len(s) != len(y):
        raise DegenerateDataError(f"isotonic regression needs matching non-empty inputs, got {len(s)}/{len(y)}")
    breakpoints, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    pooled = np.bincount(inverse, weights=y) / counts
    values = pav(pooled, counts.astype(float))
    breakpoints.flags.writeable = False
    values.flags.writeable = False
    return IsotonicModel(breakpoints=breakpoints, values=values, clamp_epsilon=clamp_epsilon)


def apply_isotonic(model: IsotonicModel, score: float) -> float:
    return float(model.predict([score])[0])


# ******************************************    Class Declaration Start     ****************************************** #
class IsotonicCalibrator:
    """One-vs-rest isotonic calibration on each class probability, renormalised."""

    name = "isotonic"

    def __init__(self, clamp_epsilon: float = DEFAULT_CLAMP_EPSILON):
        self.clamp_epsilon = clamp_epsilon
        self.models: Optional[List[IsotonicModel]] = None

    def fit(self, probs: np.ndarray, labels: np.ndarray) -> "IsotonicCalibrator":
        probs = np.asarray(probs, dtype=float)
        labels = np.asarray(labels).reshape(-1)
        if probs.shape[1] == 2:
            self.models = [fit_isotonic(probs[:, 1], labels == 1, self.clamp_epsilon)]
        else:
            self.models = [
                fit_isotonic(probs[:, k], labels == k, self.clamp_epsilon) for k in range(probs.shape[1])
            ]
        return self

    def transform(self, probs: np.ndarray) -> np.ndarray:
        if self.models is None:
            raise DegenerateDataError("IsotonicCalibrator.transform called before fit")
        probs = np.asarray(probs, dtype=float)
        if len(self.models) == 1:
            q = self.models[0].predict(probs[:, 1])
            out = np.column_stack([1.0 - q, q])
        else:
            out = np.column_stack([m.predict(probs[:, k]) for k, m in enumerate(self.models)])
        return clamp_probs(out, self.clamp_epsilon)
