#!/usr/bin/env python
"""
File Description: Two small built-in classifiers, multinomial logistic regression and Gaussian naive Bayes.

Both produce full probability vectors so that their outputs can be fed straight to calibrators.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from dataclasses import dataclass, field
from typing import Dict, Sequence, Union

import numpy as np
from scipy.special import softmax

from protclass.cox import ProbVector
from protclass.errors import ConfigError, DegenerateDataError
from protclass.shift.datasets import Dataset

logger = logging.getLogger(__name__)

LOGISTIC_REGRESSION = "logistic_regression"
GAUSSIAN_NAIVE_BAYES = "gaussian_naive_bayes"
MODEL_KINDS = (LOGISTIC_REGRESSION, GAUSSIAN_NAIVE_BAYES)

L2_PENALTY = 1e-4
EPOCHS = 500
LEARNING_RATE = 0.5
VARIANCE_FLOOR = 1e-9


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True, eq=False)
class SimpleModel:
    """
    A fitted classifier.

    :param kind: One of MODEL_KINDS.
    :param K: Number of classes.
    :param params: Learned arrays. Logistic regression: center, scale, weights (d, K), bias (K,).
        Naive Bayes: means (K, d), variances (K, d), log_priors (K,).
    """

    kind: str
    K: int
    params: Dict[str, np.ndarray] = field(default_factory=dict)

    def log_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kind == LOGISTIC_REGRESSION:
            Z = (X - self.params["center"]) / self.params["scale"]
            return Z @ self.params["weights"] + self.params["bias"]
        means, variances = self.params["means"], self.params["variances"]
        diff = X[:, np.newaxis, :] - means[np.newaxis, :, :]
        log_likelihood = -0.5 * np.sum(np.log(2.0 * np.pi * variances) + diff**2 / variances, axis=2)
        return log_likelihood + self.params["log_priors"]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """(n, K) class probabilities."""
        return softmax(self.log_scores(X), axis=1)

    def predict_proba_one(self, row: Union[np.ndarray, Sequence[float]]) -> ProbVector:
        return ProbVector(self.predict_proba(np.asarray(row, dtype=float)[np.newaxis, :])[0])


# ****************************************        Function Declaration        **************************************** #
def _fit_logistic(X: np.ndarray, y: np.ndarray, K: int) -> Dict[str, np.ndarray]:
    # standardised features; full-batch gradient descent from zero weights
    center = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    Z = (X - center) / scale
    n, d = Z.shape
    onehot = np.eye(K)[y]
    W = np.zeros((d, K))
    b = np.zeros(K)
    for _ in range(EPOCHS):
        residual = softmax(Z @ W + b, axis=1) - onehot
        W -= LEARNING_RATE * (Z.T @ residual / n + L2_PENALTY * W)
        b -= LEARNING_RATE * residual.mean(axis=0)
    return {"center": center, "scale": scale, "weights": W, "bias": b}


def _fit_naive_bayes(X: np.ndarray, y: np.ndarray, K: int) -> Dict[str, np.ndarray]:
    counts = np.bincount(y, minlength=K)
    if np.any(counts == 0):
        missing = [k for k in range(K) if counts[k] == 0]
        raise DegenerateDataError(f"Gaussian naive Bayes needs every class in training data; missing {missing}")
    means = np.array([X[y == k].mean(axis=0) for k in range(K)])
    variances = np.array([np.maximum(X[y == k].var(axis=0), VARIANCE_FLOOR) for k in range(K)])
    log_priors = np.log(counts / counts.sum())
    return {"means": means, "variances": variances, "log_priors": log_priors}


def fit_simple(kind: str, train: Dataset) -> SimpleModel:
    """
    Fit a built-in classifier.

    :param kind: "logistic_regression" or "gaussian_naive_bayes".
    :param train: Training rows.
    :return: The fitted model.
    :raises ConfigError: For an unknown kind.
    :raises DegenerateDataError: If fewer than two classes are present.
    """
    if kind not in MODEL_KINDS:
        raise ConfigError(f"unknown model kind {kind!r}; choose from {MODEL_KINDS}")
    if len(np.unique(train.y)) < 2:
        raise DegenerateDataError(f"{kind} needs at least two classes in training data")
    fitter = _fit_logistic if kind == LOGISTIC_REGRESSION else _fit_naive_bayes
    params = fitter(train.X, train.y, train.K)
    for value in params.values():
        value.flags.writeable = False
    logger.debug("fitted %s on %d rows", kind, len(train))
    return SimpleModel(kind=kind, K=train.K, params=params)


def predict_proba(model: SimpleModel, row: Union[np.ndarray, Sequence[float]]) -> ProbVector:
    return model.predict_proba_one(row)
