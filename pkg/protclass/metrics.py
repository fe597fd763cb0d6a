#!/usr/bin/env python
"""
File Description: Scoring rules and calibration diagnostics.

All functions take an (n, K) array of predicted probabilities and an (n,) array of integer labels, or a
LabeledStream in place of the pair.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.stats import rankdata

from protclass.errors import ConfigError, InvalidLabelError, InvalidProbabilityError, ProtClassError
from protclass.streams import LabeledStream

logger = logging.getLogger(__name__)

DEFAULT_ECE_BINS = 15
DEFAULT_ECE_NORM = "l2"
ECE_NORMS = ("l1", "l2")

_Data = Union[LabeledStream, np.ndarray]


def _unpack(data: _Data, labels: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(data, LabeledStream):
        probs, labels = data.probs, data.labels
    else:
        if labels is None:
            raise ProtClassError("labels are required when predictions are given as an array")
        probs = np.asarray(data, dtype=float)
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if probs.ndim != 2 or probs.shape[0] != labels.shape[0]:
        raise InvalidProbabilityError(f"predictions of shape {probs.shape} do not match {labels.shape[0]} labels")
    if probs.shape[0] == 0:
        raise ProtClassError("cannot score an empty stream")
    if np.any(labels < 0) or np.any(labels >= probs.shape[1]):
        raise InvalidLabelError(f"labels must lie in 0..{probs.shape[1] - 1}")
    return probs, labels


# ****************************************        Function Declaration        **************************************** #
def log_loss(data: _Data, labels: Optional[np.ndarray] = None) -> float:
    """
    Mean of -ln p(y).

    :raises InvalidProbabilityError: If some p(y) is 0, which means the input was not clamped.
    """
    probs, labels = _unpack(data, labels)
    p_true = probs[np.arange(len(labels)), labels]
    if np.any(p_true <= 0.0):
        raise InvalidProbabilityError("a prediction gave probability 0 to the observed label; clamp inputs first")
    return float(np.mean(-np.log(p_true)))


def brier_loss(data: _Data, labels: Optional[np.ndarray] = None) -> float:
    """Mean over examples of sum_k (p_k - 1{y = k})^2, in [0, 2] for every K."""
    probs, labels = _unpack(data, labels)
    onehot = np.eye(probs.shape[1])[labels]
    return float(np.mean(np.sum((probs - onehot) ** 2, axis=1)))


def accuracy(data: _Data, labels: Optional[np.ndarray] = None) -> float:
    """Fraction of examples whose argmax (lowest index on ties) is the label."""
    probs, labels = _unpack(data, labels)
    return float(np.mean(np.argmax(probs, axis=1) == labels))


def auc(data: _Data, labels: Optional[np.ndarray] = None) -> float:
    """
    Binary ROC AUC from the class-1 scores via the midrank Mann-Whitney statistic.

    :raises ConfigError: If K != 2.
    :raises InvalidLabelError: If one of the classes is absent.
    """
    probs, labels = _unpack(data, labels)
    if probs.shape[1] != 2:
        raise ConfigError(f"AUC is defined for binary streams only, got K={probs.shape[1]}")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InvalidLabelError("AUC needs both classes present")
    ranks = rankdata(probs[:, 1], method="average")
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


# ****************************************        Function Declaration        **************************************** #
def equal_mass_edges(values: np.ndarray, bins: int) -> np.ndarray:
    """
    Upper edges of equal-mass bins: the order statistics at fractions 1/B, 2/B, ..., 1, deduplicated.

    Repeated values collapse bins, so a constant input yields a single bin.
    """
    ordered = np.sort(np.asarray(values, dtype=float))
    n = len(ordered)
    n_bins = min(bins, n)
    positions = [int(np.ceil((i + 1) * n / n_bins)) - 1 for i in range(n_bins)]
    return np.unique(ordered[positions])


def _binned(values: np.ndarray, hits: np.ndarray, bins: int):
    edges = equal_mass_edges(values, bins)
    assignment = np.searchsorted(edges, values, side="left")
    counts = np.bincount(assignment, minlength=len(edges))
    sum_pred = np.bincount(assignment, weights=values, minlength=len(edges))
    sum_hits = np.bincount(assignment, weights=hits.astype(float), minlength=len(edges))
    occupied = counts > 0
    counts = counts[occupied]
    return sum_pred[occupied] / counts, sum_hits[occupied] / counts, counts / len(values)


def ece(
    data: _Data, labels: Optional[np.ndarray] = None, bins: int = DEFAULT_ECE_BINS, norm: str = DEFAULT_ECE_NORM
) -> float:
    """
    Per-class (marginal) expected calibration error.

    For each class k the predicted p_k are split into equal-mass bins; the class error is the bin-weighted l1 or l2
    norm of |mean p_k - frequency of y = k| over bins; the result is the mean over classes.
    """
    if bins < 1:
        raise ConfigError(f"ECE needs at least one bin, got {bins}")
    if norm not in ECE_NORMS:
        raise ConfigError(f"ECE norm must be one of {ECE_NORMS}, got {norm!r}")
    probs, labels = _unpack(data, labels)
    errors = []
    for k in range(probs.shape[1]):
        mean_pred, freq, weight = _binned(probs[:, k], labels == k, bins)
        gap = np.abs(mean_pred - freq)
        if norm == "l1":
            errors.append(float(np.sum(weight * gap)))
        else:
            errors.append(float(np.sqrt(np.sum(weight * gap**2))))
    return float(np.mean(errors))


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class ReliabilityBin:
    mean_predicted: float
    frequency: float
    weight: float


@dataclass(frozen=True)
class ReliabilityCurve:
    """Per class, the equal-mass bins of predicted probability with their observed frequencies and weights."""

    classes: Tuple[Tuple[ReliabilityBin, ...], ...]

    def rows(self) -> List[Tuple[int, int, float, float, float]]:
        """Flatten to (class, bin, mean_predicted, frequency, weight) rows."""
        out = []
        for k, class_bins in enumerate(self.classes):
            for b, rbin in enumerate(class_bins):
                out.append((k, b, rbin.mean_predicted, rbin.frequency, rbin.weight))
        return out


def reliability(data: _Data, labels: Optional[np.ndarray] = None, bins: int = DEFAULT_ECE_BINS) -> ReliabilityCurve:
    probs, labels = _unpack(data, labels)
    classes = []
    for k in range(probs.shape[1]):
        mean_pred, freq, weight = _binned(probs[:, k], labels == k, bins)
        classes.append(tuple(ReliabilityBin(float(m), float(f), float(w)) for m, f, w in zip(mean_pred, freq, weight)))
    return ReliabilityCurve(classes=tuple(classes))


def cumulative_losses(data: _Data, labels: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Running totals of log loss and Brier loss, one entry per step."""
    probs, labels = _unpack(data, labels)
    rows = np.arange(len(labels))
    step_log = -np.log(probs[rows, labels])
    step_brier = np.sum((probs - np.eye(probs.shape[1])[labels]) ** 2, axis=1)
    return np.cumsum(step_log), np.cumsum(step_brier)


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class MetricsReport:
    """Aggregate scores of one prediction stream. auc is None unless the stream is binary with both classes."""

    log_loss: float
    brier: float
    ece: float
    accuracy: float
    auc: Optional[float]
    n: int
    ece_bins: int = DEFAULT_ECE_BINS
    ece_norm: str = DEFAULT_ECE_NORM
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(
    data: _Data, labels: Optional[np.ndarray] = None, bins: int = DEFAULT_ECE_BINS, norm: str = DEFAULT_ECE_NORM
) -> MetricsReport:
    probs, labels = _unpack(data, labels)
    area = None
    if probs.shape[1] == 2 and 0 < int(np.sum(labels == 1)) < len(labels):
        area = auc(probs, labels)
    return MetricsReport(
        log_loss=log_loss(probs, labels),
        brier=brier_loss(probs, labels),
        ece=ece(probs, labels, bins=bins, norm=norm),
        accuracy=accuracy(probs, labels),
        auc=area,
        n=len(labels),
        ece_bins=bins,
        ece_norm=norm,
    )
