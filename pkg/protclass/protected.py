#!/usr/bin/env python
"""
File Description: Protection wrappers around a base classifier or a batch of predictions.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from typing import Optional, Sequence, Union

import numpy as np

from protclass.cox import ProbVector
from protclass.errors import ProtocolError
from protclass.jumper import CompositeJumper, JumperConfig, predict
from protclass.streams import DEFAULT_CLAMP_EPSILON, LabeledStream, clamp_probs

logger = logging.getLogger(__name__)


# ******************************************    Class Declaration Start     ****************************************** #
class ProtectedModel:
    """
    Learn-one / predict-one protection of a fixed classifier.

    The base object needs predict_proba(X) returning an (n, K) array; it is never retrained. When no config is given
    the default grid is built for the class count of the first prediction.
    """

    def __init__(self, base, config: Optional[JumperConfig] = None, clamp_epsilon: float = DEFAULT_CLAMP_EPSILON):
        self.base = base
        self.config = config
        self.clamp_epsilon = clamp_epsilon
        self.jumper: Optional[CompositeJumper] = CompositeJumper(config) if config is not None else None

    def _base_probs(self, x: Union[np.ndarray, Sequence[float]]) -> np.ndarray:
        row = np.asarray(x, dtype=float)[np.newaxis, :]
        return clamp_probs(np.asarray(self.base.predict_proba(row), dtype=float)[0], self.clamp_epsilon)

    def predict_proba_one(self, x: Union[np.ndarray, Sequence[float]]) -> ProbVector:
        p = self._base_probs(x)
        if self.jumper is None:
            self.config = JumperConfig.default(len(p))
            self.jumper = CompositeJumper(self.config)
        return self.jumper.predict_proba_one(p)

    def learn_one(self, x: Union[np.ndarray, Sequence[float]], y: int) -> float:
        """
        Supply the label of the row most recently passed to predict_proba_one.

        :return: The protected probability that was assigned to y.
        """
        if self.jumper is None:
            raise ProtocolError("label supplied before a prediction was requested", step=1)
        return self.jumper.learn_one(self._base_probs(x), y)


# ******************************************    Class Declaration Start     ****************************************** #
class ProtectedCalibrator:
    """
    Batch interface: fit() runs the Composite Jumper over a labelled calibration stream; predict_proba() either
    continues online (labels given) or applies the current mixture frozen to every row (no labels).
    """

    def __init__(self, config: Optional[JumperConfig] = None, clamp_epsilon: float = DEFAULT_CLAMP_EPSILON):
        self.config = config
        self.clamp_epsilon = clamp_epsilon
        self.jumper: Optional[CompositeJumper] = None

    def _ensure(self, K: int) -> CompositeJumper:
        if self.jumper is None:
            if self.config is None:
                self.config = JumperConfig.default(K)
            self.jumper = CompositeJumper(self.config)
        return self.jumper

    def _online(self, stream: LabeledStream) -> np.ndarray:
        jumper = self._ensure(stream.K)
        out = np.empty_like(stream.probs)
        for i, record in enumerate(stream):
            out[i] = jumper.predict_proba_one(record.p).entries
            jumper.learn_one(None, record.y)
        return out

    def fit(self, probs: np.ndarray, labels: np.ndarray) -> "ProtectedCalibrator":
        stream = LabeledStream(clamp_probs(probs, self.clamp_epsilon), labels)
        self._online(stream)
        logger.info("protected calibrator fitted on %d records", len(stream))
        return self

    def predict_proba(self, probs: np.ndarray, labels: Optional[np.ndarray] = None) -> np.ndarray:
        """
        :param probs: (n, K) base predictions.
        :param labels: When given, every row is predicted and then learned in order.
        :return: (n, K) protected predictions.
        """
        probs = clamp_probs(np.atleast_2d(probs), self.clamp_epsilon)
        if labels is not None:
            return self._online(LabeledStream(probs, labels))
        jumper = self._ensure(probs.shape[1])
        # one mixing step from the same ledger for every row; the ledger itself is left untouched
        return np.array([predict(jumper.config, jumper.state, row)[0].protected_p.entries for row in probs])

    def transform(self, probs: np.ndarray) -> np.ndarray:
        return self.predict_proba(probs)
