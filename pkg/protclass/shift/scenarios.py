#!/usr/bin/env python
"""
File Description: Dataset-shift scenarios applied to the tail of a test set.

* unperturbed: the test set as is.
* concept_shift: binary labels of the tail are swapped.
* x_imbalance: only tail rows whose first feature is negative are kept.
* y_imbalance: tail rows of class 0 are dropped.

After the transformation the whole stream may be shuffled with the experiment seed.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from dataclasses import dataclass

import numpy as np

from protclass.errors import ConfigError
from protclass.shift.datasets import Dataset

logger = logging.getLogger(__name__)

UNPERTURBED = "unperturbed"
CONCEPT_SHIFT = "concept_shift"
X_IMBALANCE = "x_imbalance"
Y_IMBALANCE = "y_imbalance"
SCENARIO_KINDS = (UNPERTURBED, CONCEPT_SHIFT, X_IMBALANCE, Y_IMBALANCE)

# first informative feature
X_IMBALANCE_FEATURE = 0


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class ShiftScenario:
    kind: str = UNPERTURBED
    affected_tail: int = 500
    permute_after: bool = True

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario {self.kind!r}; choose from {SCENARIO_KINDS}")
        if self.affected_tail < 0:
            raise ConfigError(f"affected_tail must be non-negative, got {self.affected_tail}")


# ****************************************        Function Declaration        **************************************** #
def apply_scenario(test: Dataset, scenario: ShiftScenario, seed: int = 0) -> Dataset:
    """
    Transform the last `affected_tail` rows of a test set, then optionally shuffle.

    The unperturbed scenario returns the test set unchanged and unshuffled.

    :param test: Test rows in their original order.
    :param scenario: What to apply.
    :param seed: Seed of the shuffle.
    :return: The test stream.
    :raises ConfigError: If the tail is longer than the test set, or concept shift is asked of a non-binary set.
    """
    if scenario.affected_tail > len(test):
        raise ConfigError(f"affected_tail ({scenario.affected_tail}) exceeds the test size ({len(test)})")
    if scenario.kind == CONCEPT_SHIFT and test.K != 2:
        raise ConfigError(f"concept shift swaps binary labels; got K={test.K}")
    if scenario.kind == UNPERTURBED:
        return test

    start = len(test) - scenario.affected_tail
    X_tail, y_tail = test.X[start:], test.y[start:]
    if scenario.kind == CONCEPT_SHIFT:
        y_tail = 1 - y_tail
    elif scenario.kind == X_IMBALANCE:
        keep = X_tail[:, X_IMBALANCE_FEATURE] < 0.0
        X_tail, y_tail = X_tail[keep], y_tail[keep]
    else:
        keep = y_tail != 0
        X_tail, y_tail = X_tail[keep], y_tail[keep]

    shifted = Dataset(X=np.vstack([test.X[:start], X_tail]), y=np.concatenate([test.y[:start], y_tail]), K=test.K)
    logger.debug("%s: tail of %d became %d rows", scenario.kind, scenario.affected_tail, len(y_tail))
    if scenario.permute_after:
        shifted = shifted.take(np.random.default_rng(seed).permutation(len(shifted)))
    return shifted
