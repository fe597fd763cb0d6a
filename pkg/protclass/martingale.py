#!/usr/bin/env python
"""
File Description: Log test-martingale ledger.

For a calibrator theta the test martingale against the base is the ratio of the two probability processes,
prod_n f_theta(p_n)(y_n) / prod_n p_n(y_n). It grows when theta out-predicts the base. The ledger keeps these ratios
in log space for every grid member, together with the protected predictor's own martingale, which never falls below
log(pi).
"""

# ******************************************    Libraries to be imported    ****************************************** #
import logging
from typing import List, Tuple

import numpy as np

from protclass.cox import ThetaGrid, ThetaParams
from protclass.jumper import StepOutcome

logger = logging.getLogger(__name__)


# ******************************************    Class Declaration Start     ****************************************** #
class MartingaleLedger:
    """
    Running log test martingales of each calibrator in a grid and of the protected predictor.

    Feed it with record() after every labelled step; history keeps one row per step when track_history is set.
    """

    def __init__(self, grid: ThetaGrid, track_history: bool = False):
        self.grid = grid
        self.log_martingales = np.zeros(len(grid))
        self.log_protected = 0.0
        self.steps = 0
        self._track = track_history
        self.history: List[np.ndarray] = []
        self.protected_history: List[float] = []

    def record(self, outcome: StepOutcome, y: int):
        base = outcome.base_p.entries
        calibrated = self.grid.apply(base)
        log_base = np.log(base[y])
        self.log_martingales = self.log_martingales + np.log(calibrated[:, y]) - log_base
        self.log_protected += float(np.log(outcome.protected_p[y]) - log_base)
        self.steps += 1
        if self._track:
            self.history.append(self.log_martingales.copy())
            self.protected_history.append(self.log_protected)

    def best_calibrator(self) -> Tuple[ThetaParams, float]:
        """The calibrator with the highest final log martingale, and that value."""
        index = int(np.argmax(self.log_martingales))
        return self.grid[index], float(self.log_martingales[index])

    def ranking(self) -> List[Tuple[ThetaParams, float]]:
        order = np.argsort(-self.log_martingales, kind="stable")
        return [(self.grid[i], float(self.log_martingales[i])) for i in order]
