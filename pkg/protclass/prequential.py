#!/usr/bin/env python
"""
File Description: Prequential (predict, then learn) driver with checkpoint and resume.

Snapshots are JSON documents taken between steps, after an update and before the next jump mixing:

    {"format": "protclass.jumper-snapshot", "version": 1, "config_hash": "<sha256>",
     "state": {"P": ..., "A": [[...]], "step_count": ..., "normalizer": ...}}

Floats are written with their shortest round-trip representation, so a resumed run matches an uninterrupted one
bit for bit.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from protclass.config import jumper_fingerprint
from protclass.cox import ProbVector
from protclass.errors import ProtocolError, SnapshotError
from protclass.jumper import JumperConfig, JumperState, StepOutcome, init, predict, update
from protclass.streams import LabeledStream, StreamRecord

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT = "protclass.jumper-snapshot"
SNAPSHOT_VERSION = 1
MASS_TOLERANCE = 1e-9


# ****************************************        Function Declaration        **************************************** #
def save_snapshot(path: Union[str, Path], config: JumperConfig, state: JumperState) -> Path:
    """
    Write a snapshot of a ledger that is between steps.

    :raises SnapshotError: If a prediction is outstanding.
    """
    if state.is_mixed:
        raise SnapshotError("cannot snapshot while a prediction is outstanding; supply its label first")
    document = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "config_hash": jumper_fingerprint(config),
        "state": {
            "P": state.P,
            "A": state.A.tolist(),
            "step_count": state.step_count,
            "normalizer": state.normalizer,
        },
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=1), encoding="utf-8")
    logger.info("snapshot after step %d written to %s", state.step_count, path)
    return path


def load_snapshot(path: Union[str, Path], config: JumperConfig) -> JumperState:
    """
    Read a snapshot back for the same configuration.

    :raises SnapshotError: If the file is unreadable, of another format or version, was taken under a different
        configuration, or holds a ledger with negative entries or a total mass away from 1.
    """
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from None
    if not isinstance(document, dict) or document.get("format") != SNAPSHOT_FORMAT:
        raise SnapshotError(f"{path} is not a {SNAPSHOT_FORMAT} document")
    if document.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {document.get('version')!r}; expected {SNAPSHOT_VERSION}")
    if document.get("config_hash") != jumper_fingerprint(config):
        raise SnapshotError(f"snapshot {path} was taken under a different configuration")
    try:
        raw = document["state"]
        A = np.array(raw["A"], dtype=float)
        state = JumperState(
            P=float(raw["P"]), A=A, step_count=int(raw["step_count"]), normalizer=float(raw["normalizer"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotError(f"malformed snapshot state in {path}: {exc}") from None
    if A.shape != (len(config.jump_rates), len(config.grid)):
        raise SnapshotError(f"snapshot ledger has shape {A.shape}, configuration expects "
                            f"{(len(config.jump_rates), len(config.grid))}")
    if not (np.all(np.isfinite(A)) and np.isfinite(state.P)) or state.P < 0.0 or np.any(A < 0.0):
        raise SnapshotError(f"snapshot ledger in {path} has negative or non-finite mass")
    total = state.P + float(A.sum())
    if abs(total - 1.0) > MASS_TOLERANCE:
        raise SnapshotError(f"snapshot ledger in {path} holds total mass {total!r}, expected 1")
    if state.step_count < 0:
        raise SnapshotError(f"snapshot step count {state.step_count} is negative")
    A.flags.writeable = False
    return state


# ******************************************    Class Declaration Start     ****************************************** #
class PrequentialDriver:
    """
    Enforces the predict-then-learn order over one stream.

        driver = PrequentialDriver(config)
        q = driver.predict_one(p)
        outcome = driver.learn_one(y)
    """

    def __init__(self, config: JumperConfig, state: Optional[JumperState] = None):
        self.config = config
        self.state = state if state is not None else init(config)
        self._pending: Optional[StepOutcome] = None

    @property
    def step_count(self) -> int:
        return self.state.step_count

    def predict_one(self, p: Union[ProbVector, Sequence[float]]) -> ProbVector:
        if self._pending is not None:
            raise ProtocolError("a prediction is already outstanding; supply its label first", step=self.step_count + 1)
        self._pending, self.state = predict(self.config, self.state, p)
        return self._pending.protected_p

    def learn_one(self, y: int) -> StepOutcome:
        """Supply the label of the outstanding prediction; returns the completed step."""
        if self._pending is None:
            raise ProtocolError("label supplied before a prediction was requested", step=self.step_count + 1)
        self.state = update(self.config, self.state, self._pending.base_p, y)
        outcome = replace(self._pending, normalizer_C=self.state.normalizer)
        self._pending = None
        return outcome

    def checkpoint(self, path: Union[str, Path]) -> Path:
        return save_snapshot(path, self.config, self.state)

    @classmethod
    def resume(cls, path: Union[str, Path], config: JumperConfig) -> "PrequentialDriver":
        return cls(config, load_snapshot(path, config))


# ****************************************        Function Declaration        **************************************** #
def prequential_drive(
    source: Union[LabeledStream, Iterable],
    config: JumperConfig,
    resume_from: Optional[Union[str, Path]] = None,
    checkpoint_path: Optional[Union[str, Path]] = None,
    checkpoint_every: Optional[int] = None,
    stop_after: Optional[int] = None,
) -> Tuple[List[StepOutcome], JumperState]:
    """
    Feed a stream through the driver one record at a time.

    When resuming, the first step_count records of the source are skipped, so the same source file can be replayed
    after an interruption.

    :param source: A LabeledStream or any iterable of (p, y) pairs.
    :param config: Engine configuration.
    :param resume_from: Snapshot to start from instead of init.
    :param checkpoint_path: Where to write snapshots.
    :param checkpoint_every: Write a snapshot whenever the step count is a multiple of this; a final snapshot is
        always written when checkpoint_path is set.
    :param stop_after: Stop once this many steps (counted from the start of the stream) are complete.
    :return: The outcomes of the steps processed in this call and the final ledger.
    """
    driver = PrequentialDriver.resume(resume_from, config) if resume_from is not None else PrequentialDriver(config)
    skip = driver.step_count
    outcomes: List[StepOutcome] = []
    for index, record in enumerate(source):
        if index < skip:
            continue
        if stop_after is not None and driver.step_count >= stop_after:
            break
        p, y = (record.p, record.y) if isinstance(record, StreamRecord) else (record[0], record[1])
        driver.predict_one(p)
        outcomes.append(driver.learn_one(y))
        if checkpoint_path is not None and checkpoint_every and driver.step_count % checkpoint_every == 0:
            driver.checkpoint(checkpoint_path)
    if checkpoint_path is not None:
        driver.checkpoint(checkpoint_path)
    logger.info("prequential run: %d steps this call, %d in total", len(outcomes), driver.step_count)
    return outcomes, driver.state
