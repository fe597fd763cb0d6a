"""
protclass - protected probabilistic classification.

Wraps a base classifier's probability forecasts in a Composite Jumper: a Bayesian mixture of the base forecast and
Cox-calibrated versions of it whose log loss never exceeds the base's by more than log(1 / pi).
"""

from protclass.cox import ProbVector, ThetaGrid, ThetaParams, build_default_grid, cox_apply
from protclass.errors import (
    ConfigError,
    DegenerateDataError,
    InvalidLabelError,
    InvalidProbabilityError,
    OracleTooLargeError,
    ProtClassError,
    ProtocolError,
    SnapshotError,
    StreamFormatError,
)
from protclass.jumper import (
    CompositeJumper,
    JumperConfig,
    JumperState,
    StepOutcome,
    init,
    predict,
    process_stream,
    theta_weights,
    update,
)
from protclass.martingale import MartingaleLedger
from protclass.metrics import MetricsReport, ReliabilityCurve, accuracy, auc, brier_loss, ece, evaluate, log_loss
from protclass.protected import ProtectedCalibrator, ProtectedModel
from protclass.streams import LabeledStream, StreamRecord, emit_stream, parse_stream

__version__ = "0.1.0"

__all__ = [
    "CompositeJumper",
    "ConfigError",
    "DegenerateDataError",
    "InvalidLabelError",
    "InvalidProbabilityError",
    "JumperConfig",
    "JumperState",
    "LabeledStream",
    "MartingaleLedger",
    "MetricsReport",
    "OracleTooLargeError",
    "ProbVector",
    "ProtClassError",
    "ProtectedCalibrator",
    "ProtectedModel",
    "ProtocolError",
    "ReliabilityCurve",
    "SnapshotError",
    "StepOutcome",
    "StreamFormatError",
    "StreamRecord",
    "ThetaGrid",
    "ThetaParams",
    "accuracy",
    "auc",
    "brier_loss",
    "build_default_grid",
    "cox_apply",
    "ece",
    "emit_stream",
    "evaluate",
    "init",
    "log_loss",
    "parse_stream",
    "predict",
    "process_stream",
    "theta_weights",
    "update",
]
