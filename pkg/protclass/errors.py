#!/usr/bin/env python
"""
File Description: Exception hierarchy for protclass.

Every error raised for bad input derives from ProtClassError, which is itself a ValueError.
"""

from typing import Optional


class ProtClassError(ValueError):
    """Root of all protclass domain errors."""


class InvalidProbabilityError(ProtClassError):
    """A probability vector is off the simplex or otherwise unusable."""


class ConfigError(ProtClassError):
    """An engine, run or experiment configuration is invalid."""


class DegenerateDataError(ProtClassError):
    """Training data cannot support the requested fit (e.g. only one class present)."""


class OracleTooLargeError(ProtClassError):
    """The trajectory enumeration would exceed its size guard."""


class StreamFormatError(ProtClassError):
    """
    A stream file could not be parsed.

    :param message: What went wrong.
    :param line: 1-based line number of the offending record, if known.
    :param path: File being parsed, if known.
    """

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ProtocolError(ProtClassError):
    """
    The predict-then-learn protocol was violated.

    :param message: What went wrong.
    :param step: 1-based step at which the violation happened.
    """

    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        super().__init__(f"step {step}: {message}" if step is not None else message)


class SnapshotError(ProtClassError):
    """A jumper snapshot is unreadable, of an unknown version, or belongs to another config."""


class InvalidLabelError(ProtClassError):
    """A class label lies outside 0..K-1."""
