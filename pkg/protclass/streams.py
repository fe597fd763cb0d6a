#!/usr/bin/env python
"""
File Description: Labelled prediction streams and their file formats.

A stream is an ordered sequence of (base prediction, true label) records. Two encodings are supported:

* JSON Lines, one object per line: {"p": [0.8, 0.2], "y": 0, "id": "optional"}
* CSV with a header naming p_0 .. p_{K-1}, y and optionally id; unknown columns are ignored on read.

Probabilities are clamped to [epsilon, 1 - epsilon] and renormalised on read so downstream log losses stay finite.
"""

# ******************************************    Libraries to be imported    ****************************************** #
import csv
import io
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from protclass.cox import NORMALIZE_TOLERANCE, ProbVector
from protclass.errors import InvalidLabelError, InvalidProbabilityError, StreamFormatError

logger = logging.getLogger(__name__)

DEFAULT_CLAMP_EPSILON = 1e-6
FORMATS = ("jsonl", "csv")

_P_COLUMN = re.compile(r"^p_(\d+)$")


# ****************************************        Function Declaration        **************************************** #
def clamp_probs(probs: Union[np.ndarray, Sequence[float]], epsilon: float = DEFAULT_CLAMP_EPSILON) -> np.ndarray:
    """
    Clip probabilities to [epsilon, 1 - epsilon] and renormalise along the last axis.

    :param probs: One probability vector or a 2-D array of them.
    :param epsilon: Clamping constant.
    :return: New array of the same shape.
    """
    clipped = np.clip(np.asarray(probs, dtype=float), epsilon, 1.0 - epsilon)
    return clipped / clipped.sum(axis=-1, keepdims=True)


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class StreamRecord:
    """One (base prediction, label) pair, with an optional opaque identifier."""

    p: ProbVector
    y: int
    id: Optional[str] = None


# ******************************************    Class Declaration Start     ****************************************** #
class LabeledStream:
    """
    An ordered, immutable sequence of records sharing one class count K.

    Stored column-wise: probs is an (n, K) array, labels an (n,) integer array.
    """

    def __init__(
        self,
        probs: Union[np.ndarray, Sequence[Sequence[float]]],
        labels: Union[np.ndarray, Sequence[int]],
        ids: Optional[Sequence[Optional[str]]] = None,
        K: Optional[int] = None,
    ):
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        if len(labels) == 0:
            width = K if K is not None else 0
            probs = np.zeros((0, width))
        else:
            probs = np.array(probs, dtype=float)
            if probs.ndim != 2 or probs.shape[0] != len(labels):
                raise InvalidProbabilityError(
                    f"expected {len(labels)} probability rows, got array of shape {probs.shape}"
                )
            if K is not None and probs.shape[1] != K:
                raise InvalidProbabilityError(f"expected {K} classes, got {probs.shape[1]}")
            if probs.shape[1] < 2:
                raise InvalidProbabilityError("a stream needs at least 2 classes")
            if not np.all(np.isfinite(probs)) or np.any(probs < 0.0):
                raise InvalidProbabilityError("stream probabilities must be finite and non-negative")
            totals = probs.sum(axis=1, keepdims=True)
            if np.any(np.abs(totals - 1.0) > NORMALIZE_TOLERANCE):
                bad = int(np.argmax(np.abs(totals[:, 0] - 1.0)))
                raise InvalidProbabilityError(f"row {bad} sums to {totals[bad, 0]!r}, not 1")
            probs = probs / totals
            if np.any(labels < 0) or np.any(labels >= probs.shape[1]):
                raise InvalidLabelError(f"labels must lie in 0..{probs.shape[1] - 1}")
        if ids is not None and len(ids) != len(labels):
            raise InvalidProbabilityError(f"got {len(ids)} ids for {len(labels)} records")
        probs.flags.writeable = False
        labels.flags.writeable = False
        self._probs = probs
        self._labels = labels
        self._ids = tuple(ids) if ids is not None else None

    @classmethod
    def from_records(cls, records: Iterable[Union[StreamRecord, Tuple]], K: Optional[int] = None) -> "LabeledStream":
        """Build a stream from StreamRecords or (p, y) / (p, y, id) tuples."""
        probs, labels, ids = [], [], []
        for rec in records:
            if isinstance(rec, StreamRecord):
                p, y, rid = rec.p, rec.y, rec.id
            else:
                p, y = rec[0], rec[1]
                rid = rec[2] if len(rec) > 2 else None
            row = np.asarray(p, dtype=float)
            if probs and row.shape != probs[0].shape:
                raise InvalidProbabilityError(
                    f"record {len(probs)} has {row.shape[0]} classes, expected {probs[0].shape[0]}"
                )
            probs.append(row)
            labels.append(int(y))
            ids.append(rid)
        has_ids = any(i is not None for i in ids)
        return cls(probs, labels, ids if has_ids else None, K=K)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def ids(self) -> Optional[Tuple[Optional[str], ...]]:
        return self._ids

    @property
    def K(self) -> int:
        return self._probs.shape[1]

    def __len__(self) -> int:
        return len(self._labels)

    def __getitem__(self, index: int) -> StreamRecord:
        rid = self._ids[index] if self._ids is not None else None
        return StreamRecord(ProbVector._trusted(self._probs[index]), int(self._labels[index]), rid)

    def __iter__(self) -> Iterator[StreamRecord]:
        for i in range(len(self)):
            yield self[i]

    def window(self, start: int, stop: Optional[int] = None) -> "LabeledStream":
        """Records start .. stop - 1 as a new stream."""
        ids = self._ids[start:stop] if self._ids is not None else None
        return LabeledStream(self._probs[start:stop], self._labels[start:stop], ids, K=self.K)

    def clamped(self, epsilon: float = DEFAULT_CLAMP_EPSILON) -> "LabeledStream":
        return LabeledStream(clamp_probs(self._probs, epsilon), self._labels, self._ids, K=self.K)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledStream):
            return NotImplemented
        return (
            self._probs.shape == other._probs.shape
            and np.array_equal(self._probs, other._probs)
            and np.array_equal(self._labels, other._labels)
            and self._ids == other._ids
        )

    def __repr__(self) -> str:
        return f"LabeledStream(n={len(self)}, K={self.K})"


# ****************************************        Function Declaration        **************************************** #
def infer_format(path: Union[str, Path]) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".json", ".ndjson"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    raise StreamFormatError(f"cannot infer stream format from suffix {suffix!r}; pass jsonl or csv", path=str(path))


def _check_record(raw_p, raw_y, K: Optional[int], line: int, path: str) -> Tuple[np.ndarray, int]:
    try:
        p = ProbVector(raw_p).entries
    except (InvalidProbabilityError, TypeError, ValueError) as exc:
        raise StreamFormatError(f"bad probability vector: {exc}", line=line, path=path) from exc
    if K is not None and p.shape[0] != K:
        raise StreamFormatError(f"record has {p.shape[0]} classes but the stream started with {K}", line, path)
    if isinstance(raw_y, bool) or not isinstance(raw_y, int):
        raise StreamFormatError(f"label must be an integer, got {raw_y!r}", line=line, path=path)
    if not 0 <= raw_y < p.shape[0]:
        raise StreamFormatError(f"label {raw_y} outside 0..{p.shape[0] - 1}", line=line, path=path)
    return p, raw_y


def _read_text(path: Path) -> str:
    """Decode a stream file as UTF-8, naming the line of the first undecodable byte."""
    data = path.read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line_no = data.count(b"\n", 0, exc.start) + 1
        raise StreamFormatError(f"not valid UTF-8: {exc.reason}", line=line_no, path=str(path)) from exc


def _parse_jsonl(path: Path) -> Tuple[List[np.ndarray], List[int], List[Optional[str]]]:
    probs, labels, ids = [], [], []
    K = None
    with io.StringIO(_read_text(path), newline="") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StreamFormatError(f"malformed JSON: {exc.msg}", line=line_no, path=str(path)) from exc
            if not isinstance(obj, dict) or "p" not in obj or "y" not in obj:
                raise StreamFormatError("record must be an object with fields p and y", line=line_no, path=str(path))
            if not isinstance(obj["p"], list):
                raise StreamFormatError("field p must be an array", line=line_no, path=str(path))
            p, y = _check_record(obj["p"], obj["y"], K, line_no, str(path))
            K = p.shape[0]
            rid = obj.get("id")
            probs.append(p)
            labels.append(y)
            ids.append(None if rid is None else str(rid))
    return probs, labels, ids


def _parse_csv(path: Path) -> Tuple[List[np.ndarray], List[int], List[Optional[str]], Optional[int]]:
    probs, labels, ids = [], [], []
    with io.StringIO(_read_text(path), newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return probs, labels, ids, None
        p_cols = {}
        for idx, name in enumerate(header):
            match = _P_COLUMN.match(name.strip())
            if match:
                p_cols[int(match.group(1))] = idx
        K = len(p_cols)
        if K < 2 or sorted(p_cols) != list(range(K)):
            raise StreamFormatError("header must name p_0 .. p_{K-1} with K >= 2", line=1, path=str(path))
        names = [h.strip() for h in header]
        if "y" not in names:
            raise StreamFormatError("header must name a y column", line=1, path=str(path))
        y_col = names.index("y")
        id_col = names.index("id") if "id" in names else None
        for row in reader:
            line_no = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise StreamFormatError(f"expected {len(header)} fields, got {len(row)}", line_no, str(path))
            try:
                raw_p = [float(row[p_cols[k]]) for k in range(K)]
                raw_y = int(row[y_col])
            except ValueError as exc:
                raise StreamFormatError(f"malformed field: {exc}", line=line_no, path=str(path)) from exc
            p, y = _check_record(raw_p, raw_y, K, line_no, str(path))
            probs.append(p)
            labels.append(y)
            ids.append(row[id_col] if id_col is not None and row[id_col] != "" else None)
    return probs, labels, ids, K


def parse_stream(
    path: Union[str, Path], fmt: Optional[str] = None, epsilon: float = DEFAULT_CLAMP_EPSILON
) -> LabeledStream:
    """
    Read a labelled stream from disk.

    Every record is validated (on the simplex within 1e-6, label in range, same K as the first record), then clamped
    to [epsilon, 1 - epsilon] and renormalised. Record order is preserved.

    :param path: File to read.
    :param fmt: "jsonl" or "csv"; inferred from the suffix when omitted.
    :param epsilon: Clamping constant.
    :return: The parsed stream.
    :raises StreamFormatError: On any malformed record; the message carries the 1-based line number.
    """
    path = Path(path)
    fmt = fmt or infer_format(path)
    if fmt == "jsonl":
        probs, labels, ids = _parse_jsonl(path)
        K = probs[0].shape[0] if probs else None
    elif fmt == "csv":
        probs, labels, ids, K = _parse_csv(path)
    else:
        raise StreamFormatError(f"unknown stream format {fmt!r}; expected one of {FORMATS}", path=str(path))

    has_ids = any(i is not None for i in ids)
    if not probs:
        return LabeledStream([], [], None, K=K or 2)
    raw = np.vstack(probs)
    clamped = clamp_probs(raw, epsilon)
    moved = int(np.sum(np.any(np.abs(clamped - raw) > epsilon, axis=1)))
    if moved:
        logger.warning("clamping moved %d of %d records in %s by more than epsilon=%g", moved, len(raw), path, epsilon)
    logger.info("parsed %d records (K=%d) from %s", len(labels), clamped.shape[1], path)
    return LabeledStream(clamped, labels, ids if has_ids else None)


# ****************************************        Function Declaration        **************************************** #
def emit_stream(
    stream: LabeledStream,
    path: Union[str, Path],
    fmt: Optional[str] = None,
    extra: Optional[Dict[str, np.ndarray]] = None,
) -> Path:
    """
    Write a stream to disk, optionally with extra per-record vector fields (e.g. p_protected).

    In CSV an extra field ``name`` of width K becomes columns name_0 .. name_{K-1}.

    :param stream: Records to write.
    :param path: Destination.
    :param fmt: "jsonl" or "csv"; inferred from the suffix when omitted.
    :param extra: Mapping of field name to an (n, K) array.
    :return: The path written.
    """
    path = Path(path)
    fmt = fmt or infer_format(path)
    extra = {name: np.asarray(values, dtype=float) for name, values in (extra or {}).items()}
    for name, values in extra.items():
        if values.shape[0] != len(stream):
            raise StreamFormatError(f"extra field {name} has {values.shape[0]} rows for {len(stream)} records")
    path.parent.mkdir(parents=True, exist_ok=True)
    ids = stream.ids

    if fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for i in range(len(stream)):
                obj = {"p": stream.probs[i].tolist(), "y": int(stream.labels[i])}
                if ids is not None and ids[i] is not None:
                    obj["id"] = ids[i]
                for name, values in extra.items():
                    obj[name] = values[i].tolist()
                fh.write(json.dumps(obj) + "\n")
    elif fmt == "csv":
        header = [f"p_{k}" for k in range(stream.K)] + ["y"]
        if ids is not None:
            header.append("id")
        for name, values in extra.items():
            header.extend(f"{name}_{k}" for k in range(values.shape[1]))
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(len(stream)):
                row = [repr(v) for v in stream.probs[i].tolist()] + [int(stream.labels[i])]
                if ids is not None:
                    row.append("" if ids[i] is None else ids[i])
                for values in extra.values():
                    row.extend(repr(v) for v in values[i].tolist())
                writer.writerow(row)
    else:
        raise StreamFormatError(f"unknown stream format {fmt!r}; expected one of {FORMATS}", path=str(path))
    logger.info("wrote %d records to %s", len(stream), path)
    return path
