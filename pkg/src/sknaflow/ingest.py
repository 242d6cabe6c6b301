"""Reading recordings and segment annotations; writing tabular outputs.

Recordings arrive either as CSV with a leading ``time_s`` column or as
PCM WAV. Annotations are CSV rows ``label,condition,start_s,end_s,vas``.
All tabular output goes through :func:`write_table`, which fixes the
column order and number formatting so identical data always serializes
to identical bytes.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.io import wavfile

from .errors import (
    DataError,
    FormatError,
    ParameterError,
    ParseError,
    SchemaError,
    ValidationError,
)

log = logging.getLogger(__name__)

CONDITIONS = ("VM", "ST", "TG")
LABELS = ("baseline", "task")

ANNOTATION_COLUMNS = ["label", "condition", "start_s", "end_s", "vas"]

# Relative tolerance for the uniform-spacing check on CSV time columns.
TIME_SPACING_RTOL = 1e-6

# Significant digits for serialized reals; round-trips within 1e-9 relative.
REAL_DIGITS = 9

VAS_HIGH_PAIN_THRESHOLD = 4.0


class PainGroup(Enum):
    """Pain grouping for thermal-grill task segments by VAS score."""

    LOW_PAIN = "low_pain"
    HIGH_PAIN = "high_pain"


def pain_group(vas: float | None) -> PainGroup | None:
    """Map a VAS score to its pain group.

    Scores in (0, 4) are low pain and scores >= 4 high pain. A missing
    score, or a score of exactly 0, belongs to neither group.
    """
    if vas is None or vas == 0:
        return None
    if vas >= VAS_HIGH_PAIN_THRESHOLD:
        return PainGroup.HIGH_PAIN
    return PainGroup.LOW_PAIN


@dataclass(frozen=True)
class Channel:
    channel_id: str
    samples: np.ndarray
    units: str = "microvolts"


@dataclass(frozen=True)
class Recording:
    """In-memory multichannel recording at a single sampling rate."""

    channels: tuple[Channel, ...]
    sample_rate_hz: float
    start_time: str | None = None

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise DataError(
                "ingest.Recording", f"sample rate must be positive, got {self.sample_rate_hz}"
            )
        if not self.channels:
            raise DataError("ingest.Recording", "recording has no channels")
        lengths = {len(ch.samples) for ch in self.channels}
        if len(lengths) != 1 or 0 in lengths:
            raise DataError(
                "ingest.Recording", f"channels must share one nonzero length, got {sorted(lengths)}"
            )

    @property
    def n_samples(self) -> int:
        return len(self.channels[0].samples)

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    @property
    def channel_ids(self) -> list[str]:
        return [ch.channel_id for ch in self.channels]

    def channel(self, channel_id: str) -> np.ndarray:
        for ch in self.channels:
            if ch.channel_id == channel_id:
                return ch.samples
        raise DataError(
            "ingest.Recording",
            f"no channel {channel_id!r}; have {self.channel_ids}",
        )


@dataclass(frozen=True)
class SegmentAnnotation:
    """One labeled time segment of a recording."""

    label: str
    condition: str
    start_s: float
    end_s: float
    vas: float | None = None

    @property
    def pain_group(self) -> PainGroup | None:
        return pain_group(self.vas)


def _check_finite(samples: np.ndarray, channel_id: str, operation: str):
    bad = ~np.isfinite(samples)
    if bad.any():
        idx = int(np.argmax(bad))
        raise DataError(
            operation,
            f"channel {channel_id!r} has non-finite sample at index {idx}",
        )


def _infer_rate(time_s: np.ndarray) -> float:
    if time_s.size < 2:
        raise FormatError(
            "ingest.load_recording", "need at least 2 rows to infer a sample rate"
        )
    dt = np.diff(time_s)
    if np.any(dt <= 0):
        idx = int(np.argmax(dt <= 0))
        raise FormatError(
            "ingest.load_recording",
            f"time column not strictly increasing at row {idx + 2}",
        )
    dt_nom = (time_s[-1] - time_s[0]) / (time_s.size - 1)
    worst = float(np.max(np.abs(dt - dt_nom)))
    if worst > TIME_SPACING_RTOL * dt_nom:
        raise FormatError(
            "ingest.load_recording",
            f"non-uniform time spacing: max deviation {worst:.3g} s exceeds "
            f"{TIME_SPACING_RTOL:g} relative of {dt_nom:.6g} s",
        )
    fs = 1.0 / dt_nom
    # Snap to an integer rate when the residual is below the spacing tolerance.
    if abs(fs - round(fs)) <= TIME_SPACING_RTOL * fs:
        fs = float(round(fs))
    return fs


def load_recording(path, format: str, scale: float = 1.0) -> Recording:
    """Load a recording from disk.

    Parameters
    ----------
    path : path-like
        File to read.
    format : {"csv", "wav"}
        CSV expects a header ``time_s,<chan1>,...`` over uniformly
        spaced rows; WAV may be integer or float PCM.
    scale : float
        Multiplier applied to every sample (e.g. a per-file conversion
        to microvolts for integer PCM).

    Raises
    ------
    ParseError
        Malformed header or unparseable row.
    FormatError
        Non-uniform time spacing beyond 1e-6 relative.
    DataError
        Non-finite samples.
    """
    if format == "csv":
        return _load_csv(path, scale)
    if format == "wav":
        return _load_wav(path, scale)
    raise ParameterError(
        "ingest.load_recording", f"unknown format {format!r} (expected csv or wav)"
    )


def _load_csv(path, scale: float) -> Recording:
    with open(path, newline="") as fh:
        header_line = fh.readline()
        header = [c.strip() for c in header_line.rstrip("\n").split(",")]
        if len(header) < 2 or header[0] != "time_s" or any(not c for c in header):
            raise ParseError(
                "ingest.load_recording",
                f"{path}: line 1: expected header 'time_s,<chan1>,...', got {header_line!r}",
            )
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ParseError("ingest.load_recording", f"{path}: {exc}") from None
    if data.shape[1] != len(header):
        raise ParseError(
            "ingest.load_recording",
            f"{path}: rows have {data.shape[1]} columns, header has {len(header)}",
        )
    fs = _infer_rate(data[:, 0])
    channels = []
    for j, name in enumerate(header[1:], start=1):
        samples = data[:, j] * scale
        _check_finite(samples, name, "ingest.load_recording")
        channels.append(Channel(name, samples))
    return Recording(tuple(channels), fs)


def _load_wav(path, scale: float) -> Recording:
    rate, data = wavfile.read(path)
    data = np.atleast_2d(np.asarray(data, dtype=float).T).T  # (n, nchan)
    channels = []
    for j in range(data.shape[1]):
        name = f"ch{j + 1}"
        samples = data[:, j] * scale
        _check_finite(samples, name, "ingest.load_recording")
        channels.append(Channel(name, samples))
    return Recording(tuple(channels), float(rate))


def load_annotations(path) -> list[SegmentAnnotation]:
    """Read and validate segment annotations, returned sorted by start time.

    Raises
    ------
    ParseError
        Wrong header or unparseable field.
    ValidationError
        Overlapping segments, bad label or condition, or a VAS score on
        a non-thermal-grill segment.
    ParameterError
        VAS outside [0, 10].
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ANNOTATION_COLUMNS:
            raise ParseError(
                "ingest.load_annotations",
                f"{path}: expected header {','.join(ANNOTATION_COLUMNS)!r}, got {header!r}",
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(ANNOTATION_COLUMNS):
                raise ParseError(
                    "ingest.load_annotations",
                    f"{path}: line {lineno}: expected {len(ANNOTATION_COLUMNS)} fields, got {len(row)}",
                )
            label, condition = row[0].strip(), row[1].strip()
            if label not in LABELS:
                raise ValidationError(
                    "ingest.load_annotations",
                    f"{path}: line {lineno}: label must be one of {LABELS}, got {label!r}",
                )
            if condition not in CONDITIONS:
                raise ValidationError(
                    "ingest.load_annotations",
                    f"{path}: line {lineno}: condition must be one of {CONDITIONS}, got {condition!r}",
                )
            try:
                start_s = float(row[2])
                end_s = float(row[3])
                vas = float(row[4]) if row[4].strip() else None
            except ValueError:
                raise ParseError(
                    "ingest.load_annotations",
                    f"{path}: line {lineno}: unparseable numeric field in {row!r}",
                ) from None
            if start_s < 0 or end_s <= start_s:
                raise ValidationError(
                    "ingest.load_annotations",
                    f"{path}: line {lineno}: need 0 <= start_s < end_s, got {start_s}, {end_s}",
                )
            if vas is not None:
                if not 0 <= vas <= 10:
                    raise ParameterError(
                        "ingest.load_annotations",
                        f"{path}: line {lineno}: vas {vas} outside [0, 10]",
                    )
                if condition != "TG":
                    raise ValidationError(
                        "ingest.load_annotations",
                        f"{path}: line {lineno}: vas given for condition {condition}; "
                        "vas applies to TG only",
                    )
            rows.append(SegmentAnnotation(label, condition, start_s, end_s, vas))
    rows.sort(key=lambda a: (a.start_s, a.end_s))
    for prev, cur in zip(rows, rows[1:]):
        if cur.start_s < prev.end_s:
            raise ValidationError(
                "ingest.load_annotations",
                f"overlapping segments ({prev.start_s:g}-{prev.end_s:g}) and "
                f"({cur.start_s:g}-{cur.end_s:g})",
            )
    return rows


def format_real(value) -> str:
    """Serialize a number deterministically.

    Floats are written with REAL_DIGITS significant digits; integers and
    strings pass through; None becomes the empty string.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0.0:
            v = 0.0  # collapse -0.0
        return format(v, f".{REAL_DIGITS}g")
    return str(value)


def write_table(rows, path, format: str = "csv", columns=None):
    """Write rows of mappings as CSV or JSON with deterministic layout.

    Columns are ordered lexicographically and reals carry 9 significant
    digits, so equal data produces byte-identical files.

    Parameters
    ----------
    rows : list of mapping
        All rows must share one key set.
    path : path-like
        Output file.
    format : {"csv", "json"}
    columns : sequence of str, optional
        Explicit column order for pinned file schemas; also lets an
        empty table still emit its header. Without it, columns are the
        lexicographically sorted row keys.

    Raises
    ------
    SchemaError
        If rows disagree on keys, or disagree with ``columns``.
    """
    if format not in ("csv", "json"):
        raise ParameterError(
            "ingest.write_table", f"unknown format {format!r} (expected csv or json)"
        )
    if columns is not None:
        keys = list(columns)
    elif rows:
        keys = sorted(rows[0].keys())
    else:
        keys = []
    expected = sorted(keys)
    for i, row in enumerate(rows):
        if sorted(row.keys()) != expected:
            raise SchemaError(
                "ingest.write_table",
                f"row {i} keys {sorted(row.keys())} do not match {expected}",
            )

    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(keys)
            for row in rows:
                writer.writerow([format_real(row[k]) for k in keys])
        return

    def jsonable(v):
        if v is None or isinstance(v, (str, bool)):
            return v
        if isinstance(v, (int, np.integer)):
            return int(v)
        return float(format_real(v))

    payload = [{k: jsonable(row[k]) for k in keys} for row in rows]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_recording_csv(recording: Recording, path):
    """Write a recording in the CSV ingestion layout.

    The time column keeps full float precision so the uniform-spacing
    check holds on reload; samples carry 9 significant digits.
    """
    n = recording.n_samples
    fs = recording.sample_rate_hz
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["time_s"] + recording.channel_ids) + "\n")
        cols = [ch.samples for ch in recording.channels]
        for i in range(n):
            fields = [repr(i / fs)] + [format_real(float(c[i])) for c in cols]
            fh.write(",".join(fields) + "\n")


def write_annotations(annotations, path):
    """Write segment annotations in the CSV ingestion layout."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ANNOTATION_COLUMNS)
        for a in annotations:
            writer.writerow(
                [a.label, a.condition, format_real(a.start_s), format_real(a.end_s),
                 format_real(a.vas)]
            )
