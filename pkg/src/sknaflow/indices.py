"""End-to-end index pipelines and per-segment statistics.

Two index families share the preprocessing front end (rational
resampling plus an optional notch cascade):

- a band-selective envelope index: demodulation-based decomposition,
  band-selected reconstruction summed and normalized to unit variance,
  instantaneous amplitude via the analytic signal, then a short moving
  average;
- an integrated index: zero-phase bandpass, full-wave rectification,
  then the same moving average.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .envelope import hilbert_analytic, unit_variance_normalize
from .errors import ParameterError, WindowError
from .filters import (
    FilterSpec,
    NotchList,
    apply_filter,
    apply_notch_bank,
    design_fir,
    moving_average,
    rectify,
    resample,
)
from .ingest import Recording, SegmentAnnotation
from .metrics import population_sd
from .vfcdm import Decomposition, decompose

log = logging.getLogger(__name__)

DEFAULT_TARGET_FS = 4000.0
DEFAULT_SMOOTHING_S = 0.1

# Envelope-index band presets over the 160 Hz decomposition grid.
TVSKNA_SELECTIONS = (
    ("tvskna1", 160.0, 1120.0),
    ("tvskna2", 320.0, 1120.0),
    ("tvskna3", 480.0, 1120.0),
)

ISKNA_BAND = (500.0, 1000.0)

# Analysis window per condition, in seconds from segment start.
DEFAULT_SEGMENT_WINDOWS = {"VM": 30.0, "ST": 120.0, "TG": 10.0}


@dataclass(frozen=True)
class BandSelection:
    """Named frequency range for the envelope index."""

    name: str
    low_hz: float
    high_hz: float

    def __post_init__(self):
        if not 0 <= self.low_hz < self.high_hz:
            raise ParameterError(
                "indices.BandSelection",
                f"need 0 <= low < high, got ({self.low_hz}, {self.high_hz})",
            )


def tvskna_presets() -> list[BandSelection]:
    return [BandSelection(n, lo, hi) for n, lo, hi in TVSKNA_SELECTIONS]


@dataclass(frozen=True)
class IndexSeries:
    """A nonnegative index time series for one channel and method."""

    method: str
    band_low_hz: float
    band_high_hz: float
    values: np.ndarray
    fs: float
    channel_id: str = ""
    selection: str = ""


@dataclass(frozen=True)
class SegmentIndexSet:
    """Max / mean / sd of an index over one segment's analysis window."""

    segment: SegmentAnnotation
    max: float
    mean: float
    sd: float


def preprocess(
    recording: Recording,
    channel: str,
    notches: NotchList = NotchList(),
    target_fs: float = DEFAULT_TARGET_FS,
) -> np.ndarray:
    """Resample one channel to the target rate and run the notch bank.

    No highpass is applied here; spectral reporting adds its own 150 Hz
    highpass on a separate path.
    """
    x = recording.channel(channel)
    y = resample(x, recording.sample_rate_hz, target_fs)
    return apply_notch_bank(y, target_fs, notches)


def _align_selection(selection: BandSelection, band_width_hz: float) -> tuple[float, float]:
    low = round(selection.low_hz / band_width_hz) * band_width_hz
    high = round(selection.high_hz / band_width_hz) * band_width_hz
    if low != selection.low_hz or high != selection.high_hz:
        log.warning(
            "selection %s (%g-%g Hz) rounded to the %g Hz band grid: %g-%g Hz",
            selection.name, selection.low_hz, selection.high_hz,
            band_width_hz, low, high,
        )
    return low, high


def tvskna_from_decomposition(
    decomp: Decomposition,
    selection: BandSelection,
    smoothing_s: float = DEFAULT_SMOOTHING_S,
    channel_id: str = "",
) -> IndexSeries:
    """Envelope index from an existing decomposition.

    Lets several band selections reuse one decomposition of the same
    signal, which is the expensive step.
    """
    first = decomp.components[0]
    band_width = first.band[1] - first.band[0]
    low, high = _align_selection(selection, band_width)
    summed = decomp.select(low, high)
    normalized = unit_variance_normalize(summed)
    amplitude = hilbert_analytic(normalized).amplitude
    values = moving_average(amplitude, decomp.fs, smoothing_s)
    return IndexSeries(
        method="tvskna",
        band_low_hz=low,
        band_high_hz=high,
        values=values,
        fs=decomp.fs,
        channel_id=channel_id,
        selection=selection.name,
    )


def compute_tvskna(
    preprocessed,
    fs: float,
    selection: BandSelection,
    smoothing_s: float = DEFAULT_SMOOTHING_S,
    workers: int | None = None,
    channel_id: str = "",
) -> IndexSeries:
    """Full envelope-index pipeline for one band selection.

    Decompose, sum the reconstructed components inside the selection,
    normalize the sum to unit variance, take the analytic-signal
    amplitude, and smooth with a centered moving average.
    """
    decomp = decompose(preprocessed, fs, workers=workers)
    return tvskna_from_decomposition(decomp, selection, smoothing_s, channel_id)


def compute_iskna(
    preprocessed,
    fs: float,
    band: tuple[float, float] = ISKNA_BAND,
    smoothing_s: float = DEFAULT_SMOOTHING_S,
    channel_id: str = "",
) -> IndexSeries:
    """Integrated index: zero-phase bandpass, rectify, moving average."""
    low, high = band
    if not 0 < low < high < fs / 2:
        raise ParameterError(
            "indices.compute_iskna",
            f"band ({low:g}, {high:g}) must sit inside (0, {fs / 2:g}) Hz",
        )
    h = design_fir(FilterSpec("bandpass", (low, high)), fs)
    filtered = apply_filter(np.asarray(preprocessed, dtype=float), h)
    values = moving_average(rectify(filtered), fs, smoothing_s)
    return IndexSeries(
        method="iskna",
        band_low_hz=float(low),
        band_high_hz=float(high),
        values=values,
        fs=fs,
        channel_id=channel_id,
        selection=f"{low:g}-{high:g}",
    )


def extract_segment_indices(
    series: IndexSeries,
    segments,
    window_s=None,
    offset_s: float = 0.0,
) -> list[SegmentIndexSet]:
    """Compute max, mean, and population sd over each segment's window.

    The analysis window starts ``offset_s`` seconds into the segment and
    runs for the condition's window length (defaults: VM 30 s, ST 120 s,
    TG 10 s).

    Raises
    ------
    WindowError
        If a segment is shorter than offset plus window, or the window
        runs past the end of the series.
    ParameterError
        If a segment's condition has no window length.
    """
    if window_s is None:
        window_s = DEFAULT_SEGMENT_WINDOWS
    out = []
    fs = series.fs
    n = series.values.size
    for seg in segments:
        try:
            win = float(window_s[seg.condition])
        except KeyError:
            raise ParameterError(
                "indices.extract_segment_indices",
                f"no window length for condition {seg.condition!r}",
            ) from None
        if seg.end_s - seg.start_s < offset_s + win:
            raise WindowError(
                "indices.extract_segment_indices",
                f"segment {seg.label} {seg.condition} ({seg.start_s:g}-{seg.end_s:g} s) "
                f"is shorter than its {win:g} s window at offset {offset_s:g} s",
            )
        start = int(round((seg.start_s + offset_s) * fs))
        count = int(round(win * fs))
        if start + count > n:
            raise WindowError(
                "indices.extract_segment_indices",
                f"segment window ({seg.start_s:g} s + {win:g} s) runs past the "
                f"series end at {n / fs:g} s",
            )
        window = series.values[start : start + count]
        out.append(
            SegmentIndexSet(
                segment=seg,
                max=float(window.max()),
                mean=float(window.mean()),
                sd=population_sd(window),
            )
        )
    return out
