"""Time-domain filtering primitives.

Covers rational resampling, windowed-sinc FIR design and zero-phase
application, an IIR notch cascade, rectification, and the centered
moving average. Everything here is pure and reentrant: distinct signals
may be filtered concurrently without shared state.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import signal as sps

from .errors import (
    FilterDesignError,
    ParameterError,
    ParseError,
    SignalLengthError,
    UnsupportedRatioError,
    ValidationError,
)

log = logging.getLogger(__name__)

FILTER_KINDS = ("lowpass", "highpass", "bandpass", "notch")

# Hamming-window design constants: ~53 dB stopband, transition width
# approximately 3.3 / numtaps in normalized frequency.
HAMMING_TRANSITION_FACTOR = 3.3
# Default transition width as a fraction of the narrower spectral margin.
DEFAULT_TRANSITION_FRAC = 0.2

# Resampler anti-alias design: cutoff relative to the narrower Nyquist,
# stopband edge at half the output rate, Kaiser window sized for 75 dB.
RESAMPLE_CUTOFF_FRAC = 0.45
RESAMPLE_STOP_FRAC = 0.5
RESAMPLE_ATTEN_DB = 75.0
MAX_RESAMPLE_DENOMINATOR = 64

DEFAULT_NOTCH_Q = 30.0


@dataclass(frozen=True)
class FilterSpec:
    """Declarative description of a single FIR filtering stage.

    Parameters
    ----------
    kind : {"lowpass", "highpass", "bandpass", "notch"}
        Response shape. "notch" is a band-stop here; narrow tonal notches
        are better served by :func:`apply_notch_bank`.
    cutoffs_hz : tuple of float
        One edge for lowpass/highpass, two (low, high) otherwise.
    order_or_q : float, optional
        Explicit filter order. When omitted the order is chosen so the
        transition band stays within ``DEFAULT_TRANSITION_FRAC`` of the
        narrower spectral margin.
    zero_phase : bool
        Whether application compensates group delay (default True).
    """

    kind: str
    cutoffs_hz: tuple[float, ...]
    order_or_q: float | None = None
    zero_phase: bool = True

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ParameterError(
                "filters.FilterSpec", f"unknown filter kind {self.kind!r}"
            )
        cuts = tuple(float(c) for c in self.cutoffs_hz)
        object.__setattr__(self, "cutoffs_hz", cuts)
        want = 1 if self.kind in ("lowpass", "highpass") else 2
        if len(cuts) != want:
            raise ParameterError(
                "filters.FilterSpec",
                f"{self.kind} takes {want} cutoff(s), got {len(cuts)}",
            )
        if any(c <= 0 for c in cuts):
            raise ParameterError(
                "filters.FilterSpec", f"cutoffs must be positive, got {cuts}"
            )
        if len(cuts) == 2 and cuts[0] >= cuts[1]:
            raise ParameterError(
                "filters.FilterSpec", f"cutoffs must satisfy low < high, got {cuts}"
            )
        if self.order_or_q is not None and self.order_or_q <= 0:
            raise ParameterError(
                "filters.FilterSpec", f"order must be positive, got {self.order_or_q}"
            )


@dataclass(frozen=True)
class NotchList:
    """Ordered bank of IIR notch targets as (center_hz, q) pairs."""

    entries: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        entries = tuple((float(c), float(q)) for c, q in self.entries)
        object.__setattr__(self, "entries", entries)
        centers = [c for c, _ in entries]
        if any(c <= 0 for c in centers) or any(q <= 0 for _, q in entries):
            raise ValidationError(
                "filters.notch_list", f"centers and q must be positive: {entries}"
            )
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ValidationError(
                "filters.notch_list",
                f"centers must be strictly increasing: {centers}",
            )


def load_notch_list(path) -> NotchList:
    """Read a notch bank from a CSV with header ``center_hz,q``.

    A blank q falls back to ``DEFAULT_NOTCH_Q``.
    """
    entries = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["center_hz", "q"]:
            raise ParseError(
                "filters.load_notch_list",
                f"{path}: expected header 'center_hz,q', got {header!r}",
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                center = float(row[0])
                q = float(row[1]) if len(row) > 1 and row[1].strip() else DEFAULT_NOTCH_Q
            except (ValueError, IndexError):
                raise ParseError(
                    "filters.load_notch_list", f"{path}: bad row at line {lineno}: {row!r}"
                ) from None
            entries.append((center, q))
    return NotchList(tuple(entries))


def _spectral_margin(spec: FilterSpec, fs: float) -> float:
    """Narrowest distance from a band edge to DC, Nyquist, or the other edge."""
    ny = fs / 2.0
    cuts = spec.cutoffs_hz
    if len(cuts) == 1:
        return min(cuts[0], ny - cuts[0])
    lo, hi = cuts
    return min(lo, hi - lo, ny - hi)


def design_fir(spec: FilterSpec, fs: float) -> np.ndarray:
    """Design a linear-phase Hamming windowed-sinc FIR filter.

    Parameters
    ----------
    spec : FilterSpec
        Filter description; cutoffs must lie strictly below fs / 2.
    fs : float
        Sampling rate in Hz.

    Returns
    -------
    numpy.ndarray
        Odd-length symmetric coefficient array. Lowpass designs have a
        DC gain of exactly 1 after windowing normalization.

    Raises
    ------
    ParameterError
        If a cutoff reaches Nyquist.
    FilterDesignError
        If an explicit order is too small to fit a transition band
        inside the available spectral margin.
    """
    ny = fs / 2.0
    if max(spec.cutoffs_hz) >= ny:
        raise ParameterError(
            "filters.design_fir",
            f"cutoffs {spec.cutoffs_hz} must be strictly below Nyquist {ny}",
        )
    margin = _spectral_margin(spec, fs)
    if spec.order_or_q is not None:
        order = int(spec.order_or_q)
        min_order = HAMMING_TRANSITION_FACTOR * fs / margin
        if order < min_order:
            raise FilterDesignError(
                "filters.design_fir",
                f"order {order} too small: transition would exceed the "
                f"{margin:g} Hz margin (need >= {math.ceil(min_order)})",
            )
    else:
        transition = DEFAULT_TRANSITION_FRAC * margin
        order = math.ceil(HAMMING_TRANSITION_FACTOR * fs / transition)
    if order % 2:
        order += 1  # keep numtaps odd so the design stays type I
    pass_zero = spec.kind in ("lowpass", "notch")
    return sps.firwin(
        order + 1, list(spec.cutoffs_hz), window="hamming", pass_zero=pass_zero, fs=fs
    )


def apply_filter(
    x, coefficients, zero_phase: bool = True
) -> np.ndarray:
    """Apply an FIR filter, optionally compensating its group delay.

    Zero-phase application reflect-pads the signal by one filter length,
    convolves, and crops with the group delay removed, so the output is
    aligned to the input and has the same length. The non-zero-phase
    path is plain causal filtering.

    Raises
    ------
    SignalLengthError
        If the signal is not longer than the filter.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(coefficients, dtype=float)
    n, m = x.size, h.size
    if n <= m:
        raise SignalLengthError(
            "filters.apply_filter", f"signal length {n} must exceed filter length {m}"
        )
    if not zero_phase:
        return sps.lfilter(h, [1.0], x)
    xp = np.pad(x, m, mode="reflect")
    y = sps.convolve(xp, h, mode="full", method="auto")
    start = m + (m - 1) // 2
    return y[start : start + n]


def _rational_ratio(fs_in: float, fs_out: float) -> Fraction:
    frac = Fraction(fs_out / fs_in).limit_denominator(MAX_RESAMPLE_DENOMINATOR)
    if frac <= 0 or abs(float(frac) - fs_out / fs_in) > 1e-9 * (fs_out / fs_in):
        raise UnsupportedRatioError(
            "filters.resample",
            f"{fs_in:g} -> {fs_out:g} Hz is not a ratio of integers with "
            f"denominator <= {MAX_RESAMPLE_DENOMINATOR}",
        )
    return frac


def resample(x, fs_in: float, fs_out: float) -> np.ndarray:
    """Polyphase rational resampling with a Kaiser anti-alias lowpass.

    The anti-alias cutoff sits at ``RESAMPLE_CUTOFF_FRAC`` of the
    narrower of the two rates and the stopband starts at half the output
    rate with >= 60 dB attenuation. Each polyphase branch is normalized
    to unit DC gain so constant signals pass through unchanged. Output
    length is ``ceil(len(x) * fs_out / fs_in)``.

    Raises
    ------
    UnsupportedRatioError
        If fs_out / fs_in needs a denominator above 64.
    SignalLengthError
        If the signal is too short to pad for the anti-alias filter.
    """
    x = np.asarray(x, dtype=float)
    if fs_in <= 0 or fs_out <= 0:
        raise ParameterError(
            "filters.resample", f"rates must be positive, got {fs_in}, {fs_out}"
        )
    frac = _rational_ratio(fs_in, fs_out)
    up, down = frac.numerator, frac.denominator
    if up == down:
        return x.copy()

    fs_up = fs_in * up
    narrow = min(fs_in, fs_out)
    cutoff = RESAMPLE_CUTOFF_FRAC * narrow
    stop = RESAMPLE_STOP_FRAC * narrow
    numtaps, beta = sps.kaiserord(RESAMPLE_ATTEN_DB, (stop - cutoff) / (fs_up / 2.0))
    if numtaps % 2 == 0:
        numtaps += 1
    h = sps.firwin(numtaps, cutoff, window=("kaiser", beta), fs=fs_up)
    # Exact DC preservation: force every polyphase branch to sum to 1/up.
    for p in range(up):
        branch = h[p::up]
        h[p::up] = branch * ((1.0 / up) / branch.sum())

    delay = (numtaps - 1) // 2
    pad = math.ceil(numtaps / up) + 1
    while (pad * up + delay) % down:
        pad += 1  # keep the output grid aligned with input sample 0
    if pad >= x.size:
        raise SignalLengthError(
            "filters.resample",
            f"signal of {x.size} samples is too short for a {numtaps}-tap "
            "anti-alias filter",
        )
    xp = np.pad(x, pad, mode="reflect")
    y = sps.upfirdn(h * up, xp, up=up, down=down)
    first = (pad * up + delay) // down
    n_out = math.ceil(x.size * up / down)
    return y[first : first + n_out]


def apply_notch_bank(x, fs: float, notches: NotchList) -> np.ndarray:
    """Run a cascade of second-order IIR notches, forward and backward.

    Forward-backward application keeps the result zero phase and doubles
    the attenuation at each center. An empty bank is the identity.

    Raises
    ------
    ParameterError
        If any center is at or above Nyquist.
    """
    x = np.asarray(x, dtype=float)
    if not notches.entries:
        return x.copy()
    ny = fs / 2.0
    for center, q in notches.entries:
        if center >= ny:
            raise ParameterError(
                "filters.apply_notch_bank",
                f"notch center {center:g} Hz is not below Nyquist {ny:g} Hz",
            )
    y = x
    for center, q in notches.entries:
        b, a = sps.iirnotch(center, q, fs=fs)
        y = sps.filtfilt(b, a, y)
    return y


def rectify(x) -> np.ndarray:
    """Full-wave rectification (elementwise absolute value)."""
    return np.abs(np.asarray(x, dtype=float))


def moving_average(x, fs: float, window_s: float) -> np.ndarray:
    """Centered sliding mean with edge windows shrunk to the data.

    The window holds ``N = round(window_s * fs)`` samples. Interior
    samples average N neighbors centered on the sample; near the edges
    the window is clipped to the available samples, so a constant input
    maps to itself everywhere.

    Raises
    ------
    ParameterError
        If the window covers less than one sample.
    """
    x = np.asarray(x, dtype=float)
    n_taps = int(round(window_s * fs))
    if n_taps < 1:
        raise ParameterError(
            "filters.moving_average",
            f"window of {window_s!r} s at {fs:g} Hz covers no samples",
        )
    n = x.size
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(n)
    left = np.clip(idx - (n_taps - 1) // 2, 0, n)
    right = np.clip(idx + n_taps // 2 + 1, 0, n)
    return (csum[right] - csum[left]) / (right - left)
