"""Welch power spectral density and band-power aggregation."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import ParameterError, SignalLengthError

log = logging.getLogger(__name__)

# Default analysis bands in Hz, tiling 150 to 2000.
DEFAULT_PSD_BANDS = (
    (150.0, 250.0),
    (250.0, 500.0),
    (500.0, 750.0),
    (750.0, 1000.0),
    (1000.0, 1250.0),
    (1250.0, 1500.0),
    (1500.0, 1750.0),
    (1750.0, 2000.0),
)

DEFAULT_PSD_WINDOW_S = 4.0
DEFAULT_PSD_OVERLAP = 0.5

# The spectral path sits above this highpass edge; frequencies below carry
# cardiac and motion energy rather than nerve activity.
PSD_HIGHPASS_HZ = 150.0


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided power spectral density in units^2 per Hz."""

    freqs_hz: np.ndarray
    power: np.ndarray
    window_s: float
    overlap_frac: float


@dataclass(frozen=True)
class BandPowerRow:
    band: tuple[float, float]
    absolute_power: float
    normalized_pct: float


def welch_psd(
    x,
    fs: float,
    window_s: float = DEFAULT_PSD_WINDOW_S,
    overlap_frac: float = DEFAULT_PSD_OVERLAP,
) -> PsdEstimate:
    """Estimate a one-sided PSD by Welch's method.

    Hamming-windowed segments of ``window_s`` seconds with fractional
    overlap ``overlap_frac`` are averaged; density scaling makes the
    integral over frequency match the signal variance.

    Raises
    ------
    SignalLengthError
        If the signal is shorter than one window.
    ParameterError
        If the overlap fraction is outside [0, 1).
    """
    x = np.asarray(x, dtype=float)
    if not 0 <= overlap_frac < 1:
        raise ParameterError(
            "spectral.welch_psd", f"overlap_frac must be in [0, 1), got {overlap_frac}"
        )
    nperseg = int(round(window_s * fs))
    if nperseg < 2 or x.size < nperseg:
        raise SignalLengthError(
            "spectral.welch_psd",
            f"signal of {x.size} samples shorter than one {window_s:g} s window "
            f"({nperseg} samples)",
        )
    freqs, power = sps.welch(
        x,
        fs=fs,
        window="hamming",
        nperseg=nperseg,
        noverlap=int(round(nperseg * overlap_frac)),
        detrend="constant",
        scaling="density",
    )
    return PsdEstimate(freqs, power, float(window_s), float(overlap_frac))


def band_power(psd: PsdEstimate, bands) -> list[BandPowerRow]:
    """Integrate the PSD over each band and normalize across them.

    Absolute power is the trapezoidal integral with the band edges
    interpolated onto the frequency grid, which makes adjacent bands
    exactly additive. Normalized power is each band's share of the sum
    over the requested bands, in percent.

    Raises
    ------
    ParameterError
        If a band reaches outside the PSD's frequency range.
    """
    freqs, power = psd.freqs_hz, psd.power
    absolutes = []
    for low, high in bands:
        if low >= high:
            raise ParameterError(
                "spectral.band_power", f"band ({low:g}, {high:g}) has low >= high"
            )
        if low < freqs[0] or high > freqs[-1]:
            raise ParameterError(
                "spectral.band_power",
                f"band ({low:g}, {high:g}) outside PSD range "
                f"({freqs[0]:g}, {freqs[-1]:g})",
            )
        inner = (freqs > low) & (freqs < high)
        grid = np.concatenate(([low], freqs[inner], [high]))
        vals = np.concatenate(
            ([np.interp(low, freqs, power)], power[inner], [np.interp(high, freqs, power)])
        )
        absolutes.append(float(np.trapezoid(vals, grid)))
    total = sum(absolutes)
    rows = []
    for (low, high), absolute in zip(bands, absolutes):
        pct = 100.0 * absolute / total if total > 0 else 0.0
        rows.append(BandPowerRow((float(low), float(high)), absolute, pct))
    return rows


def psd_auc_comparison(index_values, labels) -> float:
    """AUC of per-segment band-power scores against baseline/task labels.

    ``labels`` may be booleans (True = task) or the strings "baseline"
    and "task". Forwards to the ROC machinery in :mod:`sknaflow.metrics`.

    Raises
    ------
    DegenerateRocError
        If either class is empty.
    """
    from .metrics import LabeledScores, auc, roc

    values = [float(v) for v in index_values]
    flags = [
        bool(lab) if isinstance(lab, (bool, np.bool_)) else str(lab) == "task"
        for lab in labels
    ]
    if len(values) != len(flags):
        raise ParameterError(
            "spectral.psd_auc_comparison",
            f"{len(values)} values but {len(flags)} labels",
        )
    scores = LabeledScores(
        negatives=[v for v, f in zip(values, flags) if not f],
        positives=[v for v, f in zip(values, flags) if f],
    )
    return auc(roc(scores))
