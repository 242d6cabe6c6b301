"""Analytic-signal construction and amplitude normalization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateSignalError, SignalLengthError


@dataclass(frozen=True)
class AnalyticSignal:
    """Complex analytic signal with its polar readout.

    ``imag_part`` is the discrete Hilbert transform of ``real_part``;
    ``amplitude`` is the instantaneous envelope and ``phase`` the
    instantaneous angle.
    """

    real_part: np.ndarray
    imag_part: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray


def hilbert_analytic(x) -> AnalyticSignal:
    """Build the analytic signal by one-sided spectrum construction.

    Forward FFT, zero the negative frequencies, double the positive
    ones (DC and Nyquist stay unscaled), inverse FFT. The modulus of
    the result is the instantaneous amplitude.

    Raises
    ------
    DataError
        Non-finite input samples.
    SignalLengthError
        Fewer than 8 samples.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 8:
        raise SignalLengthError(
            "envelope.hilbert_analytic", f"need at least 8 samples, got {x.size}"
        )
    if not np.all(np.isfinite(x)):
        idx = int(np.argmax(~np.isfinite(x)))
        raise DataError(
            "envelope.hilbert_analytic", f"non-finite sample at index {idx}"
        )
    n = x.size
    spectrum = np.fft.fft(x)
    gain = np.zeros(n)
    gain[0] = 1.0
    if n % 2 == 0:
        gain[n // 2] = 1.0
        gain[1 : n // 2] = 2.0
    else:
        gain[1 : (n + 1) // 2] = 2.0
    z = np.fft.ifft(spectrum * gain)
    return AnalyticSignal(
        real_part=z.real,
        imag_part=z.imag,
        amplitude=np.abs(z),
        phase=np.arctan2(z.imag, z.real),
    )


def unit_variance_normalize(x) -> np.ndarray:
    """Remove the mean and scale to unit population (1/N) variance.

    Idempotent, and invariant to positive affine rescaling of the
    input.

    Raises
    ------
    DegenerateSignalError
        Zero-variance input.
    """
    x = np.asarray(x, dtype=float)
    centered = x - x.mean()
    sd = np.sqrt(np.mean(centered**2))
    if sd == 0 or not np.isfinite(sd):
        raise DegenerateSignalError(
            "envelope.unit_variance_normalize", "input has zero variance"
        )
    return centered / sd
