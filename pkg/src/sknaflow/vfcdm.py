"""Complex-demodulation time-frequency decomposition.

A signal is split into fixed, equal-width frequency bands by shifting
each band center to DC with a complex exponential, lowpassing at half
the band width, and reading instantaneous amplitude and phase off the
complex lowpassed signal. An optional refinement stage re-demodulates
along an instantaneous-frequency track for sharper amplitude estimates.

Bands are always addressed by their edge frequencies in Hz, never by
ordinal position.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DataError, ParameterError
from .filters import FilterSpec, apply_filter, design_fir

log = logging.getLogger(__name__)

DEFAULT_N_COMPONENTS = 12
DEFAULT_BAND_WIDTH_HZ = 160.0


@dataclass(frozen=True)
class BandComponent:
    """One narrowband component around a fixed center frequency.

    ``reconstructed`` always satisfies
    ``amplitude * cos(2*pi*center_hz*t + phase)``; refined components
    fold their frequency-track deviation into ``phase``.
    """

    center_hz: float
    amplitude: np.ndarray
    phase: np.ndarray
    reconstructed: np.ndarray
    band: tuple[float, float]


@dataclass(frozen=True)
class Decomposition:
    """Ordered bank of band components tiling [0, n * band_width] Hz.

    ``dc`` holds the lowpassed signal below half a band width. The
    lowest component already folds in near-DC content through its
    demodulation image, so summing components alone reconstructs the
    band-limited input; ``dc`` is informational.
    """

    components: tuple[BandComponent, ...]
    fs: float
    dc: np.ndarray

    def select(self, low_hz: float, high_hz: float) -> np.ndarray:
        """Sum the reconstructed components whose bands lie in [low, high]."""
        total = np.zeros(self.components[0].reconstructed.size)
        picked = 0
        for comp in self.components:
            if comp.band[0] >= low_hz - 1e-9 and comp.band[1] <= high_hz + 1e-9:
                total += comp.reconstructed
                picked += 1
        if picked == 0:
            raise ParameterError(
                "vfcdm.Decomposition.select",
                f"no component bands inside ({low_hz:g}, {high_hz:g}) Hz",
            )
        return total


@dataclass(frozen=True)
class FrequencyTrack:
    """Per-sample instantaneous frequency in Hz.

    Meaningful where the originating component's amplitude is well above
    zero; the track can wander when there is nothing to demodulate.
    """

    f_t: np.ndarray


def _demodulate(x, fs, f0, h, t):
    z = x * np.exp(t * (-2j * np.pi * f0))
    z_lp = apply_filter(z.real, h) + 1j * apply_filter(z.imag, h)
    amplitude = 2.0 * np.abs(z_lp)
    phase = np.unwrap(np.angle(z_lp))
    return amplitude, phase


def cdm_component(
    x, fs: float, f0: float, fc: float, lpf_spec: FilterSpec | None = None
) -> BandComponent:
    """Extract the component in the band f0 +- fc by complex demodulation.

    The signal is shifted down by f0, lowpassed at fc with a zero-phase
    FIR, and the component is read back as amplitude ``2 * |z_lp|`` and
    unwrapped phase, then re-centered on the carrier.

    Parameters
    ----------
    x : array-like
        Real input signal.
    fs : float
        Sampling rate in Hz.
    f0 : float
        Band center in Hz; must lie below Nyquist.
    fc : float
        Lowpass cutoff, half the band width. The lowest band uses
        fc = f0, which folds the residual below f0 into this component.
    lpf_spec : FilterSpec, optional
        Override for the lowpass design (e.g. a higher order).

    Raises
    ------
    ParameterError
        Non-positive fc, f0 at or above Nyquist, or fc > f0 for a
        nonzero center (the demodulation image would alias).
    """
    x = np.asarray(x, dtype=float)
    if fc <= 0:
        raise ParameterError("vfcdm.cdm_component", f"fc must be positive, got {fc}")
    if f0 < 0 or f0 >= fs / 2:
        raise ParameterError(
            "vfcdm.cdm_component", f"f0 {f0:g} Hz must be in [0, fs/2) at fs {fs:g}"
        )
    if f0 > 0 and fc > f0:
        raise ParameterError(
            "vfcdm.cdm_component", f"fc {fc:g} Hz exceeds center f0 {f0:g} Hz"
        )
    if lpf_spec is None:
        lpf_spec = FilterSpec("lowpass", (fc,))
    h = design_fir(lpf_spec, fs)
    t = np.arange(x.size) / fs
    amplitude, phase = _demodulate(x, fs, f0, h, t)
    reconstructed = amplitude * np.cos(2 * np.pi * f0 * t + phase)
    band = (max(f0 - fc, 0.0), f0 + fc)
    return BandComponent(float(f0), amplitude, phase, reconstructed, band)


def decompose(
    x,
    fs: float,
    n_components: int = DEFAULT_N_COMPONENTS,
    band_width_hz: float = DEFAULT_BAND_WIDTH_HZ,
    workers: int | None = None,
    filter_order: int | None = None,
) -> Decomposition:
    """Decompose a signal into n equal-width band components.

    Centers sit at ``band_width * (k - 1/2)`` for k = 1..n, so the bands
    tile (0, n * band_width) without overlap. Components are computed
    independently, optionally across a thread pool; results are
    collected in band order, so output is identical for any worker
    count.

    Parameters
    ----------
    workers : int, optional
        Thread count for per-band work (default: serial).
    filter_order : int, optional
        Override the demodulation lowpass order (e.g. 4x the default
        for a sharper band split).

    Raises
    ------
    ParameterError
        If the highest band edge reaches Nyquist.
    """
    x = np.asarray(x, dtype=float)
    if n_components < 1:
        raise ParameterError(
            "vfcdm.decompose", f"n_components must be >= 1, got {n_components}"
        )
    top = n_components * band_width_hz
    if top >= fs / 2:
        raise ParameterError(
            "vfcdm.decompose",
            f"highest band edge {top:g} Hz must stay below Nyquist {fs / 2:g} Hz",
        )
    fc = band_width_hz / 2.0
    spec = FilterSpec("lowpass", (fc,), order_or_q=filter_order)
    h = design_fir(spec, fs)
    t = np.arange(x.size) / fs
    centers = [band_width_hz * (k - 0.5) for k in range(1, n_components + 1)]

    def one(f0):
        amplitude, phase = _demodulate(x, fs, f0, h, t)
        reconstructed = amplitude * np.cos(2 * np.pi * f0 * t + phase)
        return BandComponent(
            float(f0), amplitude, phase, reconstructed, (max(f0 - fc, 0.0), f0 + fc)
        )

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            components = tuple(pool.map(one, centers))
    else:
        components = tuple(one(f0) for f0 in centers)
    dc = apply_filter(x, h)
    return Decomposition(components, float(fs), dc)


def instantaneous_frequency(component: BandComponent, fs: float) -> FrequencyTrack:
    """Differentiate a component's phase into a frequency track.

    Central differences in the interior and one-sided differences at the
    endpoints, scaled to Hz and offset by the band center.
    """
    dphi = np.gradient(component.phase)
    return FrequencyTrack(component.center_hz + dphi * (fs / (2.0 * np.pi)))


def vfcdm_refine(x, fs: float, track: FrequencyTrack, fc2: float) -> BandComponent:
    """Re-demodulate along a frequency track with a narrow lowpass.

    The demodulator phase is the cumulative trapezoidal integral of the
    track, so a slowly varying oscillation is held near DC and survives
    a much tighter cutoff than the fixed-band stage allows. The result
    is re-expressed against the track mean as carrier, making it a
    drop-in BandComponent. A constant track reduces to
    :func:`cdm_component` at that center.

    Raises
    ------
    DataError
        Non-finite track values.
    ParameterError
        fc2 not in (0, min(track)).
    """
    x = np.asarray(x, dtype=float)
    f_t = np.asarray(track.f_t, dtype=float)
    if f_t.size != x.size:
        raise ParameterError(
            "vfcdm.vfcdm_refine",
            f"track length {f_t.size} does not match signal length {x.size}",
        )
    if not np.all(np.isfinite(f_t)):
        raise DataError("vfcdm.vfcdm_refine", "frequency track has non-finite values")
    if fc2 <= 0 or fc2 >= float(np.min(f_t)):
        raise ParameterError(
            "vfcdm.vfcdm_refine",
            f"fc2 {fc2:g} Hz must be in (0, min(track) = {float(np.min(f_t)):g})",
        )
    theta = cumulative_trapezoid(f_t, dx=1.0 / fs, initial=0.0)
    z = x * np.exp(-2j * np.pi * theta)
    h = design_fir(FilterSpec("lowpass", (fc2,)), fs)
    z_lp = apply_filter(z.real, h) + 1j * apply_filter(z.imag, h)
    amplitude = 2.0 * np.abs(z_lp)
    center = float(np.mean(f_t))
    t = np.arange(x.size) / fs
    # Fold the track's deviation from the mean carrier into the phase so
    # the standard reconstruction identity holds.
    phase = np.unwrap(np.angle(z_lp)) + 2.0 * np.pi * (theta - center * t)
    reconstructed = amplitude * np.cos(2.0 * np.pi * center * t + phase)
    return BandComponent(
        center, amplitude, phase, reconstructed, (max(center - fc2, 0.0), center + fc2)
    )
