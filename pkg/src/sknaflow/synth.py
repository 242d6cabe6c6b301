"""Seeded synthetic recordings with band-limited activity bursts.

The generator writes Gaussian noise and, inside chosen windows, scales
the portion of that same noise falling in a given frequency band. With
gain 1 the construction is exactly the all-noise null, which makes the
generated studies honest negative controls.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

from .errors import SynthSpecError
from .filters import FilterSpec, apply_filter, design_fir
from .ingest import Channel, Recording, SegmentAnnotation, write_annotations

log = logging.getLogger(__name__)

RECORDING_FILENAME = "recording.wav"
ANNOTATIONS_FILENAME = "annotations.csv"


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic recording.

    ``bursts`` lists (start_s, end_s) windows where the in-band noise is
    scaled by ``burst_gain``; the annotation file labels them as task
    segments and the gaps between them as baseline.
    """

    duration_s: float
    fs_hz: float
    seed: int
    bursts: tuple[tuple[float, float], ...]
    burst_gain: float = 5.0
    burst_band_hz: tuple[float, float] = (150.0, 500.0)
    noise_sd: float = 1.0
    taper_s: float = 0.1
    condition: str = "TG"
    vas: float | None = 6.0
    channel_id: str = "ch1"

    def __post_init__(self):
        if self.duration_s <= 0 or self.fs_hz <= 0:
            raise SynthSpecError(
                "synth.SynthSpec",
                f"duration {self.duration_s} s and rate {self.fs_hz} Hz must be positive",
            )
        if self.noise_sd <= 0 or self.burst_gain < 0:
            raise SynthSpecError(
                "synth.SynthSpec",
                f"noise_sd must be positive and burst_gain nonnegative "
                f"(got {self.noise_sd}, {self.burst_gain})",
            )
        low, high = self.burst_band_hz
        if not 0 < low < high < self.fs_hz / 2:
            raise SynthSpecError(
                "synth.SynthSpec",
                f"burst band ({low:g}, {high:g}) must sit inside (0, {self.fs_hz / 2:g}) Hz",
            )
        bursts = tuple((float(a), float(b)) for a, b in self.bursts)
        object.__setattr__(self, "bursts", tuple(sorted(bursts)))
        for a, b in self.bursts:
            if not 0 <= a < b <= self.duration_s:
                raise SynthSpecError(
                    "synth.SynthSpec",
                    f"burst ({a:g}, {b:g}) outside the recording (0, {self.duration_s:g}) s",
                )
            if b - a < 2 * self.taper_s:
                raise SynthSpecError(
                    "synth.SynthSpec",
                    f"burst ({a:g}, {b:g}) shorter than two {self.taper_s:g} s tapers",
                )
        for (a0, b0), (a1, b1) in zip(self.bursts, self.bursts[1:]):
            if a1 < b0:
                raise SynthSpecError(
                    "synth.SynthSpec",
                    f"bursts ({a0:g}, {b0:g}) and ({a1:g}, {b1:g}) overlap",
                )


def load_synth_spec(path) -> SynthSpec:
    """Read a SynthSpec from JSON, rejecting unknown keys."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise SynthSpecError("synth.load_synth_spec", f"{path}: expected a JSON object")
    known = set(SynthSpec.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise SynthSpecError(
            "synth.load_synth_spec", f"{path}: unknown keys {sorted(unknown)}"
        )
    missing = {"duration_s", "fs_hz", "seed", "bursts"} - set(raw)
    if missing:
        raise SynthSpecError(
            "synth.load_synth_spec", f"{path}: missing keys {sorted(missing)}"
        )
    raw = dict(raw)
    raw["bursts"] = tuple(tuple(b) for b in raw["bursts"])
    if "burst_band_hz" in raw:
        raw["burst_band_hz"] = tuple(raw["burst_band_hz"])
    try:
        return SynthSpec(**raw)
    except TypeError as exc:
        raise SynthSpecError("synth.load_synth_spec", f"{path}: {exc}") from None


def _burst_envelope(spec: SynthSpec, n: int) -> np.ndarray:
    fs = spec.fs_hz
    env = np.zeros(n)
    n_taper = int(round(spec.taper_s * fs))
    ramp = (
        0.5 - 0.5 * np.cos(np.pi * np.arange(n_taper) / n_taper)
        if n_taper
        else np.empty(0)
    )
    for start_s, end_s in spec.bursts:
        i0, i1 = int(round(start_s * fs)), int(round(end_s * fs))
        env[i0:i1] = 1.0
        if n_taper:
            env[i0 : i0 + n_taper] = ramp
            env[i1 - n_taper : i1] = ramp[::-1]
    return env


def generate(spec: SynthSpec) -> tuple[Recording, list[SegmentAnnotation]]:
    """Generate the recording and its annotations in memory.

    The same seed always produces identical samples. Bursts are applied
    as ``x += (gain - 1) * envelope * bandpassed(x)``, so gain 1 leaves
    the noise untouched.
    """
    fs = spec.fs_hz
    n = int(round(spec.duration_s * fs))
    rng = np.random.default_rng(spec.seed)
    x = spec.noise_sd * rng.standard_normal(n)
    if spec.bursts and spec.burst_gain != 1.0:
        h = design_fir(FilterSpec("bandpass", spec.burst_band_hz), fs)
        banded = apply_filter(x, h)
        x = x + (spec.burst_gain - 1.0) * _burst_envelope(spec, n) * banded

    annotations = []
    edges = [0.0]
    for start_s, end_s in spec.bursts:
        annotations.append(
            SegmentAnnotation("task", spec.condition, start_s, end_s,
                              spec.vas if spec.condition == "TG" else None)
        )
        if start_s > edges[-1]:
            annotations.append(
                SegmentAnnotation("baseline", spec.condition, edges[-1], start_s, None)
            )
        edges.append(end_s)
    if spec.duration_s > edges[-1]:
        annotations.append(
            SegmentAnnotation("baseline", spec.condition, edges[-1], spec.duration_s, None)
        )
    annotations.sort(key=lambda a: (a.start_s, a.end_s))
    recording = Recording((Channel(spec.channel_id, x),), fs)
    return recording, annotations


def write_synth(spec: SynthSpec, out_dir) -> tuple[str, str]:
    """Generate and write the recording (float64 WAV) and annotations.

    Returns the two file paths. Identical specs write identical bytes.
    """
    os.makedirs(out_dir, exist_ok=True)
    recording, annotations = generate(spec)
    wav_path = os.path.join(out_dir, RECORDING_FILENAME)
    ann_path = os.path.join(out_dir, ANNOTATIONS_FILENAME)
    wavfile.write(wav_path, int(round(spec.fs_hz)), recording.channels[0].samples)
    write_annotations(annotations, ann_path)
    log.info(
        "synthetic recording: %g s at %g Hz, %d task / %d baseline segments",
        spec.duration_s, spec.fs_hz,
        sum(a.label == "task" for a in annotations),
        sum(a.label == "baseline" for a in annotations),
    )
    return wav_path, ann_path
