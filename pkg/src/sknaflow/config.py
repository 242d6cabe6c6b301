"""Run configuration: a single JSON document driving the batch pipeline.

Every tunable constant has a default matching the reference protocol,
and every resolved value lands in the run manifest, so a run can never
deviate from the defaults silently. A manifest is itself a valid config
input: loading detects the embedded ``config`` object and reuses it.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import ConfigError
from .indices import (
    DEFAULT_SEGMENT_WINDOWS,
    DEFAULT_SMOOTHING_S,
    DEFAULT_TARGET_FS,
    ISKNA_BAND,
    BandSelection,
    tvskna_presets,
)
from .spectral import (
    DEFAULT_PSD_BANDS,
    DEFAULT_PSD_OVERLAP,
    DEFAULT_PSD_WINDOW_S,
    PSD_HIGHPASS_HZ,
)

DEFAULT_SERIES_DUMP_HZ = 100.0
DEFAULT_TFS_DUMP_HZ = 20.0
DEFAULT_ICC_FORM = "two_way_random_single"

_OP = "config.load_config"


@dataclass(frozen=True)
class RecordingRef:
    """One recording file entry in a run config."""

    id: str
    path: str
    format: str
    scale: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration for one batch run."""

    recordings: tuple[RecordingRef, ...]
    annotations_path: str
    notches_path: str | None = None
    channels: tuple[str, ...] | None = None
    target_fs: float = DEFAULT_TARGET_FS
    selections: tuple[BandSelection, ...] = tuple(tvskna_presets())
    iskna_band: tuple[float, float] = ISKNA_BAND
    smoothing_s: float = DEFAULT_SMOOTHING_S
    psd_window_s: float = DEFAULT_PSD_WINDOW_S
    psd_overlap_frac: float = DEFAULT_PSD_OVERLAP
    psd_highpass_hz: float = PSD_HIGHPASS_HZ
    psd_bands: tuple[tuple[float, float], ...] = DEFAULT_PSD_BANDS
    segment_windows: tuple[tuple[str, float], ...] = tuple(
        sorted(DEFAULT_SEGMENT_WINDOWS.items())
    )
    segment_offset_s: float = 0.0
    series_dump_hz: float = DEFAULT_SERIES_DUMP_HZ
    tfs_dump_hz: float = DEFAULT_TFS_DUMP_HZ
    icc_form: str = DEFAULT_ICC_FORM
    workers: int = 1
    seed: int | None = None

    @property
    def segment_window_map(self) -> dict[str, float]:
        return dict(self.segment_windows)

    def to_manifest_dict(self) -> dict:
        """Resolved config for the run manifest.

        Excludes the worker count: it cannot change any output, so it
        stays out of the bytes the determinism guarantee covers.
        """
        return {
            "recordings": [
                {"id": r.id, "path": r.path, "format": r.format, "scale": r.scale}
                for r in self.recordings
            ],
            "annotations_path": self.annotations_path,
            "notches_path": self.notches_path,
            "channels": list(self.channels) if self.channels is not None else None,
            "target_fs": self.target_fs,
            "selections": [
                {"name": s.name, "low_hz": s.low_hz, "high_hz": s.high_hz}
                for s in self.selections
            ],
            "iskna_band": list(self.iskna_band),
            "smoothing_s": self.smoothing_s,
            "psd_window_s": self.psd_window_s,
            "psd_overlap_frac": self.psd_overlap_frac,
            "psd_highpass_hz": self.psd_highpass_hz,
            "psd_bands": [list(b) for b in self.psd_bands],
            "segment_windows": dict(self.segment_windows),
            "segment_offset_s": self.segment_offset_s,
            "series_dump_hz": self.series_dump_hz,
            "tfs_dump_hz": self.tfs_dump_hz,
            "icc_form": self.icc_form,
            "seed": self.seed,
        }


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(_OP, message)


def _number(raw, name, lo=None, hi=None, strict_lo=False):
    _require(isinstance(raw, (int, float)) and not isinstance(raw, bool),
             f"{name} must be a number, got {raw!r}")
    v = float(raw)
    if lo is not None:
        _require(v > lo if strict_lo else v >= lo, f"{name} must be > {lo}, got {v}")
    if hi is not None:
        _require(v <= hi, f"{name} must be <= {hi}, got {v}")
    return v


def _resolve_path(base_dir, raw, name, must_exist=True):
    _require(isinstance(raw, str) and raw, f"{name} must be a nonempty path")
    path = raw if os.path.isabs(raw) else os.path.normpath(os.path.join(base_dir, raw))
    if must_exist:
        _require(os.path.exists(path), f"{name} not found: {path}")
    return path


def load_config(path) -> RunConfig:
    """Load, validate, and resolve a run config (or a run manifest).

    Relative paths are resolved against the config file's directory and
    stored absolute, so the emitted manifest reproduces the run from
    anywhere.

    Raises
    ------
    ConfigError
        Unknown keys, out-of-range values, or missing files.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(_OP, f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(_OP, f"{path}: invalid JSON: {exc}") from None
    _require(isinstance(raw, dict), f"{path}: expected a JSON object")
    if "config" in raw and "tool" in raw:
        raw = raw["config"]  # run manifest: reuse the embedded config
        _require(isinstance(raw, dict), f"{path}: manifest 'config' is not an object")

    known = {
        "recordings", "annotations_path", "notches_path", "channels", "target_fs",
        "selections", "iskna_band", "smoothing_s", "psd_window_s", "psd_overlap_frac",
        "psd_highpass_hz", "psd_bands", "segment_windows", "segment_offset_s",
        "series_dump_hz", "tfs_dump_hz", "icc_form", "workers", "seed",
    }
    unknown = set(raw) - known
    _require(not unknown, f"{path}: unknown keys {sorted(unknown)}")

    base_dir = os.path.dirname(os.path.abspath(path))

    recs_raw = raw.get("recordings")
    _require(isinstance(recs_raw, list) and recs_raw,
             "recordings must be a nonempty list")
    recordings = []
    seen_ids = set()
    for i, entry in enumerate(recs_raw):
        _require(isinstance(entry, dict), f"recordings[{i}] must be an object")
        _require("path" in entry and "format" in entry,
                 f"recordings[{i}] needs 'path' and 'format'")
        fmt = entry["format"]
        _require(fmt in ("csv", "wav"),
                 f"recordings[{i}].format must be csv or wav, got {fmt!r}")
        rec_path = _resolve_path(base_dir, entry["path"], f"recordings[{i}].path")
        rec_id = entry.get("id") or os.path.splitext(os.path.basename(rec_path))[0]
        _require(rec_id not in seen_ids, f"duplicate recording id {rec_id!r}")
        seen_ids.add(rec_id)
        scale = _number(entry.get("scale", 1.0), f"recordings[{i}].scale")
        _require(scale != 0, f"recordings[{i}].scale must be nonzero")
        extra = set(entry) - {"id", "path", "format", "scale"}
        _require(not extra, f"recordings[{i}] has unknown keys {sorted(extra)}")
        recordings.append(RecordingRef(rec_id, rec_path, fmt, scale))

    _require("annotations_path" in raw, "annotations_path is required")
    annotations_path = _resolve_path(base_dir, raw["annotations_path"], "annotations_path")

    notches_path = None
    if raw.get("notches_path") is not None:
        notches_path = _resolve_path(base_dir, raw["notches_path"], "notches_path")

    channels = None
    if raw.get("channels") is not None:
        ch = raw["channels"]
        _require(isinstance(ch, list) and ch and all(isinstance(c, str) for c in ch),
                 "channels must be a nonempty list of strings")
        channels = tuple(ch)

    target_fs = _number(raw.get("target_fs", DEFAULT_TARGET_FS), "target_fs",
                        lo=0, strict_lo=True)

    selections = tuple(tvskna_presets())
    if "selections" in raw:
        sels_raw = raw["selections"]
        _require(isinstance(sels_raw, list) and sels_raw,
                 "selections must be a nonempty list")
        sels = []
        for i, s in enumerate(sels_raw):
            _require(isinstance(s, dict) and {"name", "low_hz", "high_hz"} <= set(s),
                     f"selections[{i}] needs name, low_hz, high_hz")
            sels.append(BandSelection(str(s["name"]),
                                      _number(s["low_hz"], f"selections[{i}].low_hz", lo=0),
                                      _number(s["high_hz"], f"selections[{i}].high_hz", lo=0,
                                              strict_lo=True)))
        selections = tuple(sels)

    iskna_band = ISKNA_BAND
    if "iskna_band" in raw:
        band = raw["iskna_band"]
        _require(isinstance(band, list) and len(band) == 2, "iskna_band must be [low, high]")
        iskna_band = (_number(band[0], "iskna_band[0]", lo=0, strict_lo=True),
                      _number(band[1], "iskna_band[1]", lo=0, strict_lo=True))
        _require(iskna_band[0] < iskna_band[1], "iskna_band must have low < high")

    smoothing_s = _number(raw.get("smoothing_s", DEFAULT_SMOOTHING_S), "smoothing_s",
                          lo=0, strict_lo=True)
    psd_window_s = _number(raw.get("psd_window_s", DEFAULT_PSD_WINDOW_S), "psd_window_s",
                           lo=0, strict_lo=True)
    psd_overlap = _number(raw.get("psd_overlap_frac", DEFAULT_PSD_OVERLAP),
                          "psd_overlap_frac", lo=0)
    _require(psd_overlap < 1, f"psd_overlap_frac must be < 1, got {psd_overlap}")
    psd_highpass = _number(raw.get("psd_highpass_hz", PSD_HIGHPASS_HZ), "psd_highpass_hz",
                           lo=0, strict_lo=True)

    psd_bands = DEFAULT_PSD_BANDS
    if "psd_bands" in raw:
        bands_raw = raw["psd_bands"]
        _require(isinstance(bands_raw, list) and bands_raw,
                 "psd_bands must be a nonempty list of [low, high] pairs")
        bands = []
        for i, b in enumerate(bands_raw):
            _require(isinstance(b, list) and len(b) == 2, f"psd_bands[{i}] must be [low, high]")
            lo_v = _number(b[0], f"psd_bands[{i}][0]", lo=0)
            hi_v = _number(b[1], f"psd_bands[{i}][1]", lo=0, strict_lo=True)
            _require(lo_v < hi_v, f"psd_bands[{i}] must have low < high")
            bands.append((lo_v, hi_v))
        psd_bands = tuple(bands)

    windows = dict(DEFAULT_SEGMENT_WINDOWS)
    if "segment_windows" in raw:
        win_raw = raw["segment_windows"]
        _require(isinstance(win_raw, dict) and win_raw, "segment_windows must be an object")
        for cond, w in win_raw.items():
            windows[str(cond)] = _number(w, f"segment_windows[{cond}]", lo=0, strict_lo=True)

    segment_offset_s = _number(raw.get("segment_offset_s", 0.0), "segment_offset_s", lo=0)
    series_dump_hz = _number(raw.get("series_dump_hz", DEFAULT_SERIES_DUMP_HZ),
                             "series_dump_hz", lo=0, strict_lo=True)
    tfs_dump_hz = _number(raw.get("tfs_dump_hz", DEFAULT_TFS_DUMP_HZ),
                          "tfs_dump_hz", lo=0, strict_lo=True)

    icc_form = raw.get("icc_form", DEFAULT_ICC_FORM)
    _require(icc_form in ("two_way_random_single", "two_way_mixed_single"),
             f"icc_form must be two_way_random_single or two_way_mixed_single, got {icc_form!r}")

    workers = raw.get("workers", 1)
    _require(isinstance(workers, int) and not isinstance(workers, bool) and workers >= 1,
             f"workers must be an integer >= 1, got {workers!r}")

    seed = raw.get("seed")
    if seed is not None:
        _require(isinstance(seed, int) and not isinstance(seed, bool),
                 f"seed must be an integer, got {seed!r}")

    return RunConfig(
        recordings=tuple(recordings),
        annotations_path=annotations_path,
        notches_path=notches_path,
        channels=channels,
        target_fs=target_fs,
        selections=selections,
        iskna_band=iskna_band,
        smoothing_s=smoothing_s,
        psd_window_s=psd_window_s,
        psd_overlap_frac=psd_overlap,
        psd_highpass_hz=psd_highpass,
        psd_bands=psd_bands,
        segment_windows=tuple(sorted(windows.items())),
        segment_offset_s=segment_offset_s,
        series_dump_hz=series_dump_hz,
        tfs_dump_hz=tfs_dump_hz,
        icc_form=icc_form,
        workers=workers,
        seed=seed,
    )
