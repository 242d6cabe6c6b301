"""Batch runner: preprocess, spectral report, indices, evaluation.

Produces five outputs per run: a band-power report, decimated index
series, per-segment index statistics, an evaluation table, and a run
manifest that embeds the resolved config. Identical config and inputs
yield byte-identical outputs at any worker count.
"""
from __future__ import annotations

import json
import logging
import os

from . import __version__
from .config import RunConfig
from .errors import DegenerateSignalError, InsufficientDataError, ValidationError
from .filters import FilterSpec, NotchList, apply_filter, design_fir, load_notch_list
from .indices import (
    compute_iskna,
    extract_segment_indices,
    tvskna_from_decomposition,
)
from .indices import preprocess as preprocess_channel
from .ingest import load_annotations, load_recording, write_table
from .metrics import auc, coefficient_of_variation, icc, roc, youden_optimal
from .metrics import LabeledScores
from .spectral import band_power, welch_psd
from .vfcdm import decompose

log = logging.getLogger(__name__)

BAND_POWER_COLUMNS = [
    "channel", "condition", "segment_id", "band_low_hz", "band_high_hz",
    "absolute_power", "normalized_pct",
]
SEGMENT_COLUMNS = [
    "channel", "method", "selection", "condition", "label", "segment_id",
    "max", "mean", "sd",
]
EVALUATION_COLUMNS = [
    "channel", "method", "selection", "statistic", "condition",
    "J", "BACC", "AUC", "CV_baseline_task_avg", "ICC", "ICC_label",
]
SERIES_COLUMNS = ["channel", "method", "selection", "t_s", "value"]
TFS_COLUMNS = ["t_s", "band_low_hz", "band_high_hz", "amplitude"]

BAND_POWER_FILE = "band_power.csv"
SERIES_FILE = "index_series.csv"
SEGMENTS_FILE = "segment_indices.csv"
EVALUATION_FILE = "evaluation.csv"
MANIFEST_FILE = "run_manifest.json"
TFS_FILE = "tfs.csv"

# Scalar PSD score band for baseline-vs-task comparison.
PSD_EVAL_BAND = (150.0, 1000.0)

PAIN_SUFFIXES = ("_low_pain", "_high_pain")


def condition_display(segment) -> str:
    """Condition string for output rows.

    Thermal-grill task segments with a VAS score get a pain-group
    suffix (e.g. ``TG_high_pain``) so the two groups evaluate
    separately; everything else keeps the plain condition.
    """
    group = segment.pain_group
    if segment.label == "task" and group is not None:
        return f"{segment.condition}_{group.value}"
    return segment.condition


def base_condition(display: str) -> str:
    for suffix in PAIN_SUFFIXES:
        if display.endswith(suffix):
            return display[: -len(suffix)]
    return display


def _kept_segments(annotations):
    """Annotations paired with stable ids, minus sham-like segments.

    A VAS of exactly 0 belongs to neither pain group; such segments are
    dropped from every analysis with a notice.
    """
    kept = []
    for idx, seg in enumerate(annotations):
        if seg.vas is not None and seg.vas == 0:
            log.info(
                "skipping segment %d (%s %s, %g-%g s): VAS 0 maps to no pain group",
                idx, seg.label, seg.condition, seg.start_s, seg.end_s,
            )
            continue
        kept.append((idx, seg))
    return kept


def _check_annotations_fit(annotations, recording, rec_id):
    duration = recording.duration_s
    for seg in annotations:
        if seg.end_s > duration + 1e-9:
            raise ValidationError(
                "pipeline.run_pipeline",
                f"segment ({seg.start_s:g}-{seg.end_s:g} s) runs past the end of "
                f"recording {rec_id!r} ({duration:g} s)",
            )


def _channel_label(rec_id, channel, multi: bool) -> str:
    return f"{rec_id}/{channel}" if multi else channel


def split_channel_label(label: str) -> tuple[str, str]:
    """Recover (subject, channel) from an output channel label."""
    if "/" in label:
        subject, channel = label.split("/", 1)
        return subject, channel
    return "", label


def _segment_window_slice(series_values, fs, segment, window_s, offset_s):
    start = int(round((segment.start_s + offset_s) * fs))
    count = int(round(window_s * fs))
    return series_values[start : start + count]


def _psd_segment_rows(config: RunConfig, chan_label, highpassed, fs, kept):
    """Band-power rows plus scalar PSD scores for one channel."""
    rows = []
    scores = []
    windows = config.segment_window_map
    for idx, seg in kept:
        win = windows.get(seg.condition)
        if win is None:
            raise ValidationError(
                "pipeline.run_pipeline",
                f"no segment window configured for condition {seg.condition!r}",
            )
        sliced = _segment_window_slice(highpassed, fs, seg, win, config.segment_offset_s)
        psd = welch_psd(sliced, fs, config.psd_window_s, config.psd_overlap_frac)
        band_rows = band_power(psd, config.psd_bands)
        display = condition_display(seg)
        for row in band_rows:
            rows.append({
                "channel": chan_label,
                "condition": display,
                "segment_id": idx,
                "band_low_hz": row.band[0],
                "band_high_hz": row.band[1],
                "absolute_power": row.absolute_power,
                "normalized_pct": row.normalized_pct,
            })
        total = sum(r.absolute_power for r in band_rows)
        eval_abs = band_power(psd, [PSD_EVAL_BAND])[0].absolute_power
        scores.append({
            "channel": chan_label,
            "method": "psd",
            "selection": f"{PSD_EVAL_BAND[0]:g}-{PSD_EVAL_BAND[1]:g}",
            "condition": display,
            "label": seg.label,
            "segment_id": idx,
            "absolute": eval_abs,
            "normalized": 100.0 * eval_abs / total if total > 0 else 0.0,
        })
    return rows, scores


def _series_dump_rows(series, dump_hz):
    step = max(1, int(round(series.fs / dump_hz)))
    rows = []
    for i in range(0, series.values.size, step):
        rows.append({
            "channel": series.channel_id,
            "method": series.method,
            "selection": series.selection,
            "t_s": i / series.fs,
            "value": float(series.values[i]),
        })
    return rows


ID_KEYS = ("channel", "method", "selection", "condition", "label", "segment_id")


def evaluate_segment_rows(records, icc_form: str = "two_way_random_single"):
    """Evaluation table from per-segment statistic records.

    Each record carries the ID_KEYS plus one or more numeric statistic
    fields (max/mean/sd for index rows, absolute/normalized for PSD
    scores). For every (channel, method, selection, statistic, task
    condition) the baseline segments of the matching base condition are
    the negative class and the task segments the positive class.

    ICC needs several subjects: the channel label's ``subject/channel``
    prefix groups rows into subjects, each contributing its mean
    baseline and mean task value as one matrix row. With fewer than two
    subjects the ICC columns stay blank.
    """
    groups = {}
    for rec in records:
        subject, chan = split_channel_label(str(rec["channel"]))
        stats = sorted(set(rec) - set(ID_KEYS))
        key = (chan, str(rec["method"]), str(rec["selection"]))
        entry = groups.setdefault(key, {"stats": stats, "rows": []})
        if entry["stats"] != stats:
            raise ValidationError(
                "pipeline.evaluate_segment_rows",
                f"rows for {key} disagree on statistic fields: "
                f"{entry['stats']} vs {stats}",
            )
        entry["rows"].append((subject, rec))

    out = []
    for (chan, method, selection) in sorted(groups):
        entry = groups[(chan, method, selection)]
        rows = entry["rows"]
        task_conditions = sorted(
            {str(r["condition"]) for _, r in rows if str(r["label"]) == "task"}
        )
        for cond in task_conditions:
            base = base_condition(cond)
            neg = [(s, r) for s, r in rows
                   if str(r["label"]) == "baseline" and str(r["condition"]) == base]
            pos = [(s, r) for s, r in rows
                   if str(r["label"]) == "task" and str(r["condition"]) == cond]
            if not neg:
                log.warning(
                    "no baseline segments for %s %s %s %s; skipping",
                    chan, method, selection, cond,
                )
                continue
            for stat in entry["stats"]:
                neg_vals = [float(r[stat]) for _, r in neg]
                pos_vals = [float(r[stat]) for _, r in pos]
                scores = LabeledScores(negatives=neg_vals, positives=pos_vals)
                j, bacc, _thr = youden_optimal(scores)
                area = auc(roc(scores))
                try:
                    cv = 0.5 * (coefficient_of_variation(neg_vals)
                                + coefficient_of_variation(pos_vals))
                except DegenerateSignalError:
                    cv = None
                icc_value, icc_name = _subject_icc(neg, pos, stat, icc_form)
                out.append({
                    "channel": chan,
                    "method": method,
                    "selection": selection,
                    "statistic": stat,
                    "condition": cond,
                    "J": j,
                    "BACC": bacc,
                    "AUC": area,
                    "CV_baseline_task_avg": cv,
                    "ICC": icc_value,
                    "ICC_label": icc_name,
                })
    return out


def _subject_icc(neg, pos, stat, icc_form):
    """Subjects-by-(baseline, task) ICC; blank when under two subjects."""
    per_subject = {}
    for side, pairs in (("neg", neg), ("pos", pos)):
        for subject, rec in pairs:
            per_subject.setdefault(subject, {"neg": [], "pos": []})[side].append(
                float(rec[stat])
            )
    matrix = []
    for subject in sorted(per_subject):
        cells = per_subject[subject]
        if cells["neg"] and cells["pos"]:
            matrix.append([
                sum(cells["neg"]) / len(cells["neg"]),
                sum(cells["pos"]) / len(cells["pos"]),
            ])
    if len(matrix) < 2:
        return None, None
    try:
        value, name = icc(matrix, icc_form)
    except (InsufficientDataError, DegenerateSignalError) as exc:
        log.info("ICC unavailable for statistic %r: %s", stat, exc)
        return None, None
    return value, name


def _load_notches(config: RunConfig) -> NotchList:
    if config.notches_path is None:
        return NotchList()
    return load_notch_list(config.notches_path)


def run_pipeline(config: RunConfig, out_dir, workers: int | None = None) -> dict:
    """Execute the full batch analysis and write the five outputs.

    Parameters
    ----------
    config : RunConfig
        Resolved configuration.
    out_dir : path-like
        Output directory, created if needed.
    workers : int, optional
        Overrides the config's worker count. Never changes any output
        byte, only wall time.

    Returns
    -------
    dict
        Output name to file path.
    """
    os.makedirs(out_dir, exist_ok=True)
    n_workers = workers if workers is not None else config.workers
    annotations = load_annotations(config.annotations_path)
    notches = _load_notches(config)
    kept = _kept_segments(annotations)
    multi = len(config.recordings) > 1
    fs = config.target_fs
    windows = config.segment_window_map
    highpass = design_fir(FilterSpec("highpass", (config.psd_highpass_hz,)), fs)

    band_rows, series_rows, segment_rows, psd_scores = [], [], [], []
    for ref in config.recordings:
        recording = load_recording(ref.path, ref.format, ref.scale)
        _check_annotations_fit(annotations, recording, ref.id)
        channels = config.channels or recording.channel_ids
        for channel in channels:
            chan_label = _channel_label(ref.id, channel, multi)
            log.info("processing %s", chan_label)
            pre = preprocess_channel(recording, channel, notches, fs)

            hp_signal = apply_filter(pre, highpass)
            rows, scores = _psd_segment_rows(config, chan_label, hp_signal, fs, kept)
            band_rows.extend(rows)
            psd_scores.extend(scores)

            decomp = decompose(pre, fs, workers=n_workers)
            series_list = [
                tvskna_from_decomposition(decomp, sel, config.smoothing_s, chan_label)
                for sel in config.selections
            ]
            series_list.append(
                compute_iskna(pre, fs, config.iskna_band, config.smoothing_s, chan_label)
            )
            segs = [seg for _, seg in kept]
            for series in series_list:
                stats = extract_segment_indices(
                    series, segs, windows, config.segment_offset_s
                )
                for (idx, seg), stat_set in zip(kept, stats):
                    segment_rows.append({
                        "channel": chan_label,
                        "method": series.method,
                        "selection": series.selection,
                        "condition": condition_display(seg),
                        "label": seg.label,
                        "segment_id": idx,
                        "max": stat_set.max,
                        "mean": stat_set.mean,
                        "sd": stat_set.sd,
                    })
                series_rows.extend(_series_dump_rows(series, config.series_dump_hz))

    evaluation_rows = evaluate_segment_rows(
        segment_rows + psd_scores, config.icc_form
    )

    paths = {
        "band_power": os.path.join(out_dir, BAND_POWER_FILE),
        "index_series": os.path.join(out_dir, SERIES_FILE),
        "segment_indices": os.path.join(out_dir, SEGMENTS_FILE),
        "evaluation": os.path.join(out_dir, EVALUATION_FILE),
        "manifest": os.path.join(out_dir, MANIFEST_FILE),
    }
    write_table(band_rows, paths["band_power"], columns=BAND_POWER_COLUMNS)
    write_table(series_rows, paths["index_series"], columns=SERIES_COLUMNS)
    write_table(segment_rows, paths["segment_indices"], columns=SEGMENT_COLUMNS)
    write_table(evaluation_rows, paths["evaluation"], columns=EVALUATION_COLUMNS)
    manifest = {
        "tool": "sknaflow",
        "version": __version__,
        "config": config.to_manifest_dict(),
        "outputs": sorted(
            os.path.basename(p) for k, p in paths.items() if k != "manifest"
        ),
    }
    with open(paths["manifest"], "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("wrote %d output files to %s", len(paths), out_dir)
    return paths


def run_psd_report(config: RunConfig, out_dir) -> dict:
    """Spectral half of the pipeline only: the band-power report."""
    os.makedirs(out_dir, exist_ok=True)
    annotations = load_annotations(config.annotations_path)
    notches = _load_notches(config)
    kept = _kept_segments(annotations)
    multi = len(config.recordings) > 1
    fs = config.target_fs
    highpass = design_fir(FilterSpec("highpass", (config.psd_highpass_hz,)), fs)
    band_rows = []
    for ref in config.recordings:
        recording = load_recording(ref.path, ref.format, ref.scale)
        _check_annotations_fit(annotations, recording, ref.id)
        channels = config.channels or recording.channel_ids
        for channel in channels:
            chan_label = _channel_label(ref.id, channel, multi)
            pre = preprocess_channel(recording, channel, notches, fs)
            hp_signal = apply_filter(pre, highpass)
            rows, _scores = _psd_segment_rows(config, chan_label, hp_signal, fs, kept)
            band_rows.extend(rows)
    path = os.path.join(out_dir, BAND_POWER_FILE)
    write_table(band_rows, path, columns=BAND_POWER_COLUMNS)
    return {"band_power": path}


def run_tfs_dump(config: RunConfig, out_dir, channel: str | None = None) -> dict:
    """Time-frequency amplitude dump for heatmap plotting.

    Uses the first recording and either the named channel or its first
    channel; amplitudes are decimated to ``config.tfs_dump_hz``.
    """
    os.makedirs(out_dir, exist_ok=True)
    notches = _load_notches(config)
    ref = config.recordings[0]
    recording = load_recording(ref.path, ref.format, ref.scale)
    chan = channel or (config.channels or recording.channel_ids)[0]
    fs = config.target_fs
    pre = preprocess_channel(recording, chan, notches, fs)
    decomp = decompose(pre, fs, workers=config.workers)
    step = max(1, int(round(fs / config.tfs_dump_hz)))
    rows = []
    for comp in decomp.components:
        for i in range(0, comp.amplitude.size, step):
            rows.append({
                "t_s": i / fs,
                "band_low_hz": comp.band[0],
                "band_high_hz": comp.band[1],
                "amplitude": float(comp.amplitude[i]),
            })
    path = os.path.join(out_dir, TFS_FILE)
    write_table(rows, path, columns=TFS_COLUMNS)
    return {"tfs": path}
