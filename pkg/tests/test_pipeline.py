import csv
import json
import logging

import pytest
from scipy.io import wavfile

from sknaflow.config import load_config
from sknaflow.errors import ValidationError
from sknaflow.pipeline import (
    BAND_POWER_COLUMNS,
    EVALUATION_COLUMNS,
    SEGMENT_COLUMNS,
    SERIES_COLUMNS,
    base_condition,
    condition_display,
    evaluate_segment_rows,
    run_pipeline,
    split_channel_label,
)
from sknaflow.ingest import SegmentAnnotation
from sknaflow.synth import SynthSpec, generate


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- naming


def test_condition_display():
    assert condition_display(SegmentAnnotation("task", "TG", 0, 10, 6.0)) == "TG_high_pain"
    assert condition_display(SegmentAnnotation("task", "TG", 0, 10, 2.0)) == "TG_low_pain"
    assert condition_display(SegmentAnnotation("task", "TG", 0, 10, None)) == "TG"
    assert condition_display(SegmentAnnotation("baseline", "TG", 0, 10, None)) == "TG"
    assert condition_display(SegmentAnnotation("task", "VM", 0, 10, None)) == "VM"


def test_base_condition():
    assert base_condition("TG_high_pain") == "TG"
    assert base_condition("TG_low_pain") == "TG"
    assert base_condition("VM") == "VM"


def test_split_channel_label():
    assert split_channel_label("subj04/ch2") == ("subj04", "ch2")
    assert split_channel_label("ch2") == ("", "ch2")


# ---------------------------------------------------------------- evaluation


def seg_record(channel, condition, label, segment_id, mean, second=None):
    rec = {
        "channel": channel, "method": "iskna", "selection": "500-1000",
        "condition": condition, "label": label, "segment_id": segment_id,
        "mean": mean,
    }
    if second is not None:
        rec["max"] = second
    return rec


def test_evaluation_hand_numbers():
    records = [
        seg_record("ch1", "VM", "baseline", 0, 1.0),
        seg_record("ch1", "VM", "baseline", 1, 3.0),
        seg_record("ch1", "VM", "task", 2, 2.0),
        seg_record("ch1", "VM", "task", 3, 4.0),
    ]
    (row,) = evaluate_segment_rows(records)
    assert (row["channel"], row["method"], row["selection"]) == ("ch1", "iskna", "500-1000")
    assert (row["statistic"], row["condition"]) == ("mean", "VM")
    assert row["J"] == 0.5
    assert row["BACC"] == 0.75
    assert row["AUC"] == 0.75
    # CV: population sd over mean, averaged across the two classes
    assert row["CV_baseline_task_avg"] == pytest.approx(0.5 * (1.0 / 2.0 + 1.0 / 3.0))
    assert row["ICC"] is None and row["ICC_label"] is None  # one subject


def test_evaluation_multi_subject_icc():
    records = []
    for i, (subject, base, task) in enumerate(
        [("s1", 1.0, 2.0), ("s2", 3.0, 4.0), ("s3", 5.0, 6.0)]
    ):
        records.append(seg_record(f"{subject}/ch1", "VM", "baseline", 2 * i, base))
        records.append(seg_record(f"{subject}/ch1", "VM", "task", 2 * i + 1, task))
    (row,) = evaluate_segment_rows(records)
    assert row["channel"] == "ch1"  # subjects folded out of the label
    assert row["ICC"] == pytest.approx(8.0 / 9.0, abs=1e-9)
    assert row["ICC_label"] == "good"
    mixed = evaluate_segment_rows(records, "two_way_mixed_single")[0]
    assert mixed["ICC"] == pytest.approx(1.0, abs=1e-9)
    assert mixed["ICC_label"] == "excellent"


def test_evaluation_icc_needs_two_complete_subjects():
    records = [
        seg_record("s1/ch1", "VM", "baseline", 0, 1.0),
        seg_record("s1/ch1", "VM", "task", 1, 2.0),
        seg_record("s2/ch1", "VM", "baseline", 2, 3.0),  # no task for s2
        seg_record("s2/ch1", "VM", "task", 3, 4.0),
        seg_record("s3/ch1", "VM", "baseline", 4, 5.0),
    ]
    del records[3]
    (row,) = evaluate_segment_rows(records)
    assert row["ICC"] is None


def test_evaluation_pain_groups_share_baselines():
    records = [
        seg_record("ch1", "TG", "baseline", 0, 1.0),
        seg_record("ch1", "TG", "baseline", 1, 2.0),
        seg_record("ch1", "TG_low_pain", "task", 2, 3.0),
        seg_record("ch1", "TG_high_pain", "task", 3, 9.0),
    ]
    rows = evaluate_segment_rows(records)
    by_condition = {r["condition"]: r for r in rows}
    assert set(by_condition) == {"TG_low_pain", "TG_high_pain"}
    assert by_condition["TG_high_pain"]["AUC"] == 1.0
    assert by_condition["TG_low_pain"]["AUC"] == 1.0


def test_evaluation_condition_without_baseline_skipped(caplog):
    records = [
        seg_record("ch1", "VM", "baseline", 0, 1.0),
        seg_record("ch1", "VM", "task", 1, 2.0),
        seg_record("ch1", "ST", "task", 2, 3.0),  # no ST baseline anywhere
    ]
    with caplog.at_level(logging.WARNING, logger="sknaflow.pipeline"):
        rows = evaluate_segment_rows(records)
    assert [r["condition"] for r in rows] == ["VM"]
    assert any("ST" in r.message for r in caplog.records)


def test_evaluation_accepts_string_records():
    records = [
        seg_record("ch1", "VM", "baseline", "0", "1.0"),
        seg_record("ch1", "VM", "baseline", "1", "3.0"),
        seg_record("ch1", "VM", "task", "2", "2.0"),
        seg_record("ch1", "VM", "task", "3", "4.0"),
    ]
    (row,) = evaluate_segment_rows(records)
    assert (row["J"], row["AUC"]) == (0.5, 0.75)


def test_evaluation_rejects_mixed_stat_fields():
    records = [
        seg_record("ch1", "VM", "baseline", 0, 1.0),
        seg_record("ch1", "VM", "task", 1, 2.0, second=5.0),
    ]
    with pytest.raises(ValidationError):
        evaluate_segment_rows(records)


def test_evaluation_multiple_stats_sorted():
    records = [
        seg_record("ch1", "VM", "baseline", 0, 1.0, second=2.0),
        seg_record("ch1", "VM", "task", 1, 3.0, second=4.0),
    ]
    rows = evaluate_segment_rows(records)
    assert [r["statistic"] for r in rows] == ["max", "mean"]


# ---------------------------------------------------------------- full run


@pytest.fixture(scope="module")
def pipeline_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    spec = SynthSpec(duration_s=50.0, fs_hz=4000.0, seed=60, bursts=((15.0, 25.0),))
    recording, _ = generate(spec)
    wavfile.write(root / "rec.wav", 4000, recording.channels[0].samples)
    (root / "ann.csv").write_text(
        "label,condition,start_s,end_s,vas\n"
        "baseline,TG,0,15,\n"
        "task,TG,15,25,6\n"
        "task,TG,25,35,0\n"
        "baseline,TG,35,50,\n"
    )
    (root / "config.json").write_text(json.dumps({
        "recordings": [{"id": "demo", "path": "rec.wav", "format": "wav"}],
        "annotations_path": "ann.csv",
    }))
    config = load_config(root / "config.json")
    out_dir = root / "out"
    paths = run_pipeline(config, out_dir)
    return root, config, paths


def test_run_outputs_and_headers(pipeline_run):
    _, _, paths = pipeline_run
    headers = {
        "band_power": BAND_POWER_COLUMNS,
        "index_series": SERIES_COLUMNS,
        "segment_indices": SEGMENT_COLUMNS,
        "evaluation": EVALUATION_COLUMNS,
    }
    for name, columns in headers.items():
        with open(paths[name]) as fh:
            assert fh.readline().rstrip("\n") == ",".join(columns)


def test_run_skips_vas_zero_segment(pipeline_run):
    _, _, paths = pipeline_run
    seg_ids = {row["segment_id"] for row in read_rows(paths["segment_indices"])}
    assert seg_ids == {"0", "1", "3"}  # id 2 carries VAS 0
    band_ids = {row["segment_id"] for row in read_rows(paths["band_power"])}
    assert band_ids == {"0", "1", "3"}


def test_run_segment_table_contents(pipeline_run):
    _, _, paths = pipeline_run
    rows = read_rows(paths["segment_indices"])
    methods = {(r["method"], r["selection"]) for r in rows}
    assert methods == {
        ("tvskna", "tvskna1"), ("tvskna", "tvskna2"), ("tvskna", "tvskna3"),
        ("iskna", "500-1000"),
    }
    task = [r for r in rows if r["label"] == "task"]
    assert all(r["condition"] == "TG_high_pain" for r in task)
    base = [r for r in rows if r["label"] == "baseline"]
    assert all(r["condition"] == "TG" for r in base)
    # burst sits at 150-500 Hz, so every index must rank task over baselines
    for method, selection in methods:
        sub = [r for r in rows if (r["method"], r["selection"]) == (method, selection)]
        task_mean = [float(r["mean"]) for r in sub if r["label"] == "task"]
        base_means = [float(r["mean"]) for r in sub if r["label"] == "baseline"]
        assert task_mean[0] > max(base_means)


def test_run_band_power_shape(pipeline_run):
    _, _, paths = pipeline_run
    rows = read_rows(paths["band_power"])
    assert len(rows) == 3 * 8  # segments x default bands
    for row in rows:
        assert row["channel"] == "ch1"
    pcts = {}
    for row in rows:
        pcts.setdefault(row["segment_id"], 0.0)
        pcts[row["segment_id"]] += float(row["normalized_pct"])
    for total in pcts.values():
        assert total == pytest.approx(100.0, abs=0.01)


def test_run_series_decimated(pipeline_run):
    _, _, paths = pipeline_run
    rows = read_rows(paths["index_series"])
    tv1 = [float(r["t_s"]) for r in rows if r["selection"] == "tvskna1"]
    assert tv1[0] == 0.0
    assert tv1[1] - tv1[0] == pytest.approx(0.01)  # 100 Hz dump of a 4 kHz series
    assert len(tv1) == 5000


def test_run_evaluation_contents(pipeline_run):
    _, _, paths = pipeline_run
    rows = read_rows(paths["evaluation"])
    assert {r["condition"] for r in rows} == {"TG_high_pain"}
    methods = {r["method"] for r in rows}
    assert methods == {"tvskna", "iskna", "psd"}
    for row in rows:
        assert row["ICC"] == "" and row["ICC_label"] == ""  # single subject
        assert float(row["BACC"]) == (float(row["J"]) + 1.0) / 2.0
    psd_stats = {r["statistic"] for r in rows if r["method"] == "psd"}
    assert psd_stats == {"absolute", "normalized"}
    index_stats = {r["statistic"] for r in rows if r["method"] != "psd"}
    assert index_stats == {"max", "mean", "sd"}


def test_run_manifest_contents(pipeline_run):
    _, config, paths = pipeline_run
    with open(paths["manifest"]) as fh:
        manifest = json.load(fh)
    assert manifest["tool"] == "sknaflow"
    assert manifest["outputs"] == sorted(
        ["band_power.csv", "index_series.csv", "segment_indices.csv", "evaluation.csv"]
    )
    assert manifest["config"] == json.loads(json.dumps(config.to_manifest_dict()))
    assert "workers" not in manifest["config"]


def test_annotations_past_recording_end(pipeline_run, tmp_path):
    root, _, _ = pipeline_run
    (root / "bad_ann.csv").write_text(
        "label,condition,start_s,end_s,vas\nbaseline,TG,0,60,\n"
    )
    (root / "bad_config.json").write_text(json.dumps({
        "recordings": [{"path": "rec.wav", "format": "wav"}],
        "annotations_path": "bad_ann.csv",
    }))
    with pytest.raises(ValidationError):
        run_pipeline(load_config(root / "bad_config.json"), tmp_path / "out")
