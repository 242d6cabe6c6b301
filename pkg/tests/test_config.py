import json

import numpy as np
import pytest
from scipy.io import wavfile

from sknaflow.config import RunConfig, load_config
from sknaflow.errors import ConfigError
from sknaflow.indices import DEFAULT_SEGMENT_WINDOWS


@pytest.fixture()
def workspace(tmp_path):
    wavfile.write(tmp_path / "rec.wav", 10000, np.zeros(100))
    (tmp_path / "ann.csv").write_text(
        "label,condition,start_s,end_s,vas\nbaseline,VM,0,30,\n"
    )
    return tmp_path


def write_config(workspace, extra=None, name="config.json"):
    body = {
        "recordings": [{"path": "rec.wav", "format": "wav"}],
        "annotations_path": "ann.csv",
    }
    body.update(extra or {})
    path = workspace / name
    path.write_text(json.dumps(body))
    return path


def test_defaults(workspace):
    config = load_config(write_config(workspace))
    assert config.recordings[0].id == "rec"  # file stem
    assert config.recordings[0].path == str(workspace / "rec.wav")
    assert config.target_fs == 4000.0
    assert [s.name for s in config.selections] == ["tvskna1", "tvskna2", "tvskna3"]
    assert config.iskna_band == (500.0, 1000.0)
    assert config.smoothing_s == 0.1
    assert config.psd_window_s == 4.0
    assert config.psd_overlap_frac == 0.5
    assert config.psd_highpass_hz == 150.0
    assert len(config.psd_bands) == 8
    assert config.segment_window_map == DEFAULT_SEGMENT_WINDOWS
    assert config.series_dump_hz == 100.0
    assert config.icc_form == "two_way_random_single"
    assert config.workers == 1
    assert config.seed is None


def test_relative_paths_resolved_against_config_dir(workspace):
    nested = workspace / "configs"
    nested.mkdir()
    path = nested / "config.json"
    path.write_text(json.dumps({
        "recordings": [{"path": "../rec.wav", "format": "wav"}],
        "annotations_path": "../ann.csv",
    }))
    config = load_config(path)
    assert config.recordings[0].path == str(workspace / "rec.wav")
    assert config.annotations_path == str(workspace / "ann.csv")


def test_unknown_key_rejected(workspace):
    with pytest.raises(ConfigError):
        load_config(write_config(workspace, {"wrokers": 2}))


def test_missing_file_named_in_error(workspace):
    path = write_config(workspace, {"annotations_path": "nope.csv"})
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "nope.csv" in str(err.value)


def test_missing_recordings(workspace):
    path = workspace / "config.json"
    path.write_text(json.dumps({"annotations_path": "ann.csv"}))
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text(json.dumps({"recordings": [], "annotations_path": "ann.csv"}))
    with pytest.raises(ConfigError):
        load_config(path)


def test_duplicate_recording_ids(workspace):
    extra = {"recordings": [
        {"id": "a", "path": "rec.wav", "format": "wav"},
        {"id": "a", "path": "rec.wav", "format": "wav"},
    ]}
    with pytest.raises(ConfigError):
        load_config(write_config(workspace, extra))


def test_bad_recording_format(workspace):
    extra = {"recordings": [{"path": "rec.wav", "format": "edf"}]}
    with pytest.raises(ConfigError):
        load_config(write_config(workspace, extra))


def test_config_not_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


def test_numeric_validation(workspace):
    for extra in (
        {"target_fs": 0},
        {"smoothing_s": -0.1},
        {"psd_overlap_frac": 1.0},
        {"workers": 0},
        {"workers": True},
        {"seed": "abc"},
        {"icc_form": "one_way"},
        {"iskna_band": [1000.0, 500.0]},
        {"psd_bands": [[500.0, 400.0]]},
    ):
        with pytest.raises(ConfigError):
            load_config(write_config(workspace, extra))


def test_custom_selections_and_windows(workspace):
    extra = {
        "selections": [{"name": "wide", "low_hz": 160, "high_hz": 1600}],
        "segment_windows": {"TG": 8.0, "COLD": 5.0},
        "workers": 3,
        "seed": 9,
    }
    config = load_config(write_config(workspace, extra))
    assert [(s.name, s.low_hz, s.high_hz) for s in config.selections] == [("wide", 160.0, 1600.0)]
    windows = config.segment_window_map
    assert windows["TG"] == 8.0
    assert windows["COLD"] == 5.0
    assert windows["VM"] == 30.0  # untouched default
    assert config.workers == 3
    assert config.seed == 9


def test_manifest_reload_round_trip(workspace):
    config = load_config(write_config(workspace, {"workers": 5, "seed": 12}))
    manifest = {"tool": "sknaflow", "version": "0.0", "config": config.to_manifest_dict()}
    manifest_path = workspace / "run_manifest.json"
    manifest_path.write_text(json.dumps(manifest))
    again = load_config(manifest_path)
    # workers is wall-time only and deliberately left out of the manifest
    assert "workers" not in config.to_manifest_dict()
    assert again == RunConfig(**{**again.__dict__})  # sanity: frozen equality works
    assert again.recordings == config.recordings
    assert again.seed == config.seed
    assert again.workers == 1
    assert again.to_manifest_dict() == config.to_manifest_dict()
