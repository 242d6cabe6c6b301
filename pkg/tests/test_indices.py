import logging

import numpy as np
import pytest

from sknaflow.errors import DataError, ParameterError, WindowError
from sknaflow.filters import NotchList, resample
from sknaflow.indices import (
    BandSelection,
    IndexSeries,
    compute_iskna,
    compute_tvskna,
    extract_segment_indices,
    preprocess,
    tvskna_from_decomposition,
    tvskna_presets,
)
from sknaflow.ingest import Channel, Recording, SegmentAnnotation
from sknaflow.synth import SynthSpec, generate
from sknaflow.vfcdm import decompose

FS = 4000.0


def noise_recording(seconds, fs, seed=50, channels=("ch1",)):
    rng = np.random.default_rng(seed)
    chans = tuple(Channel(c, rng.standard_normal(int(seconds * fs))) for c in channels)
    return Recording(chans, fs)


def test_presets():
    sels = tvskna_presets()
    assert [(s.name, s.low_hz, s.high_hz) for s in sels] == [
        ("tvskna1", 160.0, 1120.0),
        ("tvskna2", 320.0, 1120.0),
        ("tvskna3", 480.0, 1120.0),
    ]


def test_selection_validation():
    with pytest.raises(ParameterError):
        BandSelection("bad", 500.0, 300.0)


# ---------------------------------------------------------------- preprocess


def test_preprocess_resamples():
    rec = noise_recording(4.0, 10000.0)
    pre = preprocess(rec, "ch1")
    assert pre.size == 16000
    np.testing.assert_array_equal(pre, resample(rec.channel("ch1"), 10000.0, FS))


def test_preprocess_applies_notches():
    t = np.arange(40000) / 10000.0
    rec = Recording((Channel("ch1", np.cos(2 * np.pi * 300.0 * t)),), 10000.0)
    clean = preprocess(rec, "ch1", NotchList(((300.0, 30.0),)))
    mid = slice(4000, 12000)
    assert np.sqrt(np.mean(clean[mid] ** 2)) <= 0.01 * np.sqrt(0.5)


def test_preprocess_unknown_channel():
    with pytest.raises(DataError):
        preprocess(noise_recording(1.0, 10000.0), "ch9")


# ---------------------------------------------------------------- tvskna


def test_tvskna_series_shape_and_sign():
    rec = noise_recording(8.0, FS)
    series = compute_tvskna(rec.channel("ch1"), FS, tvskna_presets()[0])
    assert series.method == "tvskna"
    assert series.selection == "tvskna1"
    assert (series.band_low_hz, series.band_high_hz) == (160.0, 1120.0)
    assert series.values.size == rec.n_samples
    assert np.all(series.values >= 0.0)


def test_tvskna_stationary_noise_is_flat():
    rec = noise_recording(30.0, FS, seed=51)
    series = compute_tvskna(rec.channel("ch1"), FS, tvskna_presets()[0])
    mid = series.values[2000:-2000]
    assert np.std(mid) / np.mean(mid) <= 0.2


def test_tvskna_scale_invariant():
    rec = noise_recording(8.0, FS, seed=52)
    x = rec.channel("ch1")
    sel = tvskna_presets()[0]
    a = compute_tvskna(x, FS, sel).values
    b = compute_tvskna(3.0 * x, FS, sel).values
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_band_variance_nesting():
    rec = noise_recording(10.0, FS, seed=53)
    decomp = decompose(rec.channel("ch1"), FS)
    v1 = np.var(decomp.select(160.0, 1120.0))
    v2 = np.var(decomp.select(320.0, 1120.0))
    v3 = np.var(decomp.select(480.0, 1120.0))
    assert v1 > v2 > v3


def test_wider_selection_more_sensitive_to_low_band_burst():
    spec = SynthSpec(
        duration_s=40.0, fs_hz=FS, seed=54, bursts=((15.0, 25.0),), burst_gain=5.0
    )
    recording, _ = generate(spec)
    decomp = decompose(recording.channels[0].samples, FS)
    sels = tvskna_presets()

    def burst_ratio(series):
        t = np.arange(series.values.size) / series.fs
        inside = series.values[(t >= 16.0) & (t <= 24.0)]
        outside = series.values[((t >= 2.0) & (t <= 12.0)) | ((t >= 28.0) & (t <= 38.0))]
        return np.mean(inside) / np.mean(outside)

    r1 = burst_ratio(tvskna_from_decomposition(decomp, sels[0]))
    r3 = burst_ratio(tvskna_from_decomposition(decomp, sels[2]))
    assert r1 >= 2.0  # burst energy lives at 150-500 Hz
    assert r3 < r1


def test_selection_rounded_to_band_grid(caplog):
    rec = noise_recording(6.0, FS, seed=55)
    rough = BandSelection("custom", 150.0, 1100.0)
    with caplog.at_level(logging.WARNING, logger="sknaflow.indices"):
        series = compute_tvskna(rec.channel("ch1"), FS, rough)
    assert (series.band_low_hz, series.band_high_hz) == (160.0, 1120.0)
    assert any("rounded" in r.message for r in caplog.records)


# ---------------------------------------------------------------- iskna


def test_iskna_in_band_tone_level():
    t = np.arange(int(8 * FS)) / FS
    x = 2.0 * np.cos(2 * np.pi * 750.0 * t)
    series = compute_iskna(x, FS)
    assert series.method == "iskna"
    assert series.selection == "500-1000"
    mid = series.values[4000:-4000]
    np.testing.assert_allclose(mid, 2.0 * 2.0 / np.pi, rtol=0.03)


def test_iskna_out_of_band_tone_suppressed():
    t = np.arange(int(8 * FS)) / FS
    series = compute_iskna(np.cos(2 * np.pi * 200.0 * t), FS)
    assert np.max(series.values[4000:-4000]) <= 0.01


def test_iskna_scales_linearly():
    rng = np.random.default_rng(56)
    x = rng.standard_normal(int(8 * FS))
    a = compute_iskna(x, FS).values
    b = compute_iskna(3.0 * x, FS).values
    np.testing.assert_allclose(b, 3.0 * a, atol=1e-9)


def test_iskna_band_outside_nyquist():
    with pytest.raises(ParameterError):
        compute_iskna(np.zeros(8000), FS, band=(500.0, 2500.0))


# ---------------------------------------------------------------- segments


def series_of(values, fs=1.0):
    return IndexSeries("iskna", 500.0, 1000.0, np.asarray(values, dtype=float), fs)


def test_segment_stats_hand_case():
    seg = SegmentAnnotation("task", "TG", 0.0, 4.0, 6.0)
    (got,) = extract_segment_indices(series_of([1.0, 2.0, 3.0, 4.0]), [seg], {"TG": 4.0})
    assert got.segment is seg
    assert got.max == 4.0
    assert got.mean == 2.5
    assert got.sd == pytest.approx(np.sqrt(1.25))


def test_segment_window_offset():
    seg = SegmentAnnotation("baseline", "TG", 0.0, 10.0)
    (got,) = extract_segment_indices(
        series_of(np.arange(10.0)), [seg], {"TG": 4.0}, offset_s=3.0
    )
    assert got.mean == 4.5
    assert got.max == 6.0


def test_segment_constant_series():
    seg = SegmentAnnotation("task", "VM", 0.0, 40.0)
    (got,) = extract_segment_indices(series_of(np.full(40, 1.7)), [seg], {"VM": 30.0})
    assert got.max == 1.7
    assert got.mean == pytest.approx(1.7, rel=1e-12)
    assert got.sd == pytest.approx(0.0, abs=1e-12)


def test_segment_shorter_than_window():
    seg = SegmentAnnotation("task", "TG", 0.0, 8.0, 6.0)
    with pytest.raises(WindowError):
        extract_segment_indices(series_of(np.zeros(20)), [seg], {"TG": 10.0})


def test_window_past_series_end():
    seg = SegmentAnnotation("task", "TG", 8.0, 20.0, 6.0)
    with pytest.raises(WindowError):
        extract_segment_indices(series_of(np.zeros(15)), [seg], {"TG": 10.0})


def test_condition_without_window():
    seg = SegmentAnnotation("task", "VM", 0.0, 40.0)
    with pytest.raises(ParameterError):
        extract_segment_indices(series_of(np.zeros(50)), [seg], {"TG": 10.0})


def test_default_windows_by_condition():
    segs = [
        SegmentAnnotation("baseline", "VM", 0.0, 30.0),
        SegmentAnnotation("task", "ST", 30.0, 150.0),
        SegmentAnnotation("task", "TG", 150.0, 160.0, 6.0),
    ]
    values = np.arange(160.0)
    got = extract_segment_indices(series_of(values), segs)
    assert got[0].max == 29.0  # 30 s window
    assert got[1].max == 149.0  # 120 s window
    assert got[2].max == 159.0  # 10 s window
