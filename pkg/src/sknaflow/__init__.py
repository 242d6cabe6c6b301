"""Skin nerve activity indices from high-sample-rate ECG.

The package derives two families of sympathetic-activity indices from
raw electrocardiogram recordings: a band-selective envelope index built
on complex-demodulation time-frequency decomposition, and an integrated
index built on bandpass rectification. It ships the supporting DSP
(rational resampling, zero-phase FIR filtering, notch cascade, Welch
spectra), discrimination and reliability metrics, a synthetic-fixture
generator, and a config-driven batch CLI.
"""

__version__ = "0.1.0"

from .envelope import AnalyticSignal, hilbert_analytic, unit_variance_normalize
from .errors import SknaflowError
from .filters import (
    FilterSpec,
    NotchList,
    apply_filter,
    apply_notch_bank,
    design_fir,
    load_notch_list,
    moving_average,
    rectify,
    resample,
)
from .indices import (
    BandSelection,
    IndexSeries,
    SegmentIndexSet,
    compute_iskna,
    compute_tvskna,
    extract_segment_indices,
    preprocess,
    tvskna_from_decomposition,
    tvskna_presets,
)
from .ingest import (
    Channel,
    PainGroup,
    Recording,
    SegmentAnnotation,
    load_annotations,
    load_recording,
    pain_group,
    write_table,
)
from .metrics import (
    LabeledScores,
    RocCurve,
    auc,
    coefficient_of_variation,
    icc,
    roc,
    youden_optimal,
)
from .spectral import PsdEstimate, band_power, psd_auc_comparison, welch_psd
from .synth import SynthSpec, generate, load_synth_spec, write_synth
from .vfcdm import (
    BandComponent,
    Decomposition,
    FrequencyTrack,
    cdm_component,
    decompose,
    instantaneous_frequency,
    vfcdm_refine,
)

__all__ = [
    "AnalyticSignal",
    "BandComponent",
    "BandSelection",
    "Channel",
    "Decomposition",
    "FilterSpec",
    "FrequencyTrack",
    "IndexSeries",
    "LabeledScores",
    "NotchList",
    "PainGroup",
    "PsdEstimate",
    "Recording",
    "RocCurve",
    "SegmentAnnotation",
    "SegmentIndexSet",
    "SknaflowError",
    "SynthSpec",
    "__version__",
    "apply_filter",
    "apply_notch_bank",
    "auc",
    "band_power",
    "cdm_component",
    "coefficient_of_variation",
    "compute_iskna",
    "compute_tvskna",
    "decompose",
    "design_fir",
    "extract_segment_indices",
    "generate",
    "hilbert_analytic",
    "icc",
    "instantaneous_frequency",
    "load_annotations",
    "load_notch_list",
    "load_recording",
    "load_synth_spec",
    "moving_average",
    "pain_group",
    "preprocess",
    "psd_auc_comparison",
    "rectify",
    "resample",
    "roc",
    "tvskna_from_decomposition",
    "tvskna_presets",
    "unit_variance_normalize",
    "vfcdm_refine",
    "welch_psd",
    "write_synth",
    "write_table",
    "youden_optimal",
]
