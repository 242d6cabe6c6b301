import json
import pathlib

import numpy as np
import pytest

from sknaflow.synth import SynthSpec, write_synth

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

# Small recording used by the CLI round-trip tests: two 10 s bursts so
# every TG analysis window fits, short enough to keep runs around a second.
SMALL_SPEC = SynthSpec(
    duration_s=60.0,
    fs_hz=10000.0,
    seed=77,
    bursts=((12.0, 22.0), (40.0, 50.0)),
)


@pytest.fixture(scope="session")
def study_spec_path() -> pathlib.Path:
    return FIXTURES / "study_spec.json"


@pytest.fixture(scope="session")
def small_study_dir(tmp_path_factory) -> pathlib.Path:
    """Recording, annotations, and a run config for a small batch run."""
    root = tmp_path_factory.mktemp("small_study")
    wav_path, ann_path = write_synth(SMALL_SPEC, root)
    config = {
        "recordings": [{"id": "demo", "path": wav_path, "format": "wav"}],
        "annotations_path": ann_path,
    }
    with open(root / "config.json", "w") as fh:
        json.dump(config, fh, indent=2)
    return root


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(42)
