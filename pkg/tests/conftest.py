import json
from os import path

import numpy as np
import pytest

from eeg_probe.encoder import EncoderConfig
from eeg_probe.metric_learning import TrainConfig
from eeg_probe.signal_io import SynthSpec

FIXTURES_DIR = path.join(path.dirname(__file__), "fixtures")


def _load_golden(name: str) -> dict:
    with open(path.join(FIXTURES_DIR, "montages", f'{name}.json'), encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def golden_montage():
    return _load_golden


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def tiny_encoder_config():
    # conv output: (400 - 25) // 25 + 1 = 16 samples, flat dim 32
    return EncoderConfig(in_channels=4, in_samples=400, gat_dim=4, conv_channels=2, conv_kernel=25,
                         conv_stride=25, seed=0)


@pytest.fixture
def tiny_spec():
    return SynthSpec(
        n_subjects=2,
        n_classes=3,
        segments_per_class_per_subject=5,
        channels=4,
        signal_region=None,
        signal_indices=[1, 2],
        class_freqs_hz=[6.0, 12.0, 18.0],
        snr_db=10.0,
        seed=0,
    )


@pytest.fixture
def fast_train_config():
    return TrainConfig(epochs=2, batch_size=12, lr=1e-3, kmeans_restarts=2, seed=0)
