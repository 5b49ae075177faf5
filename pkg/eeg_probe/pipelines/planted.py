"""
Planted-structure run: synthetic segments with class signal on the left fronto-temporal
channels in samples [100, 300), split within subjects, then region and timestep ablations, a
feature clustering of the untrained and the trained encoder and a leave-two-subject run.

    eeg-probe run eeg_probe.pipelines.planted
"""
import os
from dataclasses import dataclass
from os import path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from eeg_probe.encoder import EncoderConfig, EncoderParams, embed, init_params
from eeg_probe.evaluation import AblationReport, feature_space_probe, timestep_ablation, write_frame
from eeg_probe.metric_learning import TrainConfig, TrainHistory, train
from eeg_probe.signal_io import SegmentSet

FEATURE_COLUMNS = ["encoder", "labels", "accuracy", "chance"]


@dataclass
class TrainedEncoder:
    params: EncoderParams
    history: TrainHistory


def fit_encoder(segments: SegmentSet, train_config: TrainConfig, encoder_config: EncoderConfig) -> TrainedEncoder:
    params, history = train(segments, train_config, encoder_config)
    return TrainedEncoder(params=params, history=history)


def timestep_sweep(model: TrainedEncoder, segments: SegmentSet, windows: Sequence[Sequence[int]],
                   label_mode: str = "video", seed: int = 0) -> AblationReport:
    return timestep_ablation(model.params, model.history.encoder_config, segments.split_part("test"),
                             [tuple(w) for w in windows], label_mode=label_mode, seed=seed)


def feature_clustering(model: TrainedEncoder, segments: SegmentSet, seed: int = 0) -> pd.DataFrame:
    """
    Cluster the embeddings of all segments by every label kind, once with the initial parameters
    of the trained encoder and once with the trained ones.
    """
    config = model.history.encoder_config
    rows = []
    for name, params in (("untrained", init_params(config)), ("trained", model.params)):
        result = feature_space_probe(embed(segments.segments, params, config), segments, seed=seed)
        rows += [{"encoder": name, "labels": kind, "accuracy": accuracy, "chance": chance}
                 for kind, (accuracy, chance) in result.items()]
    return pd.DataFrame(rows, columns=FEATURE_COLUMNS)


def write_reports(out_dir: str, model: Optional[TrainedEncoder] = None, features: Optional[pd.DataFrame] = None,
                  **reports: AblationReport) -> Dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    written = {}
    for name, report in reports.items():
        fn = path.join(out_dir, f'{name}.csv')
        report.to_csv(fn)
        report.to_json(path.splitext(fn)[0] + ".json")
        written[name] = fn
    if features is not None:
        fn = path.join(out_dir, "features.csv")
        write_frame(features, fn, what="feature clustering rows")
        written["features"] = fn
    if model is not None:
        fn = path.join(out_dir, "history.csv")
        model.history.to_csv(fn)
        written["history"] = fn
    return written


SEED = 0
REGIONS: List[str] = ["noseback_left", "noseback_right"]
LEAVE_OUT: List[int] = [5, 6]
TRAIN = {"_target_": "eeg_probe.metric_learning.TrainConfig", "epochs": 30, "batch_size": 64, "seed": SEED}
ENCODER = {"_target_": "eeg_probe.encoder.EncoderConfig", "seed": SEED}

config = {
    "stages": {
        "dataset": {
            "_target_": "eeg_probe.signal_io.synth_dataset",
            "spec": {"_target_": "eeg_probe.signal_io.SynthSpec", "n_subjects": 6, "n_classes": 5,
                     "segments_per_class_per_subject": 20, "signal_region": "noseback_left",
                     "signal_window": [100, 300], "snr_db": 0.0, "seed": SEED},
        },
        "split": {
            "_target_": "eeg_probe.preprocess.split_within",
            "_inputs_": {"segment_set": "dataset"},
            "ratios": [0.8, 0.1, 0.1],
            "seed": SEED,
        },
        "montage": {"_target_": "eeg_probe.montage.load_builtin", "name": "seed_v1"},
        "model": {
            "_target_": "eeg_probe.pipelines.planted.fit_encoder",
            "_inputs_": {"segments": "split"},
            "train_config": TRAIN,
            "encoder_config": ENCODER,
        },
        "feature_report": {
            "_target_": "eeg_probe.pipelines.planted.feature_clustering",
            "_inputs_": {"model": "model", "segments": "split"},
            "seed": SEED,
        },
        "region_report": {
            "_target_": "eeg_probe.evaluation.region_ablation",
            "_inputs_": {"segments": "split", "montage": "montage"},
            "regime": "all_subject",
            "train_config": TRAIN,
            "encoder_config": ENCODER,
            "regions": REGIONS,
        },
        "timestep_report": {
            "_target_": "eeg_probe.pipelines.planted.timestep_sweep",
            "_inputs_": {"model": "model", "segments": "split"},
            "windows": [[0, 100], [100, 300], [300, 400]],
            "seed": SEED,
        },
        "leave_two_split": {
            "_target_": "eeg_probe.preprocess.split_leave_two",
            "_inputs_": {"segment_set": "dataset"},
            "test_subjects": LEAVE_OUT,
        },
        "leave_two_report": {
            "_target_": "eeg_probe.evaluation.region_ablation",
            "_inputs_": {"segments": "leave_two_split", "montage": "montage"},
            "regime": "leave_two",
            "train_config": TRAIN,
            "encoder_config": ENCODER,
            "regions": ["all"],
        },
        "write": {
            "_target_": "eeg_probe.pipelines.planted.write_reports",
            "_inputs_": {"regions": "region_report", "timesteps": "timestep_report", "leave_two": "leave_two_report",
                         "features": "feature_report", "model": "model"},
            "_cache_result_": False,
            "out_dir": "results/planted",
        },
    }
}
