"""
Region and timestep ablation sweeps. Every sweep unit owns its model and seed, so units run in
parallel through joblib; the report is assembled in request order.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from eeg_probe.encoder import EncoderConfig, EncoderParams, embed, mask_timesteps
from eeg_probe.errors import ContractError, DataError, ProbeError
from eeg_probe.evaluation.clustering import cluster_accuracy, kmeans
from eeg_probe.evaluation.export import write_frame
from eeg_probe.metric_learning.train import TrainConfig, train
from eeg_probe.montage import Montage, select_region
from eeg_probe.signal_io import SegmentSet

logger = logging.getLogger(__name__)

REGIMES = ("all_subject", "leave_two")
REPORT_KINDS = ("region", "timestep")
REPORT_COLUMNS = ["region", "regime", "accuracy", "n_test", "chance"]
BASELINE_WINDOW = (0, 0)


@dataclass(frozen=True)
class AblationRow:
    # region key, or "t1:t2" for timestep rows
    region: str
    regime: str
    accuracy: float
    n_test: int
    chance: float


@dataclass
class AblationReport:
    kind: str
    rows: List[AblationRow] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in REPORT_KINDS:
            raise ContractError(f'unknown report kind "{self.kind}", expected one of {REPORT_KINDS}')

    def __len__(self):
        return len(self.rows)

    def accuracy(self, region: str) -> float:
        for row in self.rows:
            if row.region == region:
                return row.accuracy
        raise KeyError(region)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(row) for row in self.rows], columns=REPORT_COLUMNS)

    def to_csv(self, fn: str):
        write_frame(self.to_frame(), fn, what=f'{self.kind} ablation rows')

    def to_json(self, fn: str):
        with open(fn, "w", encoding="utf-8") as f:
            json.dump({"kind": self.kind, "rows": [asdict(row) for row in self.rows]}, f, indent=2)
        logger.info(f'wrote {self.kind} ablation report to: {fn}')

    @staticmethod
    def from_csv(fn: str, kind: str) -> AblationReport:
        frame = pd.read_csv(fn, dtype={"region": str})
        return AblationReport(kind=kind, rows=[AblationRow(**record) for record in frame.to_dict("records")])


def window_label(window: Tuple[int, int]) -> str:
    return f'{window[0]}:{window[1]}'


def parse_window(text: str) -> Tuple[int, int]:
    try:
        t1, t2 = (int(part) for part in text.split(":"))
    except ValueError as e:
        raise ContractError(f'window has to be "t1:t2", got "{text}"') from e
    return t1, t2


def _clustered_accuracy(emb: np.ndarray, labels: np.ndarray, seed: int, restarts: int) -> Tuple[float, float]:
    k = len(np.unique(labels))
    if k < 2:
        raise DataError(f'test split holds fewer than two classes')
    assignments = kmeans(emb, k, restarts=restarts, seed=seed).assignments
    return cluster_accuracy(assignments, labels), 1.0 / k


def _region_unit(segments: SegmentSet, montage: Montage, region: str, regime: str, train_config: TrainConfig,
                 encoder_config: EncoderConfig) -> AblationRow:
    try:
        params, history = train(segments, train_config, encoder_config, montage=montage, region=region)
        test = select_region(segments, montage, region).split_part("test")
        if len(test) == 0:
            raise DataError(f'test split is empty')
        emb = embed(test.segments, params, history.encoder_config)
        accuracy, chance = _clustered_accuracy(emb, test.labels(train_config.label_mode), train_config.seed,
                                               train_config.kmeans_restarts)
    except ProbeError as e:
        raise type(e)(f'region "{region}": {e}') from e
    logger.info(f'region {region} ({regime}): accuracy {accuracy:.4f} on {len(test)} test segments')
    return AblationRow(region=region, regime=regime, accuracy=accuracy, n_test=len(test), chance=chance)


def region_ablation(
    segments: SegmentSet,
    montage: Montage,
    regime: str,
    train_config: TrainConfig,
    encoder_config: EncoderConfig,
    regions: Optional[Sequence[str]] = None,
    n_jobs: int = 1,
) -> AblationReport:
    """
    For each region: select its channels, train on the train split, embed the test split and
    score k-means clustering with k = number of test classes. `segments` has to be split
    already in the way the regime prescribes. Without `regions` the whole montage catalog is
    swept (which includes `all`).
    """
    if regime not in REGIMES:
        raise ContractError(f'unknown regime "{regime}", expected one of {REGIMES}')
    regions = list(montage.keys) if regions is None else list(regions)
    for region in regions:
        # fail before any training on unknown keys
        montage.region(region)
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_region_unit)(segments, montage, region, regime, train_config, encoder_config)
        for region in regions
    )
    return AblationReport(kind="region", rows=list(rows))


def _timestep_unit(params: EncoderParams, encoder_config: EncoderConfig, segments: SegmentSet,
                   window: Tuple[int, int], labels: np.ndarray, regime: str, seed: int,
                   restarts: int) -> AblationRow:
    batch = segments.segments if window == BASELINE_WINDOW else mask_timesteps(segments.segments, *window)
    accuracy, chance = _clustered_accuracy(embed(batch, params, encoder_config), labels, seed, restarts)
    logger.info(f'window {window_label(window)}: accuracy {accuracy:.4f}')
    return AblationRow(region=window_label(window), regime=regime, accuracy=accuracy, n_test=len(segments),
                       chance=chance)


def timestep_ablation(
    params: EncoderParams,
    encoder_config: EncoderConfig,
    test_segments: SegmentSet,
    windows: Sequence[Tuple[int, int]],
    label_mode: str = "video",
    regime: str = "all_subject",
    seed: int = 0,
    restarts: int = 10,
    n_jobs: int = 1,
) -> AblationReport:
    """
    Mask each window [t1, t2) on all channels, embed with the fixed parameters and score k-means
    clustering. The unmasked baseline comes first as window 0:0.
    """
    if regime not in REGIMES:
        raise ContractError(f'unknown regime "{regime}", expected one of {REGIMES}')
    if len(test_segments) == 0:
        raise DataError(f'no segments to evaluate')
    windows = [tuple(w) for w in windows]
    n_samples = test_segments.segments.shape[-1]
    for t1, t2 in windows:
        if not 0 <= t1 < t2 <= n_samples:
            raise ContractError(f'mask range has to satisfy 0 <= t1 < t2 <= {n_samples}, got [{t1}, {t2})')
    labels = test_segments.labels(label_mode)
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_timestep_unit)(params, encoder_config, test_segments, window, labels, regime, seed, restarts)
        for window in [BASELINE_WINDOW] + windows
    )
    return AblationReport(kind="timestep", rows=list(rows))
