import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from eeg_probe.autodiff.tensor import Tape, backward
from eeg_probe.encoder import EncoderConfig, EncoderParams, as_param_tensors, embed, encode, init_params
from eeg_probe.errors import ConfigError, TrainingError
from eeg_probe.metric_learning.loss import triplet_loss
from eeg_probe.metric_learning.mining import MAX_TRIPLES_PER_ANCHOR, mine_multisimilarity
from eeg_probe.metric_learning.optim import AdamState, adam_step
from eeg_probe.montage import Montage, select_region
from eeg_probe.signal_io import SegmentSet

logger = logging.getLogger(__name__)

LABEL_MODES = ("video", "emotion")
HISTORY_COLUMNS = ["epoch", "mean_loss", "val_kmeans_acc", "skipped_steps"]


@dataclass
class TrainConfig:
    margin: float = 0.2
    ms_epsilon: float = 0.1
    max_triples_per_anchor: int = MAX_TRIPLES_PER_ANCHOR
    lr: float = 3e-4
    weight_decay: float = 1e-4
    epochs: int = 100
    batch_size: int = 64
    seed: int = 0
    label_mode: str = "video"
    kmeans_restarts: int = 10

    def validate(self):
        if self.margin < 0:
            raise ConfigError(f'margin must not be negative, got {self.margin}')
        if self.lr <= 0:
            raise ConfigError(f'lr has to be positive, got {self.lr}')
        if self.epochs < 1 or self.batch_size < 2:
            raise ConfigError(f'need epochs >= 1 and batch_size >= 2, got {self.epochs} and {self.batch_size}')
        if self.label_mode not in LABEL_MODES:
            raise ConfigError(f'label_mode has to be one of {LABEL_MODES}, got "{self.label_mode}"')


@dataclass
class TrainHistory:
    # the encoder config actually trained (in_channels follows the selected region)
    encoder_config: EncoderConfig
    rows: List[Dict] = field(default_factory=list)
    best_epoch: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=HISTORY_COLUMNS)

    def to_csv(self, fn: str):
        self.to_frame().to_csv(fn, index=False)
        logger.info(f'wrote training history to: {fn}')


def class_balanced_batches(labels: np.ndarray, batch_size: int, rng: np.random.Generator) -> List[np.ndarray]:
    """
    Epoch plan: ceil(batch_size / K) segments of every class per batch, drawing each class from
    its own shuffled stream (reshuffled when exhausted). The number of batches is
    ceil(N / batch_size).
    """
    classes = np.unique(labels)
    per_class = math.ceil(batch_size / len(classes))
    n_batches = math.ceil(len(labels) / batch_size)
    needed = n_batches * per_class
    streams = []
    for c in classes:
        members = np.flatnonzero(labels == c)
        chunks = [rng.permutation(members) for _ in range(math.ceil(needed / len(members)))]
        streams.append(np.concatenate(chunks)[:needed])
    batches = []
    for b in range(n_batches):
        parts = [np.unique(s[b * per_class:(b + 1) * per_class]) for s in streams]
        batches.append(np.concatenate(parts))
    return batches


def train_step(
    params: EncoderParams,
    batch: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
    encoder_config: EncoderConfig,
) -> Tuple[Optional[float], Optional[Dict[str, np.ndarray]]]:
    """
    encode -> mine -> loss -> backward. Returns (None, None) if nothing was mined.
    """
    tensors = as_param_tensors(params, requires_grad=True)
    with Tape() as tape:
        emb = encode(batch, tensors, encoder_config)
        triples = mine_multisimilarity(emb, labels, config.ms_epsilon, config.max_triples_per_anchor)
        if len(triples) == 0:
            return None, None
        loss = triplet_loss(emb, triples, config.margin)
    backward(loss, tape)
    grads = {name: t.grad if t.grad is not None else np.zeros_like(t.data) for name, t in tensors.items()}
    return loss.item(), grads


def _val_accuracy(params: EncoderParams, val: SegmentSet, config: TrainConfig,
                  encoder_config: EncoderConfig) -> float:
    from eeg_probe.evaluation.clustering import cluster_accuracy, kmeans

    labels = val.labels(config.label_mode)
    k = len(np.unique(labels))
    if len(val) < k or k < 2:
        return float("nan")
    emb = embed(val.segments, params, encoder_config)
    result = kmeans(emb, k, restarts=config.kmeans_restarts, seed=config.seed)
    return cluster_accuracy(result.assignments, labels)


def train(
    segments: SegmentSet,
    config: TrainConfig,
    encoder_config: EncoderConfig,
    montage: Optional[Montage] = None,
    region: str = "all",
) -> Tuple[EncoderParams, TrainHistory]:
    """
    Train the encoder with triplet loss on the `train` split (restricted to `region` if a montage
    is given) and return the parameters of the epoch with the best val k-means accuracy. Without a
    val split the last epoch is returned.
    """
    config.validate()
    if montage is not None:
        segments = select_region(segments, montage, region)
    if encoder_config.in_channels != segments.n_channels:
        logger.info(f'setting encoder in_channels to {segments.n_channels} (region "{region}")')
        encoder_config = dataclasses.replace(encoder_config, in_channels=segments.n_channels)
    encoder_config.validate()

    train_part = segments.split_part("train")
    val_part = segments.split_part("val")
    if len(train_part) == 0:
        raise TrainingError(f'train split is empty')
    labels = train_part.labels(config.label_mode)
    if len(np.unique(labels)) < 2:
        raise TrainingError(f'train split holds a single {config.label_mode} class, triplet training needs two')

    rng = np.random.default_rng(config.seed)
    params = init_params(encoder_config)
    state = AdamState.zeros(params.as_dict())
    history = TrainHistory(encoder_config=encoder_config)
    best_acc, best_params = -np.inf, params

    for epoch in range(1, config.epochs + 1):
        losses, skipped = [], 0
        for idx in class_balanced_batches(labels, config.batch_size, rng):
            loss, grads = train_step(params, train_part.segments[idx], labels[idx], config, encoder_config)
            if grads is None:
                skipped += 1
                continue
            new_params, state = adam_step(params.as_dict(), grads, state, lr=config.lr,
                                          weight_decay=config.weight_decay)
            params = EncoderParams.from_dict(new_params)
            losses.append(loss)
        if skipped:
            logger.warning(f'epoch {epoch}: skipped {skipped} steps without mined triples')
        mean_loss = float(np.mean(losses)) if losses else 0.0
        val_acc = _val_accuracy(params, val_part, config, encoder_config) if len(val_part) else float("nan")
        history.rows.append({"epoch": epoch, "mean_loss": mean_loss, "val_kmeans_acc": val_acc,
                             "skipped_steps": skipped})
        logger.info(f'epoch {epoch}/{config.epochs}: loss={mean_loss:.5f} val_kmeans_acc={val_acc:.4f}')
        if np.isnan(val_acc):
            best_params, history.best_epoch = params, epoch
        elif val_acc > best_acc:
            best_acc, best_params, history.best_epoch = val_acc, params, epoch

    logger.info(f'selected parameters of epoch {history.best_epoch}')
    return best_params, history
