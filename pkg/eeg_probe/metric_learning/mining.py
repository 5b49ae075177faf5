from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from eeg_probe.autodiff.tensor import Tensor
from eeg_probe.errors import DimensionError

logger = logging.getLogger(__name__)

MAX_TRIPLES_PER_ANCHOR = 20


@dataclass(frozen=True)
class TripletBatch:
    """
    Index triples into an embedding batch: label(anchor) = label(positive) != label(negative).
    """
    anchor: np.ndarray
    positive: np.ndarray
    negative: np.ndarray

    def __len__(self):
        return len(self.anchor)

    @staticmethod
    def empty() -> TripletBatch:
        nothing = np.zeros(0, dtype=np.int64)
        return TripletBatch(anchor=nothing, positive=nothing, negative=nothing)

    def as_set(self) -> set:
        return set(zip(self.anchor.tolist(), self.positive.tolist(), self.negative.tolist()))


def mine_multisimilarity(
    emb: Union[Tensor, np.ndarray],
    labels: np.ndarray,
    epsilon: float = 0.1,
    max_per_anchor: int = MAX_TRIPLES_PER_ANCHOR,
) -> TripletBatch:
    """
    Multi-similarity mining on cosine similarity (dot product of unit rows). For anchor a a
    positive p is hard if s(a, p) < max_n s(a, n) + epsilon, a negative n is hard if
    s(a, n) > min_p s(a, p) - epsilon. Triples are the cross product of hard positives and hard
    negatives per anchor, at most `max_per_anchor` of them, hardest (largest s(a, n) - s(a, p))
    first.
    """
    emb = emb.data if isinstance(emb, Tensor) else np.asarray(emb, dtype=np.float64)
    labels = np.asarray(labels)
    if emb.ndim != 2 or len(labels) != emb.shape[0]:
        raise DimensionError(f'embeddings of shape {emb.shape} do not fit {len(labels)} labels')
    if len(np.unique(labels)) < 2:
        logger.debug(f'single class batch, nothing to mine')
        return TripletBatch.empty()

    sim = emb @ emb.T
    indices = np.arange(len(labels))
    anchors, positives, negatives = [], [], []
    for a in indices:
        same = labels == labels[a]
        pos = indices[same & (indices != a)]
        neg = indices[~same]
        if len(pos) == 0:
            continue
        hard_pos = pos[sim[a, pos] < sim[a, neg].max() + epsilon]
        hard_neg = neg[sim[a, neg] > sim[a, pos].min() - epsilon]
        if len(hard_pos) == 0 or len(hard_neg) == 0:
            continue
        pp, nn = np.meshgrid(hard_pos, hard_neg, indexing="ij")
        pp, nn = pp.ravel(), nn.ravel()
        hardness = sim[a, nn] - sim[a, pp]
        keep = np.lexsort((nn, pp, -hardness))[:max_per_anchor]
        anchors.append(np.full(len(keep), a, dtype=np.int64))
        positives.append(pp[keep])
        negatives.append(nn[keep])
    if not anchors:
        return TripletBatch.empty()
    return TripletBatch(
        anchor=np.concatenate(anchors),
        positive=np.concatenate(positives).astype(np.int64),
        negative=np.concatenate(negatives).astype(np.int64),
    )
