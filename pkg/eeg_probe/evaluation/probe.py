import logging
from typing import Dict, Tuple

import numpy as np

from eeg_probe.autodiff import ops
from eeg_probe.autodiff.tensor import Tape, Tensor, backward
from eeg_probe.errors import DataError, DimensionError
from eeg_probe.evaluation.clustering import cluster_accuracy, kmeans
from eeg_probe.signal_io import SegmentSet

logger = logging.getLogger(__name__)


def linear_probe(
    train_emb: np.ndarray,
    train_labels: np.ndarray,
    test_emb: np.ndarray,
    test_labels: np.ndarray,
    epochs: int = 200,
    lr: float = 1e-2,
    l2: float = 1e-4,
) -> float:
    """
    One-vs-rest linear SVM on frozen embeddings: the hinge loss max(0, 1 - y * score) summed over
    classes and averaged over samples, plus `l2` * |W|^2, minimized by full-batch gradient
    descent. Returns the test accuracy of the argmax prediction.
    """
    train_emb = np.asarray(train_emb, dtype=np.float64)
    test_emb = np.asarray(test_emb, dtype=np.float64)
    if train_emb.ndim != 2 or test_emb.ndim != 2 or train_emb.shape[1] != test_emb.shape[1]:
        raise DimensionError(f'incompatible embedding shapes {train_emb.shape} and {test_emb.shape}')
    classes, train_idx = np.unique(train_labels, return_inverse=True)
    if len(classes) < 2:
        raise DataError(f'linear probe needs at least two classes in the train set')
    n, d = train_emb.shape
    targets = Tensor(np.where(train_idx[:, None] == np.arange(len(classes))[None, :], 1.0, -1.0))
    x = Tensor(train_emb)
    ones = Tensor(np.ones((n, 1)))
    weight = np.zeros((d, len(classes)))
    bias = np.zeros((1, len(classes)))

    for epoch in range(epochs):
        w = Tensor(weight, requires_grad=True)
        b = Tensor(bias, requires_grad=True)
        with Tape() as tape:
            scores = ops.add(ops.matmul(x, w), ops.matmul(ones, b))
            hinge = ops.leaky_relu(ops.sub(1.0, ops.mul(targets, scores)), alpha=0.0)
            loss = ops.add(ops.scale(ops.sum_all(hinge), 1.0 / n), ops.scale(ops.sum_all(ops.mul(w, w)), l2))
        backward(loss, tape)
        weight = weight - lr * w.grad
        bias = bias - lr * b.grad
        if epoch % 50 == 0:
            logger.debug(f'probe epoch {epoch}: loss {loss.item():.6f}')

    predicted = classes[(test_emb @ weight + bias).argmax(axis=1)]
    return float(np.mean(predicted == np.asarray(test_labels)))


def feature_space_probe(emb: np.ndarray, segments: SegmentSet, seed: int = 0,
                        restarts: int = 10) -> Dict[str, Tuple[float, float]]:
    """
    Cluster the same embeddings against video, emotion (if present) and subject labels.

    :return: label kind -> (k-means accuracy, chance level)
    """
    emb = np.asarray(emb, dtype=np.float64)
    if len(emb) != len(segments):
        raise DimensionError(f'{len(emb)} embeddings for {len(segments)} segments')
    kinds = ["video", "subject"]
    if np.all(segments.emotion_label >= 0):
        kinds.insert(1, "emotion")
    result = {}
    for kind in kinds:
        labels = segments.labels(kind)
        k = len(np.unique(labels))
        if k < 2:
            logger.info(f'skipping {kind}: a single label')
            continue
        assignments = kmeans(emb, k, restarts=restarts, seed=seed).assignments
        result[kind] = (cluster_accuracy(assignments, labels), 1.0 / k)
        logger.info(f'{kind}: k-means accuracy {result[kind][0]:.4f} (chance {result[kind][1]:.4f})')
    return result
