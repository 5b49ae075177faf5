import logging
from typing import Union

import numpy as np

from eeg_probe.autodiff import ops
from eeg_probe.autodiff.tensor import Tensor
from eeg_probe.errors import ContractError
from eeg_probe.metric_learning.mining import TripletBatch

logger = logging.getLogger(__name__)


def _squared_distances(x: Tensor, y: Tensor) -> Tensor:
    diff = ops.sub(x, y)
    return ops.sum_rows(ops.mul(diff, diff))


def triplet_loss(emb: Union[Tensor, np.ndarray], triples: TripletBatch, margin: float = 0.2) -> Tensor:
    """
    Mean over triples of max(0, |f(a) - f(p)|^2 - |f(a) - f(n)|^2 + margin).
    """
    if margin < 0:
        raise ContractError(f'margin must not be negative, got {margin}')
    if len(triples) == 0:
        logger.warning(f'empty triplet set, loss is defined as 0')
        return Tensor(0.0)
    emb = ops.as_tensor(emb)
    anchor = ops.take_rows(emb, triples.anchor)
    d_pos = _squared_distances(anchor, ops.take_rows(emb, triples.positive))
    d_neg = _squared_distances(anchor, ops.take_rows(emb, triples.negative))
    violation = ops.add(ops.sub(d_pos, d_neg), float(margin))
    return ops.mean_all(ops.leaky_relu(violation, alpha=0.0))
