from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from eeg_probe.errors import ContractError

logger = logging.getLogger(__name__)

DEFAULT_ENC_DIM = 10
DEFAULT_TOTAL_FRAMES = 8
UNIT_NORM_TOLERANCE = 1e-6


def positional_encode(x: float, enc_dim: int = DEFAULT_ENC_DIM) -> np.ndarray:
    """
    [x, sin(x 2^0), cos(x 2^0), ..., sin(x 2^(enc_dim-1)), cos(x 2^(enc_dim-1))]
    """
    if enc_dim < 1:
        raise ContractError(f'enc_dim has to be at least 1, got {enc_dim}')
    xf = float(x) * np.power(2.0, np.arange(enc_dim))
    encodings = np.stack([np.sin(xf), np.cos(xf)], axis=-1).reshape(-1)
    return np.concatenate([[float(x)], encodings])


@dataclass(frozen=True)
class ConditioningVector:
    values: np.ndarray
    frame_index: int
    class_id: int
    embedding_size: int = 1024

    @property
    def embedding(self) -> np.ndarray:
        return self.values[:self.embedding_size]

    @property
    def position(self) -> np.ndarray:
        return self.values[self.embedding_size:]


def build_conditioning(emb: np.ndarray, frame_index: int, enc_dim: int = DEFAULT_ENC_DIM,
                       total_frames: int = DEFAULT_TOTAL_FRAMES, class_id: int = -1,
                       with_position: bool = True) -> ConditioningVector:
    """
    Concatenate a unit-norm embedding with the positional encoding of the raw frame index.
    `with_position=False` yields the bare embedding (generator variant without frame encoding).
    """
    emb = np.asarray(emb, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(emb))
    if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
        raise ContractError(f'conditioning needs a unit-norm embedding, got norm {norm:.9f}')
    if not 0 <= frame_index < total_frames:
        raise ContractError(f'frame index {frame_index} outside [0, {total_frames})')
    values = np.concatenate([emb, positional_encode(frame_index, enc_dim)]) if with_position else emb.copy()
    return ConditioningVector(values=values, frame_index=frame_index, class_id=class_id, embedding_size=len(emb))


def frame_label(class_id: int, frame_index: int, total_frames: int = DEFAULT_TOTAL_FRAMES) -> int:
    if not 0 <= frame_index < total_frames:
        raise ContractError(f'frame index {frame_index} outside [0, {total_frames})')
    return class_id * total_frames + frame_index


def generator_total_loss(gen_loss: float, l1_loss: float, lambda1: float = 0.5, lambda2: float = 5.0) -> float:
    if not (np.isfinite(gen_loss) and np.isfinite(l1_loss)):
        raise ContractError(f'generator losses have to be finite, got {gen_loss} and {l1_loss}')
    return lambda1 * gen_loss + lambda2 * l1_loss
