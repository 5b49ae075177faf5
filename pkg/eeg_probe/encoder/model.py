"""
Channel-graph attention encoder: attention over a complete channel graph (self loops included)
mixes the raw channels, a temporal convolution runs over the mixed signal and a linear head maps
the flattened feature map to a unit-norm embedding.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, fields
from typing import Dict, Union

import numpy as np

from eeg_probe.autodiff import ops
from eeg_probe.autodiff.tensor import Tensor
from eeg_probe.encoder.config import EncoderConfig
from eeg_probe.errors import ContractError, DimensionError

logger = logging.getLogger(__name__)


@dataclass
class EncoderParams:
    # heads x in_samples x gat_dim, shared by all channels
    gat_weight: np.ndarray
    # heads x (2 * gat_dim)
    gat_attention: np.ndarray
    # conv_channels x in_channels x conv_kernel
    conv_weight: np.ndarray
    conv_bias: np.ndarray
    # flat_dim x embed_dim
    linear_weight: np.ndarray
    linear_bias: np.ndarray

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, arrays: Dict[str, np.ndarray]) -> EncoderParams:
        return cls(**{f.name: np.asarray(arrays[f.name], dtype=np.float64) for f in fields(cls)})

    def copy(self) -> EncoderParams:
        return EncoderParams.from_dict({k: v.copy() for k, v in self.as_dict().items()})

    def check(self, config: EncoderConfig):
        expected = param_shapes(config)
        for name, value in self.as_dict().items():
            if value.shape != expected[name]:
                raise DimensionError(f'parameter {name} has shape {value.shape}, config implies {expected[name]}')
            if not np.all(np.isfinite(value)):
                raise ContractError(f'parameter {name} contains non-finite values')


def param_shapes(config: EncoderConfig) -> Dict[str, tuple]:
    return {
        "gat_weight": (config.gat_heads, config.in_samples, config.gat_dim),
        "gat_attention": (config.gat_heads, 2 * config.gat_dim),
        "conv_weight": (config.conv_channels, config.in_channels, config.conv_kernel),
        "conv_bias": (config.conv_channels,),
        "linear_weight": (config.flat_dim, config.embed_dim),
        "linear_bias": (config.embed_dim,),
    }


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_params(config: EncoderConfig) -> EncoderParams:
    """
    Glorot-uniform weights and zero biases, determined by `config.seed`.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)

    def uniform(shape, fan_in, fan_out):
        bound = glorot_bound(fan_in, fan_out)
        return rng.uniform(-bound, bound, size=shape)

    c, k = config.in_channels, config.conv_kernel
    params = EncoderParams(
        gat_weight=uniform((config.gat_heads, config.in_samples, config.gat_dim), config.in_samples, config.gat_dim),
        gat_attention=uniform((config.gat_heads, 2 * config.gat_dim), 2 * config.gat_dim, 1),
        conv_weight=uniform((config.conv_channels, c, k), c * k, config.conv_channels * k),
        conv_bias=np.zeros(config.conv_channels),
        linear_weight=uniform((config.flat_dim, config.embed_dim), config.flat_dim, config.embed_dim),
        linear_bias=np.zeros(config.embed_dim),
    )
    logger.debug(f'initialized encoder with {sum(v.size for v in params.as_dict().values())} parameters')
    return params


ParamsLike = Union[EncoderParams, Dict[str, Tensor]]


def as_param_tensors(params: ParamsLike, requires_grad: bool = False) -> Dict[str, Tensor]:
    if isinstance(params, EncoderParams):
        return {name: Tensor(value, requires_grad=requires_grad) for name, value in params.as_dict().items()}
    return params


def _ones(rows: int, cols: int) -> Tensor:
    return Tensor(np.ones((rows, cols)))


def _head_tensors(p: Dict[str, Tensor], config: EncoderConfig, head: int):
    t, d = config.in_samples, config.gat_dim
    weights = ops.reshape(p["gat_weight"], (config.gat_heads * t, d))
    w = ops.take_rows(weights, np.arange(head * t, (head + 1) * t))
    a = ops.transpose(ops.take_rows(p["gat_attention"], [head]))
    a_src = ops.take_rows(a, np.arange(d))
    a_dst = ops.take_rows(a, np.arange(d, 2 * d))
    return w, a_src, a_dst


def _head_attention(x: Tensor, w: Tensor, a_src: Tensor, a_dst: Tensor, alpha: float):
    n_nodes = x.shape[0]
    nodes = ops.matmul(x, w)
    # e_ij = a_src . h_i + a_dst . h_j
    src = ops.matmul(ops.matmul(nodes, a_src), _ones(1, n_nodes))
    dst = ops.matmul(_ones(n_nodes, 1), ops.transpose(ops.matmul(nodes, a_dst)))
    logits = ops.leaky_relu(ops.add(src, dst), alpha)
    return ops.row_softmax(logits), nodes


def _check_segment(x: Tensor, config: EncoderConfig):
    if x.shape != (config.in_channels, config.in_samples):
        raise DimensionError(f'segment has shape {x.shape}, encoder expects '
                             f'({config.in_channels}, {config.in_samples})')


def gat_attention(x: Tensor, params: ParamsLike, config: EncoderConfig) -> Tensor:
    """
    Channel mixing matrix (C x C), the mean of the per-head attention matrices.
    """
    _check_segment(x, config)
    p = as_param_tensors(params)
    matrices = [
        _head_attention(x, *_head_tensors(p, config, head), alpha=config.leaky_alpha)[0]
        for head in range(config.gat_heads)
    ]
    if len(matrices) == 1:
        return matrices[0]
    total = matrices[0]
    for m in matrices[1:]:
        total = ops.add(total, m)
    return ops.scale(total, 1.0 / len(matrices))


def gat_layer(x: Tensor, params: ParamsLike, config: EncoderConfig) -> Tensor:
    """
    Attention-aggregated node features (C x gat_dim): output_i = sum_j alpha_ij h_j, averaged over
    heads.
    """
    _check_segment(x, config)
    p = as_param_tensors(params)
    outputs = []
    for head in range(config.gat_heads):
        attention, nodes = _head_attention(x, *_head_tensors(p, config, head), alpha=config.leaky_alpha)
        outputs.append(ops.matmul(attention, nodes))
    total = outputs[0]
    for o in outputs[1:]:
        total = ops.add(total, o)
    return total if len(outputs) == 1 else ops.scale(total, 1.0 / len(outputs))


def _segment_features(x: Tensor, p: Dict[str, Tensor], config: EncoderConfig) -> Tensor:
    mixed = ops.matmul(gat_attention(x, p, config), x)
    conv = ops.conv1d(mixed, p["conv_weight"], config.conv_stride)
    bias = ops.matmul(ops.reshape(p["conv_bias"], (config.conv_channels, 1)), _ones(1, config.conv_out_samples))
    activated = ops.leaky_relu(ops.add(conv, bias), config.leaky_alpha)
    return ops.reshape(activated, (1, config.flat_dim))


def encode(batch: np.ndarray, params: ParamsLike, config: EncoderConfig) -> Tensor:
    """
    Embed a batch of segments (N x C x T) into unit-norm rows (N x 1024). Differentiable with
    respect to the parameters when they are passed as tensors requiring gradients inside a Tape.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 3 or batch.shape[1:] != (config.in_channels, config.in_samples):
        raise DimensionError(f'batch has shape {batch.shape}, encoder expects (N, {config.in_channels}, '
                             f'{config.in_samples})')
    if batch.shape[0] == 0:
        raise DimensionError(f'cannot encode an empty batch')
    p = as_param_tensors(params)
    features = ops.concat_rows([_segment_features(Tensor(segment), p, config) for segment in batch])
    n = batch.shape[0]
    linear = ops.add(
        ops.matmul(features, p["linear_weight"]),
        ops.matmul(_ones(n, 1), ops.reshape(p["linear_bias"], (1, config.embed_dim))),
    )
    return ops.l2_normalize_rows(linear)


def embed(batch: np.ndarray, params: EncoderParams, config: EncoderConfig, chunk_size: int = 256) -> np.ndarray:
    """
    Inference helper: embeddings as a plain array, computed chunk by chunk.
    """
    batch = np.asarray(batch, dtype=np.float64)
    chunks = [encode(batch[i:i + chunk_size], params, config).data for i in range(0, len(batch), chunk_size)]
    return np.concatenate(chunks) if chunks else np.zeros((0, config.embed_dim))


def mask_timesteps(batch: np.ndarray, t1: int, t2: int) -> np.ndarray:
    """
    Zero the samples [t1, t2) on all channels.
    """
    batch = np.asarray(batch, dtype=np.float64)
    n_samples = batch.shape[-1]
    if not 0 <= t1 < t2 <= n_samples:
        raise ContractError(f'mask range has to satisfy 0 <= t1 < t2 <= {n_samples}, got [{t1}, {t2})')
    masked = batch.copy()
    masked[..., t1:t2] = 0.0
    return masked
