from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from eeg_probe.errors import DimensionError


@dataclass(frozen=True)
class AdamState:
    step: int
    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]

    @staticmethod
    def zeros(params: Dict[str, np.ndarray]) -> AdamState:
        return AdamState(
            step=0,
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


def adam_step(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """
    One Adam update with bias correction. Weight decay is coupled: `weight_decay * p` is added to
    the gradient before the moment updates. Inputs are not modified.
    """
    step = state.step + 1
    new_params, new_m, new_v = {}, {}, {}
    for name, p in params.items():
        g = grads.get(name)
        g = np.zeros_like(p) if g is None else g
        if g.shape != p.shape:
            raise DimensionError(f'gradient of {name} has shape {g.shape}, parameter has {p.shape}')
        g = g + weight_decay * p
        m = beta1 * state.m[name] + (1.0 - beta1) * g
        v = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** step)
        v_hat = v / (1.0 - beta2 ** step)
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    return new_params, AdamState(step=step, m=new_m, v=new_v)
