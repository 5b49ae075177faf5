import logging
from typing import Callable, Optional

import numpy as np

from eeg_probe.autodiff.tensor import Tape, Tensor, backward
from eeg_probe.errors import ContractError, DimensionError

logger = logging.getLogger(__name__)


def finite_diff_check(
    f: Callable[[Tensor], Tensor],
    x: Tensor,
    h: float = 1e-5,
    max_coords: Optional[int] = None,
    seed: int = 0,
) -> float:
    """
    Compare the reverse-mode gradient of a scalar function with central differences.

    :param f: scalar valued function of a single tensor
    :param x: the point to check at (not modified)
    :param h: central difference step
    :param max_coords: if set, only check a seeded random subset of that many coordinates
    :param seed: seed for the coordinate subset
    :return: max over coordinates of |analytic - central| / (|analytic| + |central| + 1e-12)
    """
    if h <= 0:
        raise ContractError(f'step h has to be positive, got {h}')
    leaf = Tensor(x.data, requires_grad=True)
    with Tape() as tape:
        out = f(leaf)
    if out.size != 1:
        raise DimensionError(f'finite_diff_check needs a scalar function, got output shape {out.shape}')
    backward(out, tape)
    analytic = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)

    coords = np.arange(x.size)
    if max_coords is not None and max_coords < x.size:
        coords = np.sort(np.random.default_rng(seed).choice(x.size, size=max_coords, replace=False))

    base = x.data
    max_err = 0.0
    for idx in coords:
        plus = base.copy()
        plus.flat[idx] += h
        minus = base.copy()
        minus.flat[idx] -= h
        central = (f(Tensor(plus)).item() - f(Tensor(minus)).item()) / (2 * h)
        a = analytic.flat[idx]
        err = abs(a - central) / (abs(a) + abs(central) + 1e-12)
        max_err = max(max_err, err)
    logger.debug(f'finite difference check over {len(coords)} coordinates: max relative error {max_err:.3e}')
    return max_err
