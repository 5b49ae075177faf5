"""
Differentiable primitives. Broadcasting is limited to exact shapes and scalars (size-1, 0-d
operands); everything else is a DimensionError.
"""
import logging
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from eeg_probe.autodiff.tensor import Tensor, TensorLike, record_op
from eeg_probe.errors import ContractError, DimensionError

logger = logging.getLogger(__name__)


def as_tensor(x: TensorLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _is_scalar(t: Tensor) -> bool:
    return t.ndim == 0


def _check_broadcast(a: Tensor, b: Tensor, op_name: str):
    if a.shape != b.shape and not _is_scalar(a) and not _is_scalar(b):
        raise DimensionError(f'{op_name}: incompatible shapes {a.shape} and {b.shape} (only exact shape or '
                             f'scalar broadcast is supported)')


def _unbroadcast(g: np.ndarray, t: Tensor) -> np.ndarray:
    if _is_scalar(t) and g.ndim != 0:
        return np.asarray(g.sum())
    return g


def add(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")
    return record_op("add", (a, b), a.data + b.data,
                     lambda g: (_unbroadcast(g, a), _unbroadcast(g, b)))


def sub(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")
    return record_op("sub", (a, b), a.data - b.data,
                     lambda g: (_unbroadcast(g, a), _unbroadcast(-g, b)))


def mul(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")
    return record_op("mul", (a, b), a.data * b.data,
                     lambda g: (_unbroadcast(g * b.data, a), _unbroadcast(g * a.data, b)))


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    return record_op("scale", (x,), x.data * c, lambda g: (g * c,))


def leaky_relu(x: Tensor, alpha: float = 0.2) -> Tensor:
    """
    max(x, 0) + alpha * min(x, 0). The derivative at exactly 0 is alpha; alpha=0 gives the hinge
    max(x, 0).
    """
    positive = x.data > 0
    slope = np.where(positive, 1.0, alpha)
    return record_op("leaky_relu", (x,), x.data * slope, lambda g: (g * slope,))


def elementwise(kind: str, *operands: TensorLike, alpha: float = 0.2, c: float = 1.0) -> Tensor:
    if kind == "add":
        return add(*operands)
    if kind == "sub":
        return sub(*operands)
    if kind == "mul":
        return mul(*operands)
    if kind == "leaky_relu":
        (x,) = operands
        return leaky_relu(as_tensor(x), alpha=alpha)
    if kind == "scale":
        (x,) = operands
        return scale(as_tensor(x), c)
    raise ContractError(f'unknown elementwise op: {kind}')


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f'matmul: cannot multiply shapes {a.shape} and {b.shape}')
    return record_op("matmul", (a, b), a.data @ b.data,
                     lambda g: (g @ b.data.T, a.data.T @ g))


def transpose(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise DimensionError(f'transpose expects a matrix, got shape {x.shape}')
    return record_op("transpose", (x,), x.data.T.copy(), lambda g: (g.T.copy(),))


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    if int(np.prod(shape)) != x.size:
        raise DimensionError(f'reshape: cannot view {x.shape} as {shape}')
    return record_op("reshape", (x,), x.data.reshape(shape).copy(), lambda g: (g.reshape(x.shape),))


def take_rows(x: Tensor, indices: Sequence[int]) -> Tensor:
    indices = np.asarray(indices, dtype=np.int64)
    if x.ndim != 2:
        raise DimensionError(f'take_rows expects a matrix, got shape {x.shape}')

    def _backward(g):
        dx = np.zeros_like(x.data)
        np.add.at(dx, indices, g)
        return (dx,)

    return record_op("take_rows", (x,), x.data[indices], _backward)


def sum_all(x: Tensor) -> Tensor:
    return record_op("sum", (x,), np.asarray(x.data.sum()), lambda g: (np.full_like(x.data, g),))


def mean_all(x: Tensor) -> Tensor:
    return scale(sum_all(x), 1.0 / x.size)


def sum_rows(x: Tensor) -> Tensor:
    """
    Sum over the columns of a matrix, keeping a column vector (m x 1).
    """
    if x.ndim != 2:
        raise DimensionError(f'sum_rows expects a matrix, got shape {x.shape}')
    return record_op("sum_rows", (x,), x.data.sum(axis=1, keepdims=True),
                     lambda g: (np.repeat(g, x.shape[1], axis=1),))


def row_softmax(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise DimensionError(f'row_softmax expects a matrix, got shape {x.shape}')
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=1, keepdims=True)

    def _backward(g):
        return (y * (g - (g * y).sum(axis=1, keepdims=True)),)

    return record_op("row_softmax", (x,), y, _backward)


def l2_normalize_rows(x: Tensor, eps: float = 1e-12) -> Tensor:
    if eps <= 0:
        raise ContractError(f'eps has to be positive, got {eps}')
    if x.ndim != 2:
        raise DimensionError(f'l2_normalize_rows expects a matrix, got shape {x.shape}')
    norms = np.sqrt((x.data * x.data).sum(axis=1, keepdims=True))
    small = norms < eps
    denom = np.where(small, eps, norms)
    y = x.data / denom

    def _backward(g):
        radial = np.where(small, 0.0, (g * y).sum(axis=1, keepdims=True))
        return ((g - y * radial) / denom,)

    return record_op("l2_normalize_rows", (x,), y, _backward)


def _concat(xs: Sequence[Tensor], axis: int, op_name: str) -> Tensor:
    if len(xs) == 0:
        raise DimensionError(f'{op_name}: nothing to concatenate')
    other = 1 - axis
    for t in xs:
        if t.ndim != 2 or t.shape[other] != xs[0].shape[other]:
            raise DimensionError(f'{op_name}: mismatched extents {[t.shape for t in xs]}')
    bounds = np.cumsum([0] + [t.shape[axis] for t in xs])

    def _backward(g):
        if axis == 0:
            return tuple(g[bounds[i]:bounds[i + 1]] for i in range(len(xs)))
        return tuple(g[:, bounds[i]:bounds[i + 1]] for i in range(len(xs)))

    return record_op(op_name, tuple(xs), np.concatenate([t.data for t in xs], axis=axis), _backward)


def concat_rows(xs: Sequence[Tensor]) -> Tensor:
    return _concat(xs, axis=0, op_name="concat_rows")


def concat_cols(xs: Sequence[Tensor]) -> Tensor:
    return _concat(xs, axis=1, op_name="concat_cols")


def conv1d(x: Tensor, kernels: Tensor, stride: int = 1) -> Tensor:
    """
    Valid (unpadded) cross-correlation of a (cin x T) signal with (cout x cin x k) kernels.
    Output length is floor((T - k) / stride) + 1.
    """
    if x.ndim != 2 or kernels.ndim != 3:
        raise DimensionError(f'conv1d expects x (cin x T) and kernels (cout x cin x k), got {x.shape} and '
                             f'{kernels.shape}')
    if stride < 1:
        raise DimensionError(f'conv1d stride has to be positive, got {stride}')
    cin, n_samples = x.shape
    cout, k_cin, k = kernels.shape
    if k_cin != cin:
        raise DimensionError(f'conv1d: kernels expect {k_cin} input channels, signal has {cin}')
    if k > n_samples:
        raise DimensionError(f'conv1d: kernel length {k} exceeds signal length {n_samples}')
    n_out = (n_samples - k) // stride + 1
    # windows: cin x n_out x k
    windows = sliding_window_view(x.data, k, axis=1)[:, ::stride, :]
    out = np.einsum("ocj,ctj->ot", kernels.data, windows)

    def _backward(g):
        d_kernels = np.einsum("ot,ctj->ocj", g, windows)
        dx = np.zeros_like(x.data)
        last = stride * (n_out - 1) + 1
        for j in range(k):
            dx[:, j:j + last:stride] += kernels.data[:, :, j].T @ g
        return dx, d_kernels

    return record_op("conv1d", (x, kernels), out, _backward)
