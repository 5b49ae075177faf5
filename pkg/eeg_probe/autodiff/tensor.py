from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from eeg_probe.errors import ContractError, DimensionError, NumericError

logger = logging.getLogger(__name__)

# one backward function per recorded op: output adjoint -> one adjoint (or None) per input
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_local = threading.local()


class Tensor:
    """
    Dense float64 array with an optional gradient buffer. Tensors are never mutated by ops; every
    op returns a fresh Tensor and, if a Tape is active and any input requires a gradient, records
    itself on that tape.
    """

    def __init__(self, data, requires_grad: bool = False):
        data = np.array(data, dtype=np.float64)
        if not np.all(np.isfinite(data)):
            raise NumericError(f'tensor data contains non-finite values')
        self.data: np.ndarray = data
        self.requires_grad: bool = requires_grad
        self.grad: Optional[np.ndarray] = None

    @classmethod
    def _wrap(cls, data: np.ndarray, requires_grad: bool, op_name: str) -> Tensor:
        if not np.all(np.isfinite(data)):
            raise NumericError(f'op "{op_name}" produced non-finite values')
        t = cls.__new__(cls)
        t.data = data
        t.requires_grad = requires_grad
        t.grad = None
        return t

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        if self.size != 1:
            raise DimensionError(f'item() requires a single element tensor, got shape {self.shape}')
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def zero_grad(self):
        self.grad = None

    def detach(self) -> Tensor:
        return Tensor._wrap(self.data, requires_grad=False, op_name="detach")

    def __repr__(self):
        return f'Tensor(shape={self.shape}, requires_grad={self.requires_grad})'

    def __add__(self, other):
        from eeg_probe.autodiff.ops import add
        return add(self, other)

    def __radd__(self, other):
        from eeg_probe.autodiff.ops import add
        return add(other, self)

    def __sub__(self, other):
        from eeg_probe.autodiff.ops import sub
        return sub(self, other)

    def __rsub__(self, other):
        from eeg_probe.autodiff.ops import sub
        return sub(other, self)

    def __mul__(self, other):
        from eeg_probe.autodiff.ops import mul
        return mul(self, other)

    def __rmul__(self, other):
        from eeg_probe.autodiff.ops import mul
        return mul(other, self)

    def __neg__(self):
        from eeg_probe.autodiff.ops import scale
        return scale(self, -1.0)

    def __matmul__(self, other):
        from eeg_probe.autodiff.ops import matmul
        return matmul(self, other)


TensorLike = Union[Tensor, float, int, np.ndarray]


@dataclass(frozen=True)
class TapeEntry:
    name: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """
    Define-by-run record of executed ops. Use as context manager; ops executed inside the `with`
    block are appended in execution order, which is a topological order by construction.
    """

    def __init__(self):
        self.entries: List[TapeEntry] = []
        self._produced = set()

    def __enter__(self) -> Tape:
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        stack = _tape_stack()
        assert stack and stack[-1] is self, f'tapes have to be closed in reverse order of opening'
        stack.pop()

    def __len__(self):
        return len(self.entries)

    def produced(self, tensor: Tensor) -> bool:
        return id(tensor) in self._produced

    def record(self, name: str, inputs: Sequence[Tensor], output: Tensor, backward_fn: BackwardFn):
        self.entries.append(TapeEntry(name=name, inputs=tuple(inputs), output=output, backward=backward_fn))
        self._produced.add(id(output))


def _tape_stack() -> List[Tape]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def active_tape() -> Optional[Tape]:
    stack = _tape_stack()
    return stack[-1] if stack else None


def record_op(name: str, inputs: Sequence[Tensor], data: np.ndarray, backward_fn: BackwardFn) -> Tensor:
    requires_grad = any(t.requires_grad for t in inputs)
    out = Tensor._wrap(data, requires_grad=requires_grad, op_name=name)
    tape = active_tape()
    if tape is not None and requires_grad:
        tape.record(name, inputs, out, backward_fn)
    return out


def backward(loss: Tensor, tape: Tape):
    """
    Reverse sweep over `tape` starting at the scalar `loss`. Adjoints of leaves (tensors with
    requires_grad that were not produced by this tape) are added to their `grad` buffers, so
    repeated calls accumulate.
    """
    if loss.size != 1:
        raise DimensionError(f'backward requires a scalar loss, got shape {loss.shape}')
    if not tape.produced(loss):
        raise ContractError(f'loss was not produced by the given tape (detached loss)')

    adjoints = {id(loss): np.ones_like(loss.data)}
    for entry in reversed(tape.entries):
        g = adjoints.pop(id(entry.output), None)
        if g is None:
            continue
        input_grads = entry.backward(g)
        assert len(input_grads) == len(entry.inputs), \
            f'op "{entry.name}" returned {len(input_grads)} adjoints for {len(entry.inputs)} inputs'
        for inp, ig in zip(entry.inputs, input_grads):
            if ig is None or not inp.requires_grad:
                continue
            assert ig.shape == inp.shape, \
                f'op "{entry.name}" returned adjoint of shape {ig.shape} for input of shape {inp.shape}'
            if tape.produced(inp):
                key = id(inp)
                adjoints[key] = adjoints[key] + ig if key in adjoints else ig
            else:
                inp.grad = ig.copy() if inp.grad is None else inp.grad + ig
