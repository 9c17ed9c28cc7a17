"""Dense tensors with reverse-mode differentiation.

A :class:`Tensor` wraps a numpy array and records, for every operation that
produced it, a closure computing the gradients of its parents.  Calling
:meth:`Tensor.backward` on a scalar loss walks the graph in reverse
topological order and accumulates gradients into ``.grad`` (plain numpy
arrays) of every reachable tensor with ``requires_grad``.

Broadcasting rule: elementwise ops follow numpy's right-aligned broadcasting
where the lower-rank (or size-1-axis) operand may expand; anything else
raises :class:`ShapeMismatch`.  Gradients of broadcast operands are summed
back to the original shape.

Every operation checks its output for NaN/Inf and raises
:class:`NumericFailure` naming the offending op.
"""

from __future__ import annotations

from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import InvalidRate, NonScalarLoss, NumericFailure, ShapeMismatch

Arrayish = Union["Tensor", np.ndarray, float, int, list]


def _check_finite(data: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(data)):
        raise NumericFailure(op, "non-finite value in output")


def _broadcastable(sa: tuple, sb: tuple) -> bool:
    for da, db in zip(reversed(sa), reversed(sb)):
        if da != db and da != 1 and db != 1:
            return False
    return True


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    keep = tuple(i for i, d in enumerate(shape) if d == 1 and grad.shape[i] != 1)
    if keep:
        grad = grad.sum(axis=keep, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """N-dimensional array node in a reverse-mode computation graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_op")

    def __init__(
        self,
        data: Arrayish,
        requires_grad: bool = False,
        dtype: Optional[np.dtype] = None,
        _parents: tuple = (),
        _backward: Optional[Callable[[np.ndarray], None]] = None,
        _op: str = "leaf",
    ):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        _check_finite(arr, _op)
        self.data = arr
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward
        self._op = _op

    # -- basic introspection ------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self._op}, requires_grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    # -- graph machinery ----------------------------------------------------

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self) -> None:
        """Reverse-mode accumulation from this scalar into all reachable leaves."""
        if self.size != 1:
            raise NonScalarLoss(f"backward() needs a scalar, got shape {self.shape}")
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in visited:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- operators ------------------------------------------------------------

    def __add__(self, other: Arrayish) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: Arrayish) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: Arrayish) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: Arrayish) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: Arrayish) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: Arrayish) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: Arrayish) -> "Tensor":
        return div(self, other)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __matmul__(self, other: Arrayish) -> "Tensor":
        return matmul(self, other)

    def __getitem__(self, key) -> "Tensor":
        return take(self, key)


def as_tensor(x: Arrayish) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(
    data: np.ndarray,
    parents: Sequence[Tensor],
    backward: Optional[Callable[[np.ndarray], None]],
    op: str,
) -> Tensor:
    _check_finite(data, op)
    requires = any(p.requires_grad for p in parents)
    return Tensor(
        data,
        requires_grad=requires,
        _parents=tuple(parents) if requires else (),
        _backward=backward if requires else None,
        _op=op,
    )


# -- elementwise arithmetic ---------------------------------------------------


def _elementwise(a: Arrayish, b: Arrayish, op: str, fwd, da_fn, db_fn) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if not _broadcastable(a.shape, b.shape):
        raise ShapeMismatch(f"{op}: shapes {a.shape} and {b.shape} are not broadcastable")
    out_data = fwd(a.data, b.data)

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(da_fn(g, a.data, b.data), a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(db_fn(g, a.data, b.data), b.shape))

    return _make(out_data, (a, b), backward, op)


def add(a: Arrayish, b: Arrayish) -> Tensor:
    return _elementwise(a, b, "add", lambda x, y: x + y, lambda g, x, y: g, lambda g, x, y: g)


def sub(a: Arrayish, b: Arrayish) -> Tensor:
    return _elementwise(a, b, "sub", lambda x, y: x - y, lambda g, x, y: g, lambda g, x, y: -g)


def mul(a: Arrayish, b: Arrayish) -> Tensor:
    return _elementwise(a, b, "mul", lambda x, y: x * y, lambda g, x, y: g * y, lambda g, x, y: g * x)


def div(a: Arrayish, b: Arrayish) -> Tensor:
    return _elementwise(
        a, b, "div", lambda x, y: x / y, lambda g, x, y: g / y, lambda g, x, y: -g * x / (y * y)
    )


def neg(a: Arrayish) -> Tensor:
    a = as_tensor(a)

    def backward(g: np.ndarray) -> None:
        a._accumulate(-g)

    return _make(-a.data, (a,), backward, "neg")


# -- linear algebra -----------------------------------------------------------


def matmul(a: Arrayish, b: Arrayish) -> Tensor:
    """Matrix product with numpy batch semantics; operands must be >= 2-D."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatch(f"matmul needs >=2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"matmul inner dims differ: {a.shape} @ {b.shape}")
    if not _broadcastable(a.shape[:-2], b.shape[:-2]):
        raise ShapeMismatch(f"matmul batch dims differ: {a.shape} @ {b.shape}")
    out_data = a.data @ b.data

    def _swap(x: np.ndarray) -> np.ndarray:
        return np.swapaxes(x, -1, -2)

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(g @ _swap(b.data), a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(_swap(a.data) @ g, b.shape))

    return _make(out_data, (a, b), backward, "matmul")


# -- shape manipulation ---------------------------------------------------------


def reshape(a: Arrayish, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    shape = tuple(shape)
    try:
        out_data = a.data.reshape(shape)
    except ValueError as exc:
        raise ShapeMismatch(f"cannot reshape {a.shape} to {shape}") from exc

    def backward(g: np.ndarray) -> None:
        a._accumulate(g.reshape(a.shape))

    return _make(out_data, (a,), backward, "reshape")


def transpose(a: Arrayish, axes: Optional[Sequence[int]] = None) -> Tensor:
    a = as_tensor(a)
    out_data = np.transpose(a.data, axes)
    inv = None if axes is None else np.argsort(axes)

    def backward(g: np.ndarray) -> None:
        a._accumulate(np.transpose(g, inv))

    return _make(out_data, (a,), backward, "transpose")


def concat(tensors: Iterable[Arrayish], axis: int = 0) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    if not parts:
        raise ShapeMismatch("concat of zero tensors")
    try:
        out_data = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as exc:
        raise ShapeMismatch(str(exc)) from exc
    sizes = [p.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def backward(g: np.ndarray) -> None:
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(lo, hi)
                p._accumulate(g[tuple(idx)])

    return _make(out_data, parts, backward, "concat")


def take(a: Arrayish, key) -> Tensor:
    """Basic slicing/indexing; the backward pass scatters into a zero array."""
    a = as_tensor(a)
    out_data = a.data[key]

    def backward(g: np.ndarray) -> None:
        full = np.zeros_like(a.data)
        np.add.at(full, key, g)
        a._accumulate(full)

    return _make(out_data, (a,), backward, "slice")


def gather_rows(table: Arrayish, ids: np.ndarray) -> Tensor:
    """Embedding lookup: rows of `table` selected by an integer id array."""
    table = as_tensor(table)
    if table.ndim != 2:
        raise ShapeMismatch(f"gather_rows needs a 2-D table, got {table.shape}")
    ids = np.asarray(ids)
    if ids.min(initial=0) < 0 or ids.max(initial=0) >= table.shape[0]:
        raise ShapeMismatch("gather_rows: id out of range")
    out_data = table.data[ids]

    def backward(g: np.ndarray) -> None:
        full = np.zeros_like(table.data)
        np.add.at(full, ids.reshape(-1), g.reshape(-1, table.shape[1]))
        table._accumulate(full)

    return _make(out_data, (table,), backward, "gather_rows")


# -- reductions -----------------------------------------------------------------


def reduce_sum(a: Arrayish, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g: np.ndarray) -> None:
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.shape).copy())
        else:
            g_exp = g if keepdims else np.expand_dims(g, axis)
            a._accumulate(np.broadcast_to(g_exp, a.shape).copy())

    return _make(out_data, (a,), backward, "reduce_sum")


def reduce_mean(a: Arrayish, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.mean(axis=axis, keepdims=keepdims)
    denom = a.size if axis is None else a.shape[axis]

    def backward(g: np.ndarray) -> None:
        if axis is None:
            a._accumulate(np.broadcast_to(g / denom, a.shape).copy())
        else:
            g_exp = g if keepdims else np.expand_dims(g, axis)
            a._accumulate(np.broadcast_to(g_exp / denom, a.shape).copy())

    return _make(out_data, (a,), backward, "reduce_mean")


# -- nonlinearities ----------------------------------------------------------------


def relu(a: Arrayish) -> Tensor:
    a = as_tensor(a)
    out_data = np.maximum(a.data, 0)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * (a.data > 0))

    return _make(out_data, (a,), backward, "relu")


def tanh(a: Arrayish) -> Tensor:
    a = as_tensor(a)
    out_data = np.tanh(a.data)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * (1.0 - out_data * out_data))

    return _make(out_data, (a,), backward, "tanh")


def sigmoid(a: Arrayish) -> Tensor:
    a = as_tensor(a)
    out_data = 1.0 / (1.0 + np.exp(-a.data))

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * out_data * (1.0 - out_data))

    return _make(out_data, (a,), backward, "sigmoid")


def exp(a: Arrayish) -> Tensor:
    a = as_tensor(a)
    out_data = np.exp(a.data)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * out_data)

    return _make(out_data, (a,), backward, "exp")


def log(a: Arrayish) -> Tensor:
    a = as_tensor(a)
    out_data = np.log(a.data)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g / a.data)

    return _make(out_data, (a,), backward, "log")


def clip(a: Arrayish, lo: float, hi: float) -> Tensor:
    """Clamp values; gradient passes through only where no clipping occurred."""
    a = as_tensor(a)
    out_data = np.clip(a.data, lo, hi)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * ((a.data >= lo) & (a.data <= hi)))

    return _make(out_data, (a,), backward, "clip")


def softmax(a: Arrayish, axis: int = -1) -> Tensor:
    """Numerically stable softmax: the axis max is subtracted before exp."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward(g: np.ndarray) -> None:
        dot = (g * out_data).sum(axis=axis, keepdims=True)
        a._accumulate((g - dot) * out_data)

    return _make(out_data, (a,), backward, "softmax")


def dropout(a: Arrayish, rate: float, training: bool, rng: Optional[np.random.Generator] = None) -> Tensor:
    """Inverted dropout: survivors are scaled by 1/(1-rate) at training time."""
    if not 0.0 <= rate < 1.0:
        raise InvalidRate(f"dropout rate must be in [0, 1), got {rate}")
    a = as_tensor(a)
    if not training or rate == 0.0:
        return a
    if rng is None:
        rng = np.random.default_rng()
    keep = (rng.random(a.shape) >= rate).astype(a.data.dtype)
    scale = 1.0 / (1.0 - rate)
    out_data = a.data * keep * scale

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * keep * scale)

    return _make(out_data, (a,), backward, "dropout")
