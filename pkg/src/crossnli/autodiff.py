"""Reverse-mode automatic differentiation over numpy arrays.

Every operation records its parents and a vector-Jacobian closure on a
dynamically built graph. ``backward`` walks the graph in reverse
topological order and accumulates gradients into every tensor that has
``requires_grad`` set. Computation is float64 throughout; single-precision
narrowing happens only at checkpoint serialization time.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf

from .errors import LabelError, NumericalError, ShapeError

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)
_LOG_CLAMP = 1e-12

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable graph recording inside the block (inference / frozen teacher)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    """Dense float64 array participating in the recorded computation graph.

    ``grad`` is allocated lazily and always matches ``data`` in shape.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._vjp: Callable[[np.ndarray], tuple] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() on non-scalar tensor of shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar; non-Tensor operands become constants
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __neg__(self):
        return mul(self, Tensor(-1.0))

    def __matmul__(self, other):
        return matmul(self, _as_tensor(other))


def _as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _result(data: np.ndarray, parents: tuple[Tensor, ...], vjp) -> Tensor:
    """Wrap an op result, recording the graph edge only when it matters."""
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._vjp = vjp
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcast gradient back to the original operand shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a: Tensor, b: Tensor) -> Tensor:
    data = a.data + b.data

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(data, (a, b), vjp)


def sub(a: Tensor, b: Tensor) -> Tensor:
    data = a.data - b.data

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result(data, (a, b), vjp)


def mul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data * b.data

    def vjp(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result(data, (a, b), vjp)


def powc(a: Tensor, exponent: float) -> Tensor:
    """Elementwise power with a constant exponent."""
    data = a.data ** exponent

    def vjp(g):
        return (g * exponent * a.data ** (exponent - 1.0),)

    return _result(data, (a,), vjp)


# ---------------------------------------------------------------------------
# linear algebra and shape


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim > 2 or b.data.ndim > 2:
        raise ShapeError("matmul supports 1-D and 2-D operands only")
    data = a.data @ b.data

    def vjp(g):
        if a.data.ndim == 1 and b.data.ndim == 1:
            return g * b.data, g * a.data
        if a.data.ndim == 1:  # (k,) @ (k,n) -> (n,)
            return b.data @ g, np.outer(a.data, g)
        if b.data.ndim == 1:  # (m,k) @ (k,) -> (m,)
            return np.outer(g, b.data), a.data.T @ g
        return g @ b.data.T, a.data.T @ g

    return _result(data, (a, b), vjp)


def transpose(a: Tensor) -> Tensor:
    def vjp(g):
        return (g.T,)

    return _result(a.data.T, (a,), vjp)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    original = a.shape

    def vjp(g):
        return (g.reshape(original),)

    return _result(a.data.reshape(shape), (a,), vjp)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = tuple(tensors)
    if not parts:
        raise ShapeError("concat of zero tensors")
    data = np.concatenate([t.data for t in parts], axis=axis)
    sizes = [t.data.shape[axis] for t in parts]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        return tuple(
            np.take(g, range(offsets[i], offsets[i + 1]), axis=axis)
            for i in range(len(parts))
        )

    return _result(data, parts, vjp)


def take_rows(a: Tensor, indices) -> Tensor:
    """Row gather; backs the embedding lookup and masked pooling."""
    idx = np.asarray(indices, dtype=np.intp)
    data = a.data[idx]

    def vjp(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        return (full,)

    return _result(data, (a,), vjp)


def take_cols(a: Tensor, start: int, stop: int) -> Tensor:
    """Contiguous column slice of a 2-D tensor."""
    if a.data.ndim != 2:
        raise ShapeError(f"take_cols expects a matrix, got shape {a.shape}")
    data = a.data[:, start:stop]

    def vjp(g):
        full = np.zeros_like(a.data)
        full[:, start:stop] = g
        return (full,)

    return _result(data, (a,), vjp)


def sum_(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _result(data, (a,), vjp)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = a.data.size if axis is None else a.data.shape[axis]
    data = a.data.mean(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy() / count,)

    return _result(data, (a,), vjp)


# ---------------------------------------------------------------------------
# nonlinearities and losses


def gelu(x: Tensor) -> Tensor:
    """Exact (erf-based) Gaussian Error Linear Unit."""
    if not np.isfinite(x.data).all():
        raise NumericalError("gelu received non-finite input")
    cdf = 0.5 * (1.0 + erf(x.data * _INV_SQRT2))
    data = x.data * cdf

    def vjp(g):
        pdf = np.exp(-0.5 * x.data * x.data) * _INV_SQRT2PI
        return (g * (cdf + x.data * pdf),)

    return _result(data, (x,), vjp)


def softmax(logits: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable softmax (max subtraction) along ``axis``."""
    if logits.data.size == 0 or logits.data.shape[axis] == 0:
        raise ShapeError("softmax over an empty vector")
    shifted = logits.data - logits.data.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    data = exp / exp.sum(axis=axis, keepdims=True)

    def vjp(g):
        inner = (g * data).sum(axis=axis, keepdims=True)
        return (data * (g - inner),)

    return _result(data, (logits,), vjp)


def mse_loss(a: Tensor, b: Tensor) -> Tensor:
    """Mean over all elements of squared differences."""
    if a.shape != b.shape:
        raise ShapeError(f"mse_loss shape mismatch: {a.shape} vs {b.shape}")
    diff = a.data - b.data
    data = np.asarray((diff * diff).mean())
    scale = 2.0 / a.data.size

    def vjp(g):
        ga = g * scale * diff
        return ga, -ga

    return _result(data, (a, b), vjp)


def cross_entropy(probabilities: Tensor, gold_class: int) -> Tensor:
    """Negative log-likelihood of ``gold_class`` under a probability vector.

    The log argument is clamped at 1e-12; inside the clamped region the
    gradient w.r.t. the probabilities is zero.
    """
    p = probabilities.data
    if p.ndim != 1:
        raise ShapeError(f"cross_entropy expects a 1-D vector, got shape {p.shape}")
    if not 0 <= gold_class < p.shape[0]:
        raise LabelError(f"gold class {gold_class} out of range for {p.shape[0]} classes")
    if abs(p.sum() - 1.0) > 1e-6:
        raise NumericalError(f"probabilities sum to {p.sum():.8f}, not 1")
    clamped = max(float(p[gold_class]), _LOG_CLAMP)
    data = np.asarray(-np.log(clamped))

    def vjp(g):
        gp = np.zeros_like(p)
        if p[gold_class] >= _LOG_CLAMP:
            gp[gold_class] = -float(g) / clamped
        return (gp,)

    return _result(data, (probabilities,), vjp)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Row-wise layer normalization over the last axis with affine output."""
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    data = xhat * gain.data + bias.data
    n = x.data.shape[-1]

    def vjp(g):
        dxhat = g * gain.data
        dx = (
            inv
            / n
            * (n * dxhat - dxhat.sum(axis=-1, keepdims=True) - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True))
        )
        axes = tuple(range(g.ndim - 1))
        dgain = (g * xhat).sum(axis=axes)
        dbias = g.sum(axis=axes)
        return dx, dgain, dbias

    return _result(data, (x, gain, bias), vjp)


# ---------------------------------------------------------------------------
# backward pass


def _toposort(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/dt into ``t.grad`` for every reachable tensor
    with ``requires_grad``. Repeated calls without zeroing accumulate.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward requires a scalar loss, got shape {loss.shape}")
    order = _toposort(loss)
    local: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        g = local.pop(id(node), None)
        if g is None:
            continue
        if node.requires_grad:
            if node.grad is None:
                node.grad = g.copy()
            else:
                node.grad += g
        if node._vjp is None:
            continue
        for parent, pg in zip(node._parents, node._vjp(g)):
            if pg is None:
                continue
            key = id(parent)
            if key in local:
                local[key] += pg
            else:
                local[key] = pg
