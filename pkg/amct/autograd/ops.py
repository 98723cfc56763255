"""
Differentiable ops.

Each op computes its forward value with numpy, closes over whatever it needs
for the backward rule, and hands both to `record`. Batched variants operate on
the last one or two axes so the same op serves (n, d) and (B, n, d) inputs.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import IndexOutOfRange, MaskAllFalse, ShapeMismatch, TensorError
from .tensor import ArrayLike, Tensor, as_tensor, record

KL_EPSILON = 1e-12

Operand = Union[Tensor, ArrayLike]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(op: str, *shapes: Tuple[int, ...]) -> Tuple[int, ...]:
    try:
        return tuple(np.broadcast_shapes(*shapes))
    except ValueError as exc:
        raise ShapeMismatch(f"{op}: cannot broadcast shapes {list(shapes)}") from exc


def _full_mask(op: str, mask: ArrayLike, shape: Tuple[int, ...]) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.dtype != np.bool_:
        raise TensorError(f"{op}: mask must be boolean, got {mask.dtype}")
    try:
        return np.broadcast_to(mask, shape)
    except ValueError as exc:
        raise ShapeMismatch(f"{op}: mask shape {mask.shape} does not match {shape}") from exc


# Elementwise arithmetic

def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a.shape, b.shape)

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return record("add", a.data + b.data, (a, b), backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a.shape, b.shape)

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return record("sub", a.data - b.data, (a, b), backward)


def scale(a: Operand, factor: float) -> Tensor:
    a = as_tensor(a)
    factor = float(factor)
    return record("scale", a.data * factor, (a,), lambda grad: (grad * factor,))


def elementwise_mul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("elementwise_mul", a.shape, b.shape)

    def backward(grad):
        return _unbroadcast(grad * b.data, a.shape), _unbroadcast(grad * a.data, b.shape)

    return record("elementwise_mul", a.data * b.data, (a, b), backward)


def relu(a: Operand) -> Tensor:
    a = as_tensor(a)
    active = a.data > 0
    return record("relu", np.where(active, a.data, 0.0), (a,), lambda grad: (grad * active,))


def log(a: Operand) -> Tensor:
    a = as_tensor(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(a.data)
    return record("log", out, (a,), lambda grad: (grad / a.data,))


def exp(a: Operand) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        out = np.exp(a.data)
    return record("exp", out, (a,), lambda grad: (grad * out,))


# Shape manipulation

def matmul(a: Operand, b: Operand) -> Tensor:
    """Batched matrix product over the last two axes; leading axes broadcast."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatch(f"matmul needs at least 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"matmul: inner dimensions differ, {a.shape} @ {b.shape}")
    _check_broadcast("matmul", a.shape[:-2], b.shape[:-2])

    def backward(grad):
        grad_a = np.matmul(grad, np.swapaxes(b.data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), grad)
        return _unbroadcast(grad_a, a.shape), _unbroadcast(grad_b, b.shape)

    return record("matmul", np.matmul(a.data, b.data), (a, b), backward)


def transpose(a: Operand) -> Tensor:
    """Swap the last two axes."""
    a = as_tensor(a)
    if a.ndim < 2:
        raise ShapeMismatch(f"transpose needs at least 2-D input, got {a.shape}")
    return record(
        "transpose",
        np.swapaxes(a.data, -1, -2),
        (a,),
        lambda grad: (np.swapaxes(grad, -1, -2),),
    )


def reshape(a: Operand, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    try:
        out = a.data.reshape(tuple(shape))
    except ValueError as exc:
        raise ShapeMismatch(f"reshape: cannot view {a.shape} as {tuple(shape)}") from exc
    return record("reshape", out, (a,), lambda grad: (grad.reshape(a.shape),))


def broadcast_to(a: Operand, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    shape = tuple(shape)
    try:
        out = np.broadcast_to(a.data, shape).copy()
    except ValueError as exc:
        raise ShapeMismatch(f"broadcast_to: cannot broadcast {a.shape} to {shape}") from exc
    return record("broadcast_to", out, (a,), lambda grad: (_unbroadcast(grad, a.shape),))


def concat(tensors: Sequence[Operand], axis: int) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise TensorError("concat needs at least one tensor")
    ndim = tensors[0].ndim
    axis = axis % ndim if ndim else 0
    reference = tensors[0].shape[:axis] + tensors[0].shape[axis + 1:]
    for tensor in tensors[1:]:
        if tensor.ndim != ndim or tensor.shape[:axis] + tensor.shape[axis + 1:] != reference:
            raise ShapeMismatch(f"concat along axis {axis}: {tensors[0].shape} vs {tensor.shape}")
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(grad):
        return tuple(np.split(grad, splits, axis=axis))

    return record("concat", np.concatenate([t.data for t in tensors], axis=axis), tensors, backward)


def row_concat(tensors: Sequence[Operand]) -> Tensor:
    return concat(tensors, axis=-2)


def col_concat(tensors: Sequence[Operand]) -> Tensor:
    return concat(tensors, axis=-1)


def embedding_lookup(table: Tensor, indices: ArrayLike) -> Tensor:
    """
    Gather rows of a 2-D table; the output has shape indices.shape + (d,).

    Raises:
        IndexOutOfRange: If an index falls outside the table
    """
    index = np.asarray(indices)
    if table.ndim != 2:
        raise ShapeMismatch(f"embedding table must be 2-D, got {table.shape}")
    if not np.issubdtype(index.dtype, np.integer):
        raise TensorError(f"embedding indices must be integers, got {index.dtype}")
    if index.size and (index.min() < 0 or index.max() >= table.shape[0]):
        raise IndexOutOfRange(
            f"embedding index range [{index.min()}, {index.max()}] outside table of {table.shape[0]} rows"
        )

    def backward(grad):
        table_grad = np.zeros_like(table.data)
        np.add.at(table_grad, index, grad)
        return (table_grad,)

    return record("embedding_lookup", table.data[index], (table,), backward)


# Reductions

def reduce_sum(a: Operand, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)

    def backward(grad):
        if axis is not None and not keepdims:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, a.shape).copy(),)

    return record("sum", a.data.sum(axis=axis, keepdims=keepdims), (a,), backward)


def row_sum(a: Operand) -> Tensor:
    """Sum over rows (axis -2): (..., n, d) -> (..., d)."""
    return reduce_sum(a, axis=-2)


def masked_row_sum(a: Operand, mask: ArrayLike) -> Tensor:
    """Sum over rows whose mask entry is True; mask has shape a.shape[:-1]."""
    a = as_tensor(a)
    if a.ndim < 2:
        raise ShapeMismatch(f"masked_row_sum needs at least 2-D input, got {a.shape}")
    weights = _full_mask("masked_row_sum", mask, a.shape[:-1]).astype(np.float64)[..., None]

    def backward(grad):
        return (np.broadcast_to(np.expand_dims(grad, -2) * weights, a.shape).copy(),)

    return record("masked_row_sum", (a.data * weights).sum(axis=-2), (a,), backward)


def mean(a: Operand) -> Tensor:
    a = as_tensor(a)
    if a.size == 0:
        raise TensorError("mean of an empty tensor")
    count = a.size
    return record("mean", np.asarray(a.data.mean()), (a,), lambda grad: (np.full(a.shape, grad / count),))


def logsumexp(a: Operand, mask: Optional[ArrayLike] = None) -> Tensor:
    """Stable log-sum-exp over the last axis, optionally over masked entries only."""
    a = as_tensor(a)
    full = np.ones(a.shape, dtype=bool) if mask is None else _full_mask("logsumexp", mask, a.shape)
    if not full.any(axis=-1).all():
        raise MaskAllFalse("logsumexp: a row has no unmasked entries")
    masked = np.where(full, a.data, -np.inf)
    peak = masked.max(axis=-1, keepdims=True)
    shifted = np.exp(masked - peak)
    total = shifted.sum(axis=-1, keepdims=True)
    weights = shifted / total

    def backward(grad):
        return (np.expand_dims(grad, -1) * weights,)

    return record("logsumexp", (peak + np.log(total))[..., 0], (a,), backward)


# Normalization and attention

def row_softmax(a: Operand) -> Tensor:
    a = as_tensor(a)
    shifted = np.exp(a.data - a.data.max(axis=-1, keepdims=True))
    probs = shifted / shifted.sum(axis=-1, keepdims=True)

    def backward(grad):
        return (probs * (grad - (grad * probs).sum(axis=-1, keepdims=True)),)

    return record("row_softmax", probs, (a,), backward)


def masked_row_softmax(a: Operand, mask: ArrayLike) -> Tensor:
    """
    Softmax over the last axis restricted to unmasked entries.

    Masked entries get exactly zero probability and zero gradient.

    Raises:
        MaskAllFalse: If any row has no unmasked entry
    """
    a = as_tensor(a)
    full = _full_mask("masked_row_softmax", mask, a.shape)
    if not full.any(axis=-1).all():
        raise MaskAllFalse("masked_row_softmax: a row has no unmasked entries")
    masked = np.where(full, a.data, -np.inf)
    shifted = np.exp(masked - masked.max(axis=-1, keepdims=True))
    probs = shifted / shifted.sum(axis=-1, keepdims=True)

    def backward(grad):
        return (probs * (grad - (grad * probs).sum(axis=-1, keepdims=True)),)

    return record("masked_row_softmax", probs, (a,), backward)


def layer_norm(x: Operand, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then apply the per-feature affine map."""
    x = as_tensor(x)
    width = x.shape[-1]
    if gamma.shape != (width,) or beta.shape != (width,):
        raise ShapeMismatch(f"layer_norm: gain {gamma.shape} / bias {beta.shape} vs width {width}")
    centered = x.data - x.data.mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered ** 2).mean(axis=-1, keepdims=True) + eps)
    normalized = centered * inv_std

    def backward(grad):
        grad_norm = grad * gamma.data
        grad_x = (inv_std / width) * (
            width * grad_norm
            - grad_norm.sum(axis=-1, keepdims=True)
            - normalized * (grad_norm * normalized).sum(axis=-1, keepdims=True)
        )
        return grad_x, _unbroadcast(grad * normalized, gamma.shape), _unbroadcast(grad, beta.shape)

    return record("layer_norm", normalized * gamma.data + beta.data, (x, gamma, beta), backward)


def dropout(x: Tensor, rate: float, rng: np.random.Generator, training: bool = True) -> Tensor:
    """Inverted dropout; identity when not training."""
    if not training or rate <= 0.0:
        return x
    keep = rng.random(x.shape) >= rate
    return elementwise_mul(x, Tensor(keep / (1.0 - rate)))


# Losses

def squared_error(prediction: Operand, target: Operand) -> Tensor:
    """Elementwise (prediction - target)^2."""
    prediction, target = as_tensor(prediction), as_tensor(target)
    _check_broadcast("squared_error", prediction.shape, target.shape)
    diff = prediction.data - target.data

    def backward(grad):
        return _unbroadcast(2.0 * diff * grad, prediction.shape), _unbroadcast(-2.0 * diff * grad, target.shape)

    return record("squared_error", diff ** 2, (prediction, target), backward)


def cross_entropy_with_logits(logits: Operand, targets: ArrayLike) -> Tensor:
    """Elementwise binary cross-entropy of sigmoid(logits) against 0/1 targets."""
    logits = as_tensor(logits)
    labels = np.asarray(targets, dtype=np.float64)
    if labels.shape != logits.shape:
        raise ShapeMismatch(f"cross_entropy_with_logits: logits {logits.shape} vs targets {labels.shape}")
    x = logits.data
    decay = np.exp(-np.abs(x))
    out = np.maximum(x, 0.0) - x * labels + np.log1p(decay)
    probs = np.where(x >= 0, 1.0 / (1.0 + decay), decay / (1.0 + decay))

    def backward(grad):
        return ((probs - labels) * grad,)

    return record("cross_entropy_with_logits", out, (logits,), backward)


def kl_divergence(p: Operand, q: Operand) -> Tensor:
    """
    Row-wise sum p * (log p - log q) over the last axis.

    Both arguments receive gradients; log inputs are clamped at KL_EPSILON.
    """
    p, q = as_tensor(p), as_tensor(q)
    if p.shape != q.shape:
        raise ShapeMismatch(f"kl_divergence: {p.shape} vs {q.shape}")
    log_p = np.log(np.maximum(p.data, KL_EPSILON))
    log_q = np.log(np.maximum(q.data, KL_EPSILON))

    def backward(grad):
        row_grad = np.expand_dims(grad, -1)
        grad_p = row_grad * (log_p - log_q + (p.data > KL_EPSILON))
        grad_q = row_grad * np.where(q.data > KL_EPSILON, -p.data / np.maximum(q.data, KL_EPSILON), 0.0)
        return grad_p, grad_q

    return record("kl_divergence", (p.data * (log_p - log_q)).sum(axis=-1), (p, q), backward)
