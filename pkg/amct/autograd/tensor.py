"""
Dense float64 tensor with reverse-mode automatic differentiation.

Every differentiable op records a TapeNode on its output holding the inputs and
a backward closure over the intermediates it saved. `Tensor.backward()` walks
the recorded DAG once in reverse topological order, accumulates gradients into
leaf tensors and then marks the nodes consumed, so a second backward through
the same graph raises TapeConsumed.

Graphs are owned by the thread that builds them; `no_grad()` is thread-local.
"""

import threading
from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import NonFinite, NotScalar, TapeConsumed, TensorError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]
ArrayLike = Union[np.ndarray, float, int, Sequence]

_grad_state = threading.local()


def is_grad_enabled() -> bool:
    """Whether ops on this thread record tape nodes."""
    return getattr(_grad_state, "enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording on the current thread."""
    previous = is_grad_enabled()
    _grad_state.enabled = False
    try:
        yield
    finally:
        _grad_state.enabled = previous


class TapeNode:
    """
    Record of one differentiable op.

    Attributes:
        op: Op name
        inputs: Input tensors, in argument order
        backward_fn: Maps the output gradient to one gradient per input
        consumed: Set once backward has passed through the node
    """

    __slots__ = ("op", "inputs", "backward_fn", "consumed")

    def __init__(self, op: str, inputs: Tuple["Tensor", ...], backward_fn: BackwardFn):
        self.op = op
        self.inputs = inputs
        self.backward_fn: Optional[BackwardFn] = backward_fn
        self.consumed = False

    def __repr__(self) -> str:
        return f"<TapeNode(op='{self.op}', inputs={len(self.inputs)}, consumed={self.consumed})>"


class Tensor:
    """
    Row-major float64 array with optional gradient tracking.

    Attributes:
        data: Values
        requires_grad: Whether gradients flow to this tensor
        grad: Accumulated gradient (leaves only), same shape as data
        node: TapeNode of the op that produced this tensor, None for leaves
        name: Optional parameter name
    """

    __array_priority__ = 100

    def __init__(self, data: ArrayLike, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.node: Optional[TapeNode] = None
        self.name = name

    @classmethod
    def _wrap(cls, data: np.ndarray, requires_grad: bool) -> "Tensor":
        tensor = cls.__new__(cls)
        tensor.data = data
        tensor.requires_grad = requires_grad
        tensor.grad = None
        tensor.node = None
        tensor.name = None
        return tensor

    def __repr__(self) -> str:
        label = f", name='{self.name}'" if self.name else ""
        return f"<Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})>"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.data.size != 1:
            raise NotScalar(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        """A copy of the values."""
        return self.data.copy()

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """
        Populate `grad` of every requires_grad leaf reachable from this scalar.

        Raises:
            NotScalar: If this tensor has more than one element
            TapeConsumed: If backward already ran through any node of the graph
            TensorError: If this tensor is not on a tape
        """
        if self.data.size != 1:
            raise NotScalar(f"backward() needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise TensorError("backward() called on a tensor that is not on the tape")

        order = _topological_order(self)
        for tensor in order:
            if tensor.node is not None and tensor.node.consumed:
                raise TapeConsumed(f"graph already consumed at op '{tensor.node.op}'")

        grads = {id(self): np.ones_like(self.data)}
        for tensor in reversed(order):
            grad = grads.pop(id(tensor), None)
            node = tensor.node
            if node is None:
                if grad is not None:
                    tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
                continue
            if grad is not None:
                for source, source_grad in zip(node.inputs, node.backward_fn(grad)):
                    if source_grad is None or not source.requires_grad:
                        continue
                    key = id(source)
                    grads[key] = source_grad if key not in grads else grads[key] + source_grad
            node.consumed = True
            node.backward_fn = None

    # Operator sugar; the implementations live in ops.

    def __add__(self, other: ArrayLike) -> "Tensor":
        return _ops.add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return _ops.add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return _ops.sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return _ops.sub(other, self)

    def __neg__(self) -> "Tensor":
        return _ops.scale(self, -1.0)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        if isinstance(other, (int, float)):
            return _ops.scale(self, float(other))
        return _ops.elementwise_mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return self.__mul__(other)

    def __truediv__(self, other: float) -> "Tensor":
        if not isinstance(other, (int, float)):
            raise TensorError("tensors can only be divided by Python scalars")
        return _ops.scale(self, 1.0 / float(other))

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return _ops.matmul(self, other)

    @property
    def T(self) -> "Tensor":
        return _ops.transpose(self)


def as_tensor(value: Union["Tensor", ArrayLike]) -> Tensor:
    """Wrap constants as non-tracking tensors; tensors pass through."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def record(op: str, data: np.ndarray, inputs: Sequence[Tensor], backward_fn: BackwardFn) -> Tensor:
    """
    Wrap an op result, checking finiteness and recording a tape node.

    Raises:
        NonFinite: If any value is NaN or Inf
    """
    if not np.all(np.isfinite(data)):
        raise NonFinite(f"op '{op}' produced non-finite values")
    requires_grad = is_grad_enabled() and any(t.requires_grad for t in inputs)
    out = Tensor._wrap(np.asarray(data, dtype=np.float64), requires_grad)
    if requires_grad:
        out.node = TapeNode(op, tuple(inputs), backward_fn)
    return out


def _topological_order(root: Tensor) -> List[Tensor]:
    """Post-order over tracked tensors: inputs before the ops that use them."""
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        tensor, expanded = stack.pop()
        if expanded:
            order.append(tensor)
            continue
        if id(tensor) in visited:
            continue
        visited.add(id(tensor))
        stack.append((tensor, True))
        if tensor.node is not None:
            for source in tensor.node.inputs:
                if source.requires_grad and id(source) not in visited:
                    stack.append((source, False))
    return order


from . import ops as _ops  # noqa: E402
