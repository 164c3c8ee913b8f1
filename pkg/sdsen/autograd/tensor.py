"""
Dense tensor with reverse-mode automatic differentiation.

A Tensor wraps a numpy array. Every differentiable operation is a Function whose
forward works on raw arrays and whose backward maps the output gradient to one
gradient per input. Calling backward() on a scalar tensor walks the recorded graph
once in reverse topological order and accumulates gradients into the leaves.
"""

import logging
from contextlib import contextmanager
from typing import Any, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import GradientError, ShapeError

logger = logging.getLogger(__name__)

_DTYPES = {"float32": np.float32, "float64": np.float64}
_default_dtype = np.float32

Scalar = Union[int, float]


def get_default_dtype() -> type:
    return _default_dtype


def set_default_dtype(dtype: Union[str, type]) -> None:
    """Switch the global float type used for newly created tensors."""
    global _default_dtype
    if isinstance(dtype, str):
        if dtype not in _DTYPES:
            raise ValueError(f"unsupported dtype {dtype!r}; expected one of {sorted(_DTYPES)}")
        dtype = _DTYPES[dtype]
    _default_dtype = np.dtype(dtype).type


@contextmanager
def precision(dtype: Union[str, type]) -> Iterator[None]:
    """Temporarily change the default dtype, e.g. ``with precision("float64"):``."""
    previous = _default_dtype
    set_default_dtype(dtype)
    try:
        yield
    finally:
        set_default_dtype(previous)


class Function:
    """
    Base class for differentiable operations.

    Subclasses implement forward() on numpy arrays and backward(), which returns one
    gradient (or None) per input tensor, in the order the inputs were given to apply().
    """

    def __init__(self, *tensors: "Tensor"):
        self.tensors = tensors

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no forward")

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError(f"{type(self).__name__} has no backward")

    @classmethod
    def apply(cls, *tensors: "Tensor", **kwargs: Any) -> "Tensor":
        func = cls(*tensors)
        out_data = func.forward(*(t.data for t in tensors), **kwargs)
        requires_grad = any(t.requires_grad for t in tensors)
        return Tensor._from_op(out_data, func if requires_grad else None, requires_grad)

    @property
    def op(self) -> str:
        return type(self).__name__


class Tensor:
    """N-dimensional float array with optional gradient tracking."""

    def __init__(self, data: Any, requires_grad: bool = False, dtype: Optional[type] = None):
        self.data = np.array(data, dtype=dtype or _default_dtype)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.creator: Optional[Function] = None
        self._retain = False

    @classmethod
    def _from_op(
        cls, data: np.ndarray, creator: Optional[Function], requires_grad: bool
    ) -> "Tensor":
        out = cls.__new__(cls)
        out.data = np.asarray(data)
        out.requires_grad = requires_grad
        out.grad = None
        out.creator = creator
        out._retain = False
        return out

    # constructors

    @classmethod
    def zeros(cls, *shape: int, requires_grad: bool = False) -> "Tensor":
        return cls(np.zeros(shape), requires_grad=requires_grad)

    @classmethod
    def ones(cls, *shape: int, requires_grad: bool = False) -> "Tensor":
        return cls(np.ones(shape), requires_grad=requires_grad)

    @classmethod
    def randn(cls, *shape: int, rng: np.random.Generator, requires_grad: bool = False) -> "Tensor":
        return cls(rng.standard_normal(shape), requires_grad=requires_grad)

    # properties

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self.creator is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor._from_op(self.data, None, False)

    def retain_grad(self) -> "Tensor":
        """Keep the gradient of this intermediate tensor after backward()."""
        self._retain = True
        return self

    def zero_grad(self) -> None:
        self.grad = None

    # autograd

    def _topological_order(self) -> list:
        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in visited:
                continue
            if expanded:
                visited.add(id(node))
                order.append(node)
                continue
            stack.append((node, True))
            if node.creator is not None:
                for parent in node.creator.tensors:
                    if parent.requires_grad and id(parent) not in visited:
                        stack.append((parent, False))
        return order

    def _accumulate(self, grad: np.ndarray) -> None:
        if grad.shape != self.shape:
            raise ShapeError("gradient accumulation", grad.shape, self.shape)
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype)
        else:
            self.grad += grad

    def backward(self) -> None:
        """
        Back-propagate from this scalar tensor.

        Gradients are accumulated into .grad of every reachable leaf that requires grad
        (and of intermediates marked with retain_grad()). Repeated calls accumulate.
        """
        if self.data.size != 1:
            raise GradientError(f"backward() needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise GradientError("backward() on a tensor that does not require grad")

        order = self._topological_order()
        pending = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            grad = pending.pop(id(node), None)
            if grad is None:
                continue
            if node.creator is None or node._retain:
                node._accumulate(grad)
            if node.creator is None:
                continue
            input_grads = node.creator.backward(grad)
            for parent, parent_grad in zip(node.creator.tensors, input_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + parent_grad
                else:
                    pending[key] = parent_grad
        logger.debug("backward visited %d nodes", len(order))

    # operators

    def __add__(self, other: Union["Tensor", Scalar]) -> "Tensor":
        if isinstance(other, Tensor):
            return Add.apply(self, other)
        return AddScalar.apply(self, value=float(other))

    def __radd__(self, other: Scalar) -> "Tensor":
        return self + other

    def __sub__(self, other: Union["Tensor", Scalar]) -> "Tensor":
        if isinstance(other, Tensor):
            return Sub.apply(self, other)
        return AddScalar.apply(self, value=-float(other))

    def __rsub__(self, other: Scalar) -> "Tensor":
        return (-self) + other

    def __mul__(self, other: Union["Tensor", Scalar]) -> "Tensor":
        if isinstance(other, Tensor):
            return Mul.apply(self, other)
        return MulScalar.apply(self, value=float(other))

    def __rmul__(self, other: Scalar) -> "Tensor":
        return self * other

    def __truediv__(self, other: Scalar) -> "Tensor":
        return MulScalar.apply(self, value=1.0 / float(other))

    def __neg__(self) -> "Tensor":
        return MulScalar.apply(self, value=-1.0)

    def __getitem__(self, index: Any) -> "Tensor":
        return GetItem.apply(self, index=index)

    def sum(self) -> "Tensor":
        return Sum.apply(self)

    def mean(self) -> "Tensor":
        return Mean.apply(self)

    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Reshape.apply(self, shape=shape)

    def permute(self, *axes: int) -> "Tensor":
        return Permute.apply(self, axes=axes)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"


def _check_same_shape(op: str, a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(op, a.shape, b.shape)


class Add(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        _check_same_shape("add", x, y)
        return x + y

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return grad, grad


class Sub(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        _check_same_shape("sub", x, y)
        return x - y

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return grad, -grad


class Mul(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        _check_same_shape("mul", x, y)
        self.x, self.y = x, y
        return x * y

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return grad * self.y, grad * self.x


class AddScalar(Function):
    def forward(self, x: np.ndarray, value: float) -> np.ndarray:
        return x + x.dtype.type(value)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad,)


class MulScalar(Function):
    def forward(self, x: np.ndarray, value: float) -> np.ndarray:
        self.value = x.dtype.type(value)
        return x * self.value

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * self.value,)


class Sum(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.in_shape = x.shape
        return np.asarray(x.sum(), dtype=x.dtype)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (np.broadcast_to(grad, self.in_shape).copy(),)


class Mean(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.in_shape = x.shape
        self.count = x.size
        return np.asarray(x.mean(), dtype=x.dtype)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (np.broadcast_to(grad / self.count, self.in_shape).astype(grad.dtype),)


class Reshape(Function):
    def forward(self, x: np.ndarray, shape: Sequence[int]) -> np.ndarray:
        self.in_shape = x.shape
        try:
            return x.reshape(shape)
        except ValueError as e:
            raise ShapeError("reshape", x.shape, tuple(shape), str(e)) from e

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad.reshape(self.in_shape),)


class Permute(Function):
    def forward(self, x: np.ndarray, axes: Sequence[int]) -> np.ndarray:
        self.axes = tuple(axes)
        return np.ascontiguousarray(x.transpose(self.axes))

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (np.ascontiguousarray(grad.transpose(np.argsort(self.axes))),)


class GetItem(Function):
    def forward(self, x: np.ndarray, index: Any) -> np.ndarray:
        self.in_shape = x.shape
        self.index = index
        return np.array(x[index])

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        out = np.zeros(self.in_shape, dtype=grad.dtype)
        np.add.at(out, self.index, grad)
        return (out,)
