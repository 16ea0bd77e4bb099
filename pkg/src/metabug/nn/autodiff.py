"""Reverse-mode automatic differentiation over numpy arrays.

A `Tensor` wraps a float64 ndarray plus the closure that routes gradients to
its parents.  `backward()` walks the graph once in reverse topological
order.  Shapes follow numpy broadcasting; gradients are summed back down to
the parent's shape.  Every tensor construction checks for NaN/inf and raises
`NonFinite` at the op that produced it, so numerical blowups fail loudly at
their source instead of surfacing later as a garbage loss.
"""

from __future__ import annotations

import numpy as np


class NonFinite(FloatingPointError):
    """A forward computation produced NaN or infinity."""


def _check(data: np.ndarray, op: str) -> np.ndarray:
    if not np.all(np.isfinite(data)):
        raise NonFinite(f"non-finite values out of {op}")
    return data


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, dim in enumerate(shape):
        if dim == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp", "name")

    def __init__(self, data, requires_grad: bool = False,
                 parents: tuple = (), vjp=None, op: str = "leaf", name: str = ""):
        self.data = _check(np.asarray(data, dtype=np.float64), op)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._vjp = vjp  # grad_out -> tuple of parent grads
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self) -> str:
        tag = self.name or "tensor"
        return f"<{tag} {self.data.shape}{' grad' if self.requires_grad else ''}>"

    # --- graph walk -----------------------------------------------------

    def backward(self, grad: np.ndarray | None = None) -> None:
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a seed needs a scalar output")
            grad = np.ones_like(self.data)
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad:
                    stack.append((p, False))
        grads: dict[int, np.ndarray] = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._vjp is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for p, pg in zip(node._parents, node._vjp(g)):
                if not p.requires_grad or pg is None:
                    continue
                gid = id(p)
                grads[gid] = grads[gid] + pg if gid in grads else pg

    def zero_grad(self) -> None:
        self.grad = None

    # --- arithmetic -------------------------------------------------------

    def __add__(self, other: "Tensor") -> "Tensor":
        a, b = self, other
        return Tensor(
            a.data + b.data, parents=(a, b), op="add",
            vjp=lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
        )

    def __sub__(self, other: "Tensor") -> "Tensor":
        a, b = self, other
        return Tensor(
            a.data - b.data, parents=(a, b), op="sub",
            vjp=lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
        )

    def __mul__(self, other: "Tensor") -> "Tensor":
        a, b = self, other
        return Tensor(
            a.data * b.data, parents=(a, b), op="mul",
            vjp=lambda g: (
                _unbroadcast(g * b.data, a.shape),
                _unbroadcast(g * a.data, b.shape),
            ),
        )

    def __neg__(self) -> "Tensor":
        a = self
        return Tensor(-a.data, parents=(a,), op="neg", vjp=lambda g: (-g,))

    def __matmul__(self, other: "Tensor") -> "Tensor":
        a, b = self, other
        return Tensor(
            a.data @ b.data, parents=(a, b), op="matmul",
            vjp=lambda g: (g @ b.data.T, a.data.T @ g),
        )

    def transpose(self) -> "Tensor":
        a = self
        return Tensor(a.data.T, parents=(a,), op="transpose", vjp=lambda g: (g.T,))

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def reshape(self, *shape: int) -> "Tensor":
        a = self
        old = a.shape
        return Tensor(
            a.data.reshape(*shape), parents=(a,), op="reshape",
            vjp=lambda g: (g.reshape(old),),
        )

    def sum(self, axis: int | None = None, keepdims: bool = False) -> "Tensor":
        a = self
        out = a.data.sum(axis=axis, keepdims=keepdims)

        def vjp(g):
            if axis is None:
                return (np.broadcast_to(g, a.shape).copy(),)
            gg = g if keepdims else np.expand_dims(g, axis)
            return (np.broadcast_to(gg, a.shape).copy(),)

        return Tensor(out, parents=(a,), op="sum", vjp=vjp)

    # --- nonlinearities ---------------------------------------------------

    def relu(self) -> "Tensor":
        a = self
        mask = a.data > 0
        return Tensor(a.data * mask, parents=(a,), op="relu", vjp=lambda g: (g * mask,))

    def sigmoid(self) -> "Tensor":
        a = self
        out = 1.0 / (1.0 + np.exp(-a.data))
        return Tensor(out, parents=(a,), op="sigmoid", vjp=lambda g: (g * out * (1 - out),))

    def tanh(self) -> "Tensor":
        a = self
        out = np.tanh(a.data)
        return Tensor(out, parents=(a,), op="tanh", vjp=lambda g: (g * (1 - out * out),))

    def softmax_rows(self) -> "Tensor":
        """Softmax along the last axis of a 2-d tensor."""
        a = self
        shifted = a.data - a.data.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        out = e / e.sum(axis=-1, keepdims=True)

        def vjp(g):
            dot = (g * out).sum(axis=-1, keepdims=True)
            return ((g - dot) * out,)

        return Tensor(out, parents=(a,), op="softmax", vjp=vjp)


def const(data, name: str = "") -> Tensor:
    return Tensor(data, requires_grad=False, name=name)


def param(data, name: str = "") -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


def concat(tensors: list[Tensor], axis: int = 0) -> Tensor:
    datas = [t.data for t in tensors]
    sizes = [d.shape[axis] for d in datas]

    def vjp(g):
        return tuple(np.split(g, np.cumsum(sizes)[:-1], axis=axis))

    return Tensor(
        np.concatenate(datas, axis=axis), parents=tuple(tensors), op="concat", vjp=vjp,
    )


def gather_rows(table: Tensor, idx: np.ndarray) -> Tensor:
    """Rows `idx` of `table` — an embedding lookup."""
    idx = np.asarray(idx, dtype=np.int64)

    def vjp(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx, g)
        return (gt,)

    return Tensor(table.data[idx], parents=(table,), op="gather", vjp=vjp)


def sqnorm_rows(x: Tensor) -> Tensor:
    """Squared euclidean norm of each row: (n, d) -> (n, 1)."""
    return (x * x).sum(axis=1, keepdims=True)
