"""Minimal reverse-mode automatic differentiation over float64 numpy arrays.

Implements exactly the operations the training objectives need (matmul,
broadcast add/sub/mul/div, relu, tanh, exp, log, sqrt, transpose, axis sums)
plus an Adam optimizer. Gradients accumulate into leaf tensors created with
requires_grad=True; everything else is treated as constant.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to the shape of its source operand."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _as_tensor(x) -> "Tensor":
    return x if isinstance(x, Tensor) else Tensor(x)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backprop")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backprop = None

    @property
    def shape(self):
        return self.data.shape

    def _accum(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    @staticmethod
    def _make(data, parents, backprop):
        out = Tensor(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backprop = backprop
        return out

    # arithmetic

    def __add__(self, other):
        a, b = self, _as_tensor(other)
        out = Tensor._make(a.data + b.data, (a, b), None)

        def backprop():
            if a.requires_grad:
                a._accum(_unbroadcast(out.grad, a.data.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(out.grad, b.data.shape))

        out._backprop = backprop
        return out

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self, _as_tensor(other)
        out = Tensor._make(a.data - b.data, (a, b), None)

        def backprop():
            if a.requires_grad:
                a._accum(_unbroadcast(out.grad, a.data.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(-out.grad, b.data.shape))

        out._backprop = backprop
        return out

    def __rsub__(self, other):
        return _as_tensor(other) - self

    def __mul__(self, other):
        a, b = self, _as_tensor(other)
        out = Tensor._make(a.data * b.data, (a, b), None)

        def backprop():
            if a.requires_grad:
                a._accum(_unbroadcast(out.grad * b.data, a.data.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(out.grad * a.data, b.data.shape))

        out._backprop = backprop
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self, _as_tensor(other)
        out = Tensor._make(a.data / b.data, (a, b), None)

        def backprop():
            if a.requires_grad:
                a._accum(_unbroadcast(out.grad / b.data, a.data.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(-out.grad * out.data / b.data, b.data.shape))

        out._backprop = backprop
        return out

    def __neg__(self):
        return self * -1.0

    def __matmul__(self, other):
        a, b = self, _as_tensor(other)
        if a.data.ndim != 2 or b.data.ndim != 2:
            raise ValueError("matmul supports 2-D operands only")
        out = Tensor._make(a.data @ b.data, (a, b), None)

        def backprop():
            if a.requires_grad:
                a._accum(out.grad @ b.data.T)
            if b.requires_grad:
                b._accum(a.data.T @ out.grad)

        out._backprop = backprop
        return out

    # elementwise nonlinearities

    def relu(self):
        a = self
        mask = a.data > 0.0
        out = Tensor._make(np.where(mask, a.data, 0.0), (a,), None)

        def backprop():
            if a.requires_grad:
                a._accum(out.grad * mask)

        out._backprop = backprop
        return out

    def tanh(self):
        a = self
        out = Tensor._make(np.tanh(a.data), (a,), None)

        def backprop():
            if a.requires_grad:
                a._accum(out.grad * (1.0 - out.data * out.data))

        out._backprop = backprop
        return out

    def exp(self):
        a = self
        out = Tensor._make(np.exp(a.data), (a,), None)

        def backprop():
            if a.requires_grad:
                a._accum(out.grad * out.data)

        out._backprop = backprop
        return out

    def log(self):
        a = self
        out = Tensor._make(np.log(a.data), (a,), None)

        def backprop():
            if a.requires_grad:
                a._accum(out.grad / a.data)

        out._backprop = backprop
        return out

    def sqrt(self):
        a = self
        out = Tensor._make(np.sqrt(a.data), (a,), None)

        def backprop():
            if a.requires_grad:
                a._accum(out.grad * 0.5 / out.data)

        out._backprop = backprop
        return out

    # shape ops

    def transpose(self):
        a = self
        out = Tensor._make(a.data.T, (a,), None)

        def backprop():
            if a.requires_grad:
                a._accum(out.grad.T)

        out._backprop = backprop
        return out

    def sum(self, axis=None, keepdims=False):
        a = self
        out = Tensor._make(a.data.sum(axis=axis, keepdims=keepdims), (a,), None)

        def backprop():
            if not a.requires_grad:
                return
            g = out.grad
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            a._accum(np.broadcast_to(g, a.data.shape).copy())

        out._backprop = backprop
        return out

    def backward(self):
        """Backpropagate from a scalar node."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar loss")
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backprop is not None:
                node._backprop()


class Adam:
    """Adaptive-moment gradient descent with bias correction."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for i, p in enumerate(self.params):
            g = p.grad
            if g is None:
                continue
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / c1
            v_hat = self.v[i] / c2
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
