"""Minimal reverse-mode automatic differentiation over numpy arrays.

Every operation on a :class:`Var` is appended to the :class:`Tape` that owns
its operands. ``Tape.backward`` walks the recorded nodes in reverse creation
order and accumulates vector-Jacobian products, so the gradient of a scalar
with respect to any leaf is exact up to floating-point rounding.

Only the handful of operations needed by the network and the energy
functionals are provided. Plain ndarrays and Python scalars are treated as
constants wherever a Var is accepted.
"""
from __future__ import annotations

import numpy as np


class Tape:
    """Ordered record of Var nodes. One tape per gradient evaluation."""

    def __init__(self):
        self.nodes = []
        # (points, outputs) pairs logged by network evaluations, used to
        # locate the source of a non-finite loss
        self.evaluations = []

    def leaf(self, value):
        return Var(np.array(value, dtype=np.float64), self)

    def backward(self, root):
        if root.value.size != 1:
            raise ValueError("backward() needs a scalar root, got shape %s" % (root.value.shape,))
        for node in self.nodes:
            node.grad = None
        root.grad = np.ones_like(root.value)
        for node in reversed(self.nodes):
            if node.grad is None:
                continue
            for parent, vjp in node.parents:
                g = vjp(node.grad)
                if parent.grad is None:
                    parent.grad = g
                else:
                    parent.grad = parent.grad + g


def _unbroadcast(grad, shape):
    if grad.shape == shape:
        return grad
    ndim_extra = grad.ndim - len(shape)
    if ndim_extra > 0:
        grad = grad.sum(axis=tuple(range(ndim_extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def value_of(x):
    return x.value if isinstance(x, Var) else x


class Var:
    # makes numpy defer `ndarray op Var` to the reflected Var methods
    __array_ufunc__ = None

    def __init__(self, value, tape, parents=()):
        self.value = value
        self.tape = tape
        self.parents = parents
        self.grad = None
        tape.nodes.append(self)

    def __repr__(self):
        return "Var(%r)" % (self.value,)

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def _new(self, value, parents):
        return Var(value, self.tape, tuple(parents))

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        ov = value_of(other)
        out = self.value + ov
        parents = [(self, lambda g, s=self.shape: _unbroadcast(g, s))]
        if isinstance(other, Var):
            parents.append((other, lambda g, s=other.shape: _unbroadcast(g, s)))
        return self._new(out, parents)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.value, [(self, lambda g: -g)])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        ov = value_of(other)
        out = self.value * ov
        sv = self.value
        parents = [(self, lambda g, s=self.shape: _unbroadcast(g * ov, s))]
        if isinstance(other, Var):
            parents.append((other, lambda g, s=other.shape: _unbroadcast(g * sv, s)))
        return self._new(out, parents)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Var):
            raise TypeError("division by a Var is not supported")
        return self * (1.0 / np.asarray(other, dtype=np.float64))

    def __matmul__(self, other):
        ov = value_of(other)
        sv = self.value
        out = sv @ ov
        parents = [(self, lambda g: _matmul_grad_left(g, sv, ov))]
        if isinstance(other, Var):
            parents.append((other, lambda g: _matmul_grad_right(g, sv, ov)))
        return self._new(out, parents)

    def __rmatmul__(self, other):
        ov = np.asarray(other, dtype=np.float64)
        sv = self.value
        out = ov @ sv
        return self._new(out, [(self, lambda g: _matmul_grad_right(g, ov, sv))])

    # elementwise functions --------------------------------------------------

    def tanh(self):
        t = np.tanh(self.value)
        return self._new(t, [(self, lambda g: g * (1.0 - t * t))])

    def square(self):
        v = self.value
        return self._new(v * v, [(self, lambda g: 2.0 * g * v)])

    # shape manipulation -----------------------------------------------------

    def sum(self, axis=None):
        shape = self.shape
        out = self.value.sum(axis=axis)

        def vjp(g):
            if axis is not None:
                g = np.expand_dims(g, axis)
            return np.broadcast_to(g, shape).copy()

        return self._new(np.asarray(out), [(self, vjp)])

    def reshape(self, *shape):
        old = self.shape
        return self._new(self.value.reshape(*shape), [(self, lambda g: g.reshape(old))])

    def __getitem__(self, idx):
        shape = self.shape

        basic = isinstance(idx, (slice, int)) or (
            isinstance(idx, tuple) and all(isinstance(i, (slice, int)) for i in idx))

        def vjp(g):
            full = np.zeros(shape)
            if basic:
                full[idx] = g
            else:
                np.add.at(full, idx, g)
            return full

        return self._new(self.value[idx], [(self, vjp)])


def _matmul_grad_left(g, a, b):
    if b.ndim == 1:
        return np.multiply.outer(g, b) if a.ndim == 2 else g * b
    if a.ndim == 1:
        return b @ g
    return g @ b.T


def _matmul_grad_right(g, a, b):
    if a.ndim == 1:
        return np.multiply.outer(a, g) if b.ndim == 2 else g * a
    if b.ndim == 1:
        return a.T @ g
    return a.T @ g


def concat(items, axis=0):
    """Concatenate Vars (and constant arrays) along ``axis``."""
    tape = next(x.tape for x in items if isinstance(x, Var))
    values = [value_of(x) for x in items]
    out = np.concatenate(values, axis=axis)
    bounds = np.cumsum([0] + [v.shape[axis] for v in values])
    parents = []
    for k, x in enumerate(items):
        if isinstance(x, Var):
            sl = [slice(None)] * out.ndim
            sl[axis] = slice(bounds[k], bounds[k + 1])
            parents.append((x, lambda g, sl=tuple(sl): g[sl]))
    return Var(out, tape, tuple(parents))


def tanh(x):
    return x.tanh() if isinstance(x, Var) else np.tanh(x)


def total(x, axis=None):
    return x.sum(axis=axis) if isinstance(x, Var) else np.sum(x, axis=axis)
