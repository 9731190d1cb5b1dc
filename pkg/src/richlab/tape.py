"""Minimal reverse-mode automatic differentiation over numpy arrays.

Nodes hold whole arrays (or scalars); each recorded operation stores its
parents together with local vector-Jacobian closures. Replaying the tape
in reverse creation order visits every node exactly once, which is a
valid reverse topological order because parents are always created
before children.
"""
from __future__ import annotations

import numpy as np


class TapeReuseError(RuntimeError):
    """A tape can drive exactly one backward pass."""


class Tape:
    def __init__(self):
        self._nodes = []
        self._consumed = False

    def var(self, value):
        """Create a tracked leaf (parameter or input)."""
        return Var(np.asarray(value, dtype=float), self, parents=())

    def _record(self, value, parents):
        return Var(np.asarray(value, dtype=float), self, parents=parents)

    def backward(self, loss):
        """Accumulate gradients of a scalar loss into every node's .grad."""
        if self._consumed:
            raise TapeReuseError("tape has already been replayed")
        self._consumed = True
        if np.ndim(loss.value) != 0:
            raise ValueError("backward needs a scalar loss node")
        for node in self._nodes:
            node.grad = np.zeros_like(node.value)
        loss.grad = np.ones_like(loss.value)
        for node in reversed(self._nodes):
            if node._parents and np.any(node.grad):
                for parent, vjp in node._parents:
                    parent.grad = parent.grad + vjp(node.grad)


class Var:
    __slots__ = ("value", "tape", "_parents", "grad")

    # make numpy defer to our reflected operators instead of broadcasting
    # a Var elementwise into an object array
    __array_ufunc__ = None

    def __init__(self, value, tape, parents):
        self.value = value
        self.tape = tape
        self._parents = parents
        self.grad = None
        tape._nodes.append(self)

    # -- helpers ---------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Var):
            return other
        return None

    def __repr__(self):
        return f"Var({self.value!r})"

    @property
    def shape(self):
        return np.shape(self.value)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Var):
            return self.tape._record(self.value + other.value, (
                (self, lambda g: _unbroadcast(g, self.value)),
                (other, lambda g: _unbroadcast(g, other.value))))
        return self.tape._record(self.value + other,
                                 ((self, lambda g: _unbroadcast(g, self.value)),))

    __radd__ = __add__

    def __neg__(self):
        return self.tape._record(-self.value, ((self, lambda g: -g),))

    def __sub__(self, other):
        return self + (-other if isinstance(other, Var) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Var):
            return self.tape._record(self.value * other.value, (
                (self, lambda g: _unbroadcast(g * other.value, self.value)),
                (other, lambda g: _unbroadcast(g * self.value, other.value))))
        other = np.asarray(other)
        return self.tape._record(self.value * other,
                                 ((self, lambda g: _unbroadcast(g * other, self.value)),))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Var):
            return self.tape._record(self.value / other.value, (
                (self, lambda g: _unbroadcast(g / other.value, self.value)),
                (other, lambda g: _unbroadcast(-g * self.value / other.value ** 2,
                                               other.value))))
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        recip = self.tape._record(
            1.0 / self.value, ((self, lambda g: -g / self.value ** 2),))
        return recip * other

    def __getitem__(self, idx):
        def vjp(g):
            out = np.zeros_like(self.value)
            np.add.at(out, idx, g)
            return out
        return self.tape._record(self.value[idx], ((self, vjp),))


def _unbroadcast(g, target):
    """Sum gradient g down to the shape of the target value."""
    g = np.asarray(g)
    while g.ndim > np.ndim(target):
        g = g.sum(axis=0)
    for ax, size in enumerate(np.shape(target)):
        if size == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# -- elementwise nonlinearities ----------------------------------------

def tanh(x: Var) -> Var:
    t = np.tanh(x.value)
    return x.tape._record(t, ((x, lambda g: g * (1.0 - t ** 2)),))


def sigmoid(x: Var) -> Var:
    s = 1.0 / (1.0 + np.exp(-x.value))
    return x.tape._record(s, ((x, lambda g: g * s * (1.0 - s)),))


def softplus(x: Var) -> Var:
    y = np.logaddexp(0.0, x.value)
    s = 1.0 / (1.0 + np.exp(-x.value))
    return x.tape._record(y, ((x, lambda g: g * s),))


def exp(x: Var) -> Var:
    y = np.exp(x.value)
    return x.tape._record(y, ((x, lambda g: g * y),))


def sqrt(x: Var) -> Var:
    y = np.sqrt(x.value)
    return x.tape._record(y, ((x, lambda g: g * 0.5 / y),))


# -- linear algebra ----------------------------------------------------

def dot(a: Var, b) -> Var:
    if isinstance(b, Var):
        return a.tape._record(a.value @ b.value, (
            (a, lambda g: g * b.value),
            (b, lambda g: g * a.value)))
    b = np.asarray(b)
    return a.tape._record(a.value @ b, ((a, lambda g: g * b),))


def norm2(x: Var) -> Var:
    n = np.linalg.norm(x.value)
    return x.tape._record(n, ((x, lambda g: g * x.value / n if n > 0
                               else np.zeros_like(x.value)),))


def matvec(W: Var, x) -> Var:
    """Dense W @ x with a parameter matrix W."""
    if isinstance(x, Var):
        return W.tape._record(W.value @ x.value, (
            (W, lambda g: np.outer(g, x.value)),
            (x, lambda g: W.value.T @ g)))
    x = np.asarray(x)
    return W.tape._record(W.value @ x, ((W, lambda g: np.outer(g, x)),))


def spmv(A, x: Var) -> Var:
    """Sparse A @ x with a constant SparseMatrix A."""
    return x.tape._record(A.matvec(x.value), ((x, lambda g: A.rmatvec(g)),))


def linear_map(apply_fn, apply_transpose_fn, x: Var) -> Var:
    """y = L x for a constant linear operator with known transpose."""
    return x.tape._record(apply_fn(x.value),
                          ((x, lambda g: apply_transpose_fn(g)),))


def mean(xs) -> Var:
    total = xs[0]
    for x in xs[1:]:
        total = total + x
    return total * (1.0 / len(xs))
