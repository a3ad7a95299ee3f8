"""Second-order forward-mode differentiation.

A :class:`Jet` carries the value, gradient and Hessian of a scalar function
of ``n`` variables at a fixed point.  Arithmetic on jets propagates all three
exactly, so a metric written once in terms of jets yields its first and
second partial derivatives without finite differencing.
"""

import math

import numpy as np


class Jet:
    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess):
        self.val = float(val)
        self.grad = grad
        self.hess = hess

    @classmethod
    def variables(cls, point):
        """Independent-variable jets seeded at ``point``."""
        n = len(point)
        eye = np.eye(n)
        zero = np.zeros((n, n))
        return [cls(x, eye[i].copy(), zero.copy()) for i, x in enumerate(point)]

    @classmethod
    def constant(cls, value, n):
        return cls(value, np.zeros(n), np.zeros((n, n)))

    @property
    def n(self):
        return self.grad.shape[0]

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.n)

    def chain(self, f0, f1, f2):
        """Compose with a univariate function given its value and two derivatives."""
        g = self.grad
        return Jet(f0, f1 * g, f1 * self.hess + f2 * np.outer(g, g))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)
        return Jet(self.val + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self, other
            gg = np.outer(a.grad, b.grad)
            return Jet(
                a.val * b.val,
                a.val * b.grad + b.val * a.grad,
                a.val * b.hess + b.val * a.hess + gg + gg.T,
            )
        return Jet(self.val * other, self.grad * other, self.hess * other)

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.val
        if v == 0.0:
            raise ZeroDivisionError("jet reciprocal of zero")
        return self.chain(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, int):
            if k == 0:
                return Jet.constant(1.0, self.n)
            if k < 0:
                return (self ** (-k)).reciprocal()
            if k == 1:
                return self
            if k == 2:
                return self * self
        v = self.val
        return self.chain(v**k, k * v ** (k - 1), k * (k - 1) * v ** (k - 2))

    def __abs__(self):
        if self.val == 0.0:
            raise ZeroDivisionError("abs is not differentiable at 0")
        s = math.copysign(1.0, self.val)
        return self * s

    def __float__(self):
        return self.val

    def __repr__(self):
        return f"Jet({self.val!r}, grad={self.grad!r})"


def _unary(f, df, ddf):
    def op(x):
        if isinstance(x, Jet):
            v = x.val
            return x.chain(f(v), df(v), ddf(v))
        return f(x)

    return op


sqrt = _unary(math.sqrt, lambda v: 0.5 / math.sqrt(v), lambda v: -0.25 / v**1.5)
exp = _unary(math.exp, math.exp, math.exp)
log = _unary(math.log, lambda v: 1.0 / v, lambda v: -1.0 / v**2)
sin = _unary(math.sin, math.cos, lambda v: -math.sin(v))
cos = _unary(math.cos, lambda v: -math.sin(v), lambda v: -math.cos(v))
sinh = _unary(math.sinh, math.cosh, math.sinh)
cosh = _unary(math.cosh, math.sinh, math.cosh)


def value(x):
    return x.val if isinstance(x, Jet) else float(x)
