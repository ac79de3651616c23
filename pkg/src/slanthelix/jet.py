"""Truncated Taylor arithmetic ("jets").

A :class:`Jet` bundles a scalar function's value with its derivatives up to a
fixed order at one point, or at a whole batch of points at once.  Entry ``j``
of :attr:`Jet.coeffs` is the ``j``-th derivative itself, not the Taylor
coefficient ``f^(j)/j!``; the factorial scaling is applied internally where
the recurrences want it.

``coeffs`` has shape ``(order + 1,) + batch_shape``; operations broadcast over
the batch axes like ordinary numpy arrays.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = ["Jet", "dot", "norm"]


@lru_cache(maxsize=None)
def _factorials(m):
    return np.array([math.factorial(j) for j in range(m + 1)], dtype=float)


@lru_cache(maxsize=None)
def _cauchy_tensor(m):
    # T[j, k*(m+1) + l] = 1 iff k + l == j; turns a flattened outer product into a
    # truncated Cauchy product with a single matmul.
    T = np.zeros((m + 1, (m + 1) ** 2))
    for k in range(m + 1):
        for l in range(m + 1 - k):
            T[k + l, k * (m + 1) + l] = 1.0
    return T


def _scale(m, ndim):
    return _factorials(m).reshape((m + 1,) + (1,) * ndim)


def _cauchy(a, b):
    """Truncated product of two Taylor-coefficient arrays of equal order."""
    m = a.shape[0] - 1
    a, b = np.broadcast_arrays(a, b)
    batch = a.shape[1:]
    outer = (a[:, None] * b[None, :]).reshape(((m + 1) ** 2,) + batch)
    if not batch:
        return _cauchy_tensor(m) @ outer
    return (_cauchy_tensor(m) @ outer.reshape((m + 1) ** 2, -1)).reshape((m + 1,) + batch)


class Jet:
    """Value and derivatives ``f, f', ..., f^(m)`` of a scalar function.

    Parameters
    ----------
    coeffs : array_like
        Derivative values, shape ``(m + 1,)`` or ``(m + 1,) + batch``.
    """

    __slots__ = ("coeffs",)
    __array_priority__ = 1000  # make ndarray <op> Jet defer to Jet

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float)
        if c.ndim == 0:
            c = c.reshape(1)
        self.coeffs = c

    # -- construction ----------------------------------------------------
    @classmethod
    def constant(cls, value, order):
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, t, order):
        """The identity function ``t -> t`` expanded at ``t``."""
        t = np.asarray(t, dtype=float)
        c = np.zeros((order + 1,) + t.shape)
        c[0] = t
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def from_taylor(cls, tc):
        tc = np.asarray(tc, dtype=float)
        m = tc.shape[0] - 1
        return cls(tc * _scale(m, tc.ndim - 1))

    # -- accessors --------------------------------------------------------
    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def batch_shape(self):
        return self.coeffs.shape[1:]

    @property
    def value(self):
        return self.coeffs[0]

    @property
    def taylor(self):
        m = self.order
        return self.coeffs / _scale(m, self.coeffs.ndim - 1)

    def __getitem__(self, idx):
        """Index the batch axes (never the derivative axis)."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.coeffs[(slice(None),) + idx])

    def __len__(self):
        return self.coeffs.shape[0]

    def __repr__(self):
        return f"Jet(order={self.order}, coeffs={self.coeffs!r})"

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.coeffs[: order + 1])

    def derivative(self):
        """Jet of ``f'``; one order shorter."""
        if self.order == 0:
            raise ValueError("derivative of an order-0 jet is unknown")
        return Jet(self.coeffs[1:])

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            m = min(self.order, other.order)
            return self.truncate(m), other.truncate(m)
        other = np.broadcast_to(np.asarray(other, dtype=float), self.batch_shape)
        return self, Jet.constant(other, self.order)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.coeffs + b.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.coeffs - b.coeffs)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet(b.coeffs - a.coeffs)

    def __neg__(self):
        return Jet(-self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * np.asarray(other, dtype=float))
        a, b = self._coerce(other)
        return Jet.from_taylor(_cauchy(a.taylor, b.taylor))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise DomainError("division by zero")
            return Jet(self.coeffs / other)
        a, b = self._coerce(other)
        return _divide(a.taylor, b.taylor)

    def __rtruediv__(self, other):
        a, b = self._coerce(other)
        return _divide(b.taylor, a.taylor)

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet exponents are not supported; exponent must be a constant")
        return power(self, float(p))


def _divide(a, b):
    b0 = b[0]
    if np.any(b0 == 0):
        raise DomainError("division by a jet whose value is zero")
    q = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for j in range(a.shape[0]):
        acc = a[j] - sum(q[k] * b[j - k] for k in range(j)) if j else a[0]
        q[j] = acc / b0
    return Jet.from_taylor(q)


def _check_positive(x, what):
    if np.any(~(x > 0)):
        raise DomainError(f"{what} of a nonpositive value")


def _paired(f, v0, w0, sign):
    """Taylor recurrences for (sin, cos) or (sinh, cosh) of ``f``."""
    m = f.shape[0] - 1
    s = np.zeros(np.broadcast_shapes(f.shape, np.shape(v0)))
    c = np.zeros_like(s)
    s[0], c[0] = v0, w0
    for j in range(1, m + 1):
        s[j] = sum(k * f[k] * c[j - k] for k in range(1, j + 1)) / j
        c[j] = sign * sum(k * f[k] * s[j - k] for k in range(1, j + 1)) / j
    return s, c


def sin(x):
    f = x.taylor
    s, _ = _paired(f, np.sin(f[0]), np.cos(f[0]), -1.0)
    return Jet.from_taylor(s)


def cos(x):
    f = x.taylor
    _, c = _paired(f, np.sin(f[0]), np.cos(f[0]), -1.0)
    return Jet.from_taylor(c)


def tan(x):
    f = x.taylor
    s, c = _paired(f, np.sin(f[0]), np.cos(f[0]), -1.0)
    return _divide(s, c)


def sinh(x):
    f = x.taylor
    s, _ = _paired(f, np.sinh(f[0]), np.cosh(f[0]), 1.0)
    return Jet.from_taylor(s)


def cosh(x):
    f = x.taylor
    _, c = _paired(f, np.sinh(f[0]), np.cosh(f[0]), 1.0)
    return Jet.from_taylor(c)


def exp(x):
    f = x.taylor
    m = f.shape[0] - 1
    h = np.zeros_like(f)
    h[0] = np.exp(f[0])
    for j in range(1, m + 1):
        h[j] = sum(k * f[k] * h[j - k] for k in range(1, j + 1)) / j
    return Jet.from_taylor(h)


def log(x):
    f = x.taylor
    _check_positive(f[0], "log")
    m = f.shape[0] - 1
    h = np.zeros_like(f)
    h[0] = np.log(f[0])
    for j in range(1, m + 1):
        acc = f[j] - sum(k * h[k] * f[j - k] for k in range(1, j)) / j
        h[j] = acc / f[0]
    return Jet.from_taylor(h)


def sqrt(x):
    f = x.taylor
    _check_positive(f[0], "sqrt")
    m = f.shape[0] - 1
    h = np.zeros_like(f)
    h[0] = np.sqrt(f[0])
    for j in range(1, m + 1):
        h[j] = (f[j] - sum(h[k] * h[j - k] for k in range(1, j))) / (2.0 * h[0])
    return Jet.from_taylor(h)


def power(x, p):
    """``x ** p`` for a constant exponent ``p``.

    Nonnegative integer powers use repeated multiplication and are valid at
    ``x = 0``; negative integers need ``x != 0``; other exponents need ``x > 0``.
    """
    if float(p).is_integer():
        p = int(p)
        if p < 0:
            return 1.0 / power(x, -p)
        result = Jet.constant(np.ones(x.batch_shape), x.order)
        base = x
        while p:
            if p & 1:
                result = result * base
            p >>= 1
            if p:
                base = base * base
        return result
    f = x.taylor
    _check_positive(f[0], "non-integer power")
    m = f.shape[0] - 1
    h = np.zeros_like(f)
    h[0] = f[0] ** p
    for j in range(1, m + 1):
        h[j] = sum(((p + 1) * k - j) * f[k] * h[j - k] for k in range(1, j + 1)) / (j * f[0])
    return Jet.from_taylor(h)


def dot(u, v):
    """Inner product of two equal-length sequences of jets."""
    total = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        total = total + a * b
    return total


def norm(u):
    return sqrt(dot(u, u))


FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sinh": sinh,
    "cosh": cosh,
}
