"""Forward-mode automatic differentiation on a generic scalar type.

A :class:`Jet` carries a value together with the vector of its first partial
derivatives with respect to a chosen set of seed variables.  Arithmetic
propagates derivatives exactly (up to rounding), so there is no step size to
tune.  Components of a Jet may themselves be Jets: seeding inside an already
seeded computation yields exact mixed second derivatives, which is how the
curvature and Nijenhuis evaluations differentiate quantities that are
themselves derivatives.

Every geometric evaluator in this package is written against plain ``+ - * /``
arithmetic, so the identical code path serves ordinary evaluation, Jet
evaluation, and the finite-difference cross checks.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Jet",
    "seed",
    "val",
    "partials",
    "strip",
    "strip_array",
    "jacobian",
    "derivative",
    "exp",
]


class Jet:
    """Value plus gradient with respect to the seeded variables."""

    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = val
        self.grad = np.asarray(grad)

    # Binary operations defer to numpy when the other operand is an array so
    # that ``array * jet`` broadcasts elementwise instead of building a Jet
    # whose components are arrays.

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet):
            return Jet(self.val + other.val, self.grad + other.grad)
        return Jet(self.val + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet):
            return Jet(self.val - other.val, self.grad - other.grad)
        return Jet(self.val - other, self.grad)

    def __rsub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return Jet(other - self.val, -self.grad)

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet):
            return Jet(
                self.val * other.val,
                self.val * other.grad + other.val * self.grad,
            )
        return Jet(self.val * other, self.grad * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Jet):
            inv = 1.0 / (other.val * other.val)
            return Jet(
                self.val / other.val,
                (self.grad * other.val - self.val * other.grad) * inv,
            )
        return Jet(self.val / other, self.grad / other)

    def __rtruediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        inv = 1.0 / (self.val * self.val)
        return Jet(other / self.val, -(other * inv) * self.grad)

    def __pow__(self, power):
        if isinstance(power, Jet):
            raise TypeError("jet exponents are not supported")
        if power == 0:
            return Jet(self.val ** 0, 0.0 * self.grad)
        return Jet(self.val ** power, (power * self.val ** (power - 1)) * self.grad)

    def __neg__(self):
        return Jet(-self.val, -self.grad)

    def __pos__(self):
        return self

    # Comparisons act on the underlying value, which is what domain and
    # positivity guards need while evaluating on Jets.

    def __lt__(self, other):
        return strip(self) < strip(other)

    def __le__(self, other):
        return strip(self) <= strip(other)

    def __gt__(self, other):
        return strip(self) > strip(other)

    def __ge__(self, other):
        return strip(self) >= strip(other)

    def __repr__(self):
        return f"Jet({self.val!r}, {self.grad!r})"


def seed(x):
    """Wrap the entries of a 1-d array as Jets with unit coordinate directions.

    Entries may already be Jets; the new (inner) seeding then tracks its own
    directions while the outer derivatives keep flowing through the values.
    """
    entries = list(x)
    m = len(entries)
    out = np.empty(m, dtype=object)
    for i, xi in enumerate(entries):
        e = np.zeros(m)
        e[i] = 1.0
        out[i] = Jet(xi, e)
    return out


def val(x):
    """Value part of a scalar, removing one level of seeding."""
    return x.val if isinstance(x, Jet) else x


def partials(x, nvars):
    """Gradient of a scalar with respect to ``nvars`` seeded variables.

    Constants (plain numbers that never touched a seed) have zero gradient.
    """
    if isinstance(x, Jet):
        return x.grad
    return np.zeros(nvars)


def strip(x):
    """Plain float value of a possibly nested scalar."""
    while isinstance(x, Jet):
        x = x.val
    return float(x)


def strip_array(a):
    """Elementwise :func:`strip` returning a float array."""
    a = np.asarray(a)
    out = np.empty(a.shape)
    for idx in np.ndindex(a.shape):
        out[idx] = strip(a[idx])
    return out


def jacobian(f, x):
    """Evaluate ``f`` once on seeded inputs; return ``(value, jacobian)``.

    ``f`` maps a 1-d array of ``m`` scalars to a scalar or ndarray.  The
    jacobian has the shape of the output followed by one trailing axis of
    length ``m``.
    """
    x = np.asarray(x, dtype=float)
    out = np.asarray(f(seed(x)))
    m = x.size
    vals = strip_array(out)
    jac = np.zeros(out.shape + (m,))
    for idx in np.ndindex(out.shape):
        jac[idx] = strip_array(partials(out[idx], m))
    return vals, jac


def derivative(f, t):
    """First derivative of the scalar function ``f`` at ``t``.

    ``t`` may itself be a Jet, in which case the result carries the outer
    derivatives of the (inner) derivative.
    """
    out = f(Jet(t, np.ones(1)))
    if isinstance(out, Jet):
        return out.grad[0]
    return 0.0 * t


def exp(x):
    """Exponential that follows Jet arguments (numpy otherwise)."""
    if isinstance(x, Jet):
        e = exp(x.val)
        return Jet(e, e * x.grad)
    return np.exp(x)
