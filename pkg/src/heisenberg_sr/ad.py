"""Forward-mode automatic differentiation with batched second-order jets.

A :class:`Jet` carries a value, its gradient and (optionally) its Hessian with
respect to a fixed set of ``d`` input variables. Values may be batched: a jet
with value shape ``B`` has gradient shape ``B + (d,)`` and Hessian shape
``B + (d, d)``.

Formulas are written once against plain arithmetic plus the functions in this
module (``sin``, ``cos``, ``sqrt``, ...). Called with floats or ndarrays they
evaluate numerically; called with jets they propagate exact derivatives.
"""

import numpy as np

__all__ = [
    "Jet",
    "variables",
    "is_zero",
    "sin",
    "cos",
    "tan",
    "sqrt",
    "exp",
    "log",
    "arctan",
    "atan2",
    "square",
    "value_of",
]


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


def _c(x):
    return np.asarray(x, dtype=float)


class Jet:
    """Truncated Taylor expansion (order 1 or 2) of a batched scalar."""

    __slots__ = ("v", "g", "h", "order")
    __array_priority__ = 1000

    def __init__(self, v, g, h=None, order=1):
        self.v = _c(v)
        self.g = g
        self.h = h  # None means identically zero when order == 2
        self.order = order

    # -- construction helpers -------------------------------------------------
    def _const_like(self, c):
        c = _c(c)
        v = np.broadcast_to(c, np.broadcast_shapes(c.shape, self.v.shape))
        g = np.zeros(v.shape + self.g.shape[-1:])
        return Jet(v, g, None, self.order)

    @property
    def dim(self):
        return self.g.shape[-1]

    def hessian(self):
        if self.order < 2:
            raise ValueError("jet was built without second derivatives")
        if self.h is None:
            d = self.dim
            return np.zeros(self.v.shape + (d, d))
        return np.broadcast_to(self.h, self.v.shape + (self.dim, self.dim))

    def gradient(self):
        return np.broadcast_to(self.g, self.v.shape + (self.dim,))

    # -- arithmetic -----------------------------------------------------------
    def __neg__(self):
        return Jet(-self.v, -self.g, None if self.h is None else -self.h, self.order)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            if self.h is None:
                h = other.h
            elif other.h is None:
                h = self.h
            else:
                h = self.h + other.h
            return Jet(self.v + other.v, self.g + other.g, h, max(self.order, other.order))
        return Jet(self.v + other, self.g, self.h, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            av, bv = self.v[..., None], other.v[..., None]
            g = self.g * bv + other.g * av
            h = None
            order = max(self.order, other.order)
            if order >= 2:
                h = _outer(self.g, other.g)
                h = h + np.swapaxes(h, -1, -2)
                if self.h is not None:
                    h = h + self.h * other.v[..., None, None]
                if other.h is not None:
                    h = h + other.h * self.v[..., None, None]
            return Jet(self.v * other.v, g, h, order)
        c = _c(other)
        h = None if self.h is None else self.h * c[..., None, None]
        return Jet(self.v * c, self.g * c[..., None], h, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        return self * (1.0 / _c(other))

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet exponents are not supported")
        if p == 2:
            return self * self
        if p == 1:
            return self
        if p == 0:
            return self._const_like(1.0)
        return _unary(
            self,
            lambda v: v**p,
            lambda v: p * v ** (p - 1),
            lambda v: p * (p - 1) * v ** (p - 2),
        )

    def __repr__(self):
        return f"Jet(v={self.v!r}, order={self.order})"


def variables(x, order=1):
    """Independent jets for every component along the last axis of ``x``."""
    x = _c(x)
    d = x.shape[-1]
    batch = x.shape[:-1]
    eye = np.eye(d)
    out = []
    for i in range(d):
        g = np.broadcast_to(eye[i], batch + (d,))
        out.append(Jet(x[..., i], g, None, order))
    return out


def value_of(a):
    return a.v if isinstance(a, Jet) else a


def is_zero(a):
    """True for literal (python) zeros used to skip structurally empty terms."""
    return not isinstance(a, (Jet, np.ndarray)) and a == 0


def _unary(a, f0, f1, f2):
    v = a.v
    d1 = _c(f1(v))
    g = a.g * d1[..., None]
    h = None
    if a.order >= 2:
        h = _outer(a.g, a.g) * _c(f2(v))[..., None, None]
        if a.h is not None:
            h = h + a.h * d1[..., None, None]
    return Jet(f0(v), g, h, a.order)


def reciprocal(a):
    if not isinstance(a, Jet):
        return 1.0 / a
    return _unary(a, lambda v: 1.0 / v, lambda v: -1.0 / v**2, lambda v: 2.0 / v**3)


def square(a):
    return a * a


def sin(a):
    if not isinstance(a, Jet):
        return np.sin(a)
    return _unary(a, np.sin, np.cos, lambda v: -np.sin(v))


def cos(a):
    if not isinstance(a, Jet):
        return np.cos(a)
    return _unary(a, np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v))


def tan(a):
    if not isinstance(a, Jet):
        return np.tan(a)

    def d1(v):
        return 1.0 / np.cos(v) ** 2

    return _unary(a, np.tan, d1, lambda v: 2.0 * np.tan(v) * d1(v))


def sqrt(a):
    if not isinstance(a, Jet):
        return np.sqrt(a)
    return _unary(
        a,
        np.sqrt,
        lambda v: 0.5 / np.sqrt(v),
        lambda v: -0.25 / (v * np.sqrt(v)),
    )


def exp(a):
    if not isinstance(a, Jet):
        return np.exp(a)
    return _unary(a, np.exp, np.exp, np.exp)


def log(a):
    if not isinstance(a, Jet):
        return np.log(a)
    return _unary(a, np.log, lambda v: 1.0 / v, lambda v: -1.0 / v**2)


def arctan(a):
    if not isinstance(a, Jet):
        return np.arctan(a)
    return _unary(
        a,
        np.arctan,
        lambda v: 1.0 / (1.0 + v**2),
        lambda v: -2.0 * v / (1.0 + v**2) ** 2,
    )


def atan2(y, x):
    """Two-argument arctangent; derivatives are those of the local angle."""
    if not isinstance(y, Jet) and not isinstance(x, Jet):
        return np.arctan2(y, x)
    yv, xv = value_of(y), value_of(x)
    if not isinstance(y, Jet):
        y = x._const_like(y)
    if not isinstance(x, Jet):
        x = y._const_like(x)
    # derivatives are branch-independent; divide by the larger argument
    use_x = np.abs(xv) >= np.abs(yv)
    safe_x = Jet(np.where(use_x, xv, 1.0), x.g, x.h, x.order)
    safe_y = Jet(np.where(use_x, 1.0, yv), y.g, y.h, y.order)
    t1 = arctan(y / safe_x)
    t2 = -arctan(x / safe_y)
    mask_g = use_x[..., None]
    g = np.where(mask_g, t1.g, t2.g)
    h = None
    if t1.order >= 2:
        h = np.where(mask_g[..., None], t1.hessian(), t2.hessian())
    return Jet(np.arctan2(yv, xv), g, h, t1.order)
