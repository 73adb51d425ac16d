"""Scalar fields on a coordinate chart with exact first and second derivatives."""

import numpy as np

from . import ad

__all__ = [
    "ScalarField",
    "constant_field",
    "coordinate_field",
    "pullback",
    "fd_gradient",
    "gradient_error",
    "generic_solve",
]


class ScalarField:
    """A named function on a ``dim``-dimensional chart.

    ``fn`` receives a list of ``dim`` coordinate components (floats, ndarrays
    or :class:`~heisenberg_sr.ad.Jet`) and returns a scalar of the same kind.
    Points passed to the public methods are arrays whose last axis has length
    ``dim``; leading axes are a batch.

    ``guard`` (optional) is called with the numeric points before evaluation
    and raises when they lie outside the chart's regular domain.
    """

    def __init__(self, name, dim, fn, guard=None):
        self.name = name
        self.dim = int(dim)
        self.fn = fn
        self.guard = guard

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r}, dim={self.dim})"

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"{self.name}: expected points of dimension {self.dim}, got {x.shape[-1]}")
        if self.guard is not None:
            self.guard(x)
        return x

    def __call__(self, x):
        x = self._points(x)
        v = self.fn([x[..., i] for i in range(self.dim)])
        return np.broadcast_to(np.asarray(ad.value_of(v), dtype=float), x.shape[:-1]).copy()

    def jet(self, x, order=1):
        x = self._points(x)
        v = self.fn(ad.variables(x, order))
        if not isinstance(v, ad.Jet):
            v = ad.Jet(
                np.broadcast_to(np.asarray(v, float), x.shape[:-1]),
                np.zeros(x.shape),
                None,
                order,
            )
        return v

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        return np.array(self.jet(x, 1).gradient())

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        return np.array(self.jet(x, 2).hessian())

    def __mul__(self, other):
        return ScalarField(
            f"({self.name})*({other.name})",
            self.dim,
            lambda z: self.fn(z) * other.fn(z),
            self.guard or other.guard,
        )

    def __add__(self, other):
        return ScalarField(
            f"({self.name})+({other.name})",
            self.dim,
            lambda z: self.fn(z) + other.fn(z),
            self.guard or other.guard,
        )


def constant_field(value, dim, name="const"):
    return ScalarField(name, dim, lambda z: float(value))


def coordinate_field(i, dim, name=None):
    return ScalarField(name or f"c{i}", dim, lambda z: z[i])


def pullback(field, chart_map, dim, name=None, guard=None):
    """``field o chart_map`` where ``chart_map`` maps component lists generically."""
    return ScalarField(name or field.name, dim, lambda z: field.fn(chart_map(z)), guard)


def fd_gradient(f, x, h=1e-5):
    """Central finite-difference gradient of a field (test oracle)."""
    x = np.asarray(x, dtype=float)
    g = np.empty(x.shape)
    for i in range(x.shape[-1]):
        e = np.zeros(x.shape[-1])
        e[i] = h
        g[..., i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def gradient_error(f, x, h=1e-5):
    """Max relative deviation of the exact gradient from central differences.

    Relative to ``max(1, |grad|_inf)`` per point.
    """
    exact = f.grad(x)
    approx = fd_gradient(f, x, h)
    scale = np.maximum(1.0, np.max(np.abs(exact), axis=-1))
    return float(np.max(np.max(np.abs(exact - approx), axis=-1) / scale))


def generic_solve(a, b, tiny=1e-300):
    """Solve ``a c = b`` for small SPD ``a`` given as nested lists of generic scalars.

    Gaussian elimination without pivoting (the Gram matrices it serves are
    symmetric positive definite). Raises ``ZeroDivisionError`` on a vanishing
    pivot.
    """
    m = len(b)
    a = [list(row) for row in a]
    b = list(b)
    for k in range(m):
        piv = a[k][k]
        if np.any(np.abs(ad.value_of(piv)) <= tiny):
            raise ZeroDivisionError("singular matrix in elimination")
        inv = 1.0 / piv
        for i in range(k + 1, m):
            if ad.is_zero(a[i][k]):
                continue
            f = a[i][k] * inv
            for j in range(k + 1, m):
                if not ad.is_zero(a[k][j]):
                    a[i][j] = a[i][j] - f * a[k][j]
            if not ad.is_zero(b[k]):
                b[i] = b[i] - f * b[k]
            a[i][k] = 0
    c = [0] * m
    for i in reversed(range(m)):
        s = b[i]
        for j in range(i + 1, m):
            if not ad.is_zero(a[i][j]) and not ad.is_zero(c[j]):
                s = s - a[i][j] * c[j]
        c[i] = s / a[i][i]
    return c
