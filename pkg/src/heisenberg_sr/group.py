"""Heisenberg group H_{2n+1}: arithmetic, charts, invariant frames, metrics.

The normative chart is the matrix (polarized) model

    [[1, x^T, z], [0, 1, y], [0, 0, 1]],   x, y in R^n,

so that ``(x, y, z) * (x', y', z') = (x + x', y + y', z + z' + <x, y'>)``.

Symplectic convention: ``omega(e_i, f_i) = +1``, i.e. ``omega(u, v) = u^T J v``
with ``J = [[0, E], [-E, 0]]``. The Lie bracket of the algebra is
``[(a, alpha), (b, beta)] = (0, omega(a, b))`` so that ``[e_i, f_i] = xi``.

The symplectic model ``(u, zeta) * (v, chi) = (u + v, zeta + chi + omega(u, v))``
is reached through the polarization map

    (a, b, zeta) -> (x = a, y = 2 b, z = zeta + <a, b>),

which is a group isomorphism onto the matrix model, fixes the centre pointwise
and is the identity on the ``e``-directions: ``(e_1, 0) -> (1, 0, 0)``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import ad

__all__ = [
    "DimensionMismatch",
    "MetricSpecError",
    "NotSorted",
    "LastSigmaNotOne",
    "NonPositiveTau",
    "GroupElement",
    "AlgebraVector",
    "SymplecticForm",
    "MetricSpec",
    "identity",
    "group_mul",
    "group_inv",
    "symplectic_mul",
    "symplectic_to_matrix_chart",
    "matrix_to_symplectic_chart",
    "lie_bracket",
    "frame",
    "frame_components",
    "left_translation_differential",
    "right_translation_differential",
    "validate_metric",
    "riemannian_metric_matrix",
    "riemannian_metric_components",
]


class DimensionMismatch(ValueError):
    pass


class MetricSpecError(ValueError):
    pass


class NotSorted(MetricSpecError):
    pass


class LastSigmaNotOne(MetricSpecError):
    pass


class NonPositiveTau(MetricSpecError):
    pass


def _frozen(a):
    a = np.array(a, dtype=float).reshape(-1)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GroupElement:
    x: np.ndarray
    y: np.ndarray
    z: float

    def __post_init__(self):
        x, y = _frozen(self.x), _frozen(self.y)
        if x.shape != y.shape or x.size == 0:
            raise DimensionMismatch(f"x has length {x.size}, y has length {y.size}")
        z = float(self.z)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.isfinite(z)):
            raise ValueError("group element entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @property
    def n(self):
        return self.x.size

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        if a.size % 2 != 1:
            raise DimensionMismatch("coordinate vector must have odd length 2n+1")
        n = a.size // 2
        return cls(a[:n], a[n : 2 * n], a[2 * n])

    def as_array(self):
        return np.concatenate([self.x, self.y, [self.z]])

    def __mul__(self, other):
        return group_mul(self, other)

    def inverse(self):
        return group_inv(self)

    def matrix(self):
        """The (n+2) x (n+2) upper triangular matrix representing this element."""
        n = self.n
        m = np.eye(n + 2)
        m[0, 1 : n + 1] = self.x
        m[0, n + 1] = self.z
        m[1 : n + 1, n + 1] = self.y
        return m


def identity(n):
    return GroupElement(np.zeros(n), np.zeros(n), 0.0)


def _check_same_n(g, h):
    if g.n != h.n:
        raise DimensionMismatch(f"dimension mismatch: n={g.n} vs n={h.n}")


def group_mul(g, h):
    _check_same_n(g, h)
    return GroupElement(g.x + h.x, g.y + h.y, g.z + h.z + g.x @ h.y)


def group_inv(g):
    return GroupElement(-g.x, -g.y, -g.z + g.x @ g.y)


@dataclass(frozen=True)
class SymplecticForm:
    """Standard symplectic form on R^{2n} = span(e_1..e_n, f_1..f_n).

    ``sign=+1`` gives ``omega(e_i, f_i) = +1``; ``sign=-1`` is the opposite
    orientation, whose matrix is ``[[0, -E], [E, 0]]``.
    """

    n: int
    sign: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def matrix(self):
        n = self.n
        j = np.zeros((2 * n, 2 * n))
        j[:n, n:] = self.sign * np.eye(n)
        j[n:, :n] = -self.sign * np.eye(n)
        return j

    def __call__(self, u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        if u.shape[-1] != 2 * self.n or v.shape[-1] != 2 * self.n:
            raise DimensionMismatch("vectors must have length 2n")
        n = self.n
        return self.sign * (
            np.sum(u[..., :n] * v[..., n:], axis=-1) - np.sum(u[..., n:] * v[..., :n], axis=-1)
        )


def symplectic_mul(g, h, n):
    """Product in the symplectic model; ``g`` and ``h`` are (u, zeta) pairs."""
    omega = SymplecticForm(n)
    (u, zeta), (v, chi) = g, h
    u, v = np.asarray(u, float), np.asarray(v, float)
    return u + v, float(zeta) + float(chi) + float(omega(u, v))


def symplectic_to_matrix_chart(u, zeta):
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size % 2:
        raise DimensionMismatch("u must have even length 2n")
    n = u.size // 2
    a, b = u[:n], u[n:]
    return GroupElement(a, 2.0 * b, float(zeta) + a @ b)


def matrix_to_symplectic_chart(g):
    b = 0.5 * g.y
    return np.concatenate([g.x, b]), g.z - g.x @ b


@dataclass(frozen=True)
class AlgebraVector:
    a: np.ndarray
    alpha: float = 0.0

    def __post_init__(self):
        a = _frozen(self.a)
        if a.size % 2 or a.size == 0:
            raise DimensionMismatch("a must have even positive length 2n")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self):
        return self.a.size // 2

    def __add__(self, other):
        return AlgebraVector(self.a + other.a, self.alpha + other.alpha)

    def __rmul__(self, c):
        return AlgebraVector(c * self.a, c * self.alpha)

    @classmethod
    def basis(cls, n, kind, i=0):
        """``kind`` is one of ``"e"``, ``"f"``, ``"xi"``; ``i`` is zero-based."""
        a = np.zeros(2 * n)
        if kind == "xi":
            return cls(a, 1.0)
        a[i if kind == "e" else n + i] = 1.0
        return cls(a, 0.0)


def lie_bracket(v, w):
    if v.n != w.n:
        raise DimensionMismatch(f"dimension mismatch: n={v.n} vs n={w.n}")
    return AlgebraVector(np.zeros(2 * v.n), float(SymplecticForm(v.n)(v.a, w.a)))


def frame_components(side, q, n):
    """Frame legs as lists of coordinate components over a generic point ``q``.

    ``q`` is a sequence ``(x_1..x_n, y_1..y_n, z)`` of floats, arrays or jets.
    Returns 2n legs ``[X_1..X_n, Y_1..Y_n]``, each a list of 2n+1 components;
    structurally zero entries are python ``0``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    dim = 2 * n + 1
    legs = []
    for k in range(n):
        leg = [0] * dim
        leg[k] = 1.0
        if side == "right":
            leg[2 * n] = q[n + k]
        legs.append(leg)
    for k in range(n):
        leg = [0] * dim
        leg[n + k] = 1.0
        if side == "left":
            leg[2 * n] = q[k]
        legs.append(leg)
    return legs


def frame(side, g):
    """The 2n frame vectors at ``g`` as rows of a (2n, 2n+1) array."""
    legs = frame_components(side, list(g.as_array()), g.n)
    return np.array([[float(c) for c in leg] for leg in legs])


def left_translation_differential(g):
    """Jacobian of ``h -> g h`` (constant in ``h``)."""
    n = g.n
    d = np.eye(2 * n + 1)
    d[2 * n, n : 2 * n] = g.x
    return d


def right_translation_differential(g):
    """Jacobian of ``h -> h g`` (constant in ``h``)."""
    n = g.n
    d = np.eye(2 * n + 1)
    d[2 * n, :n] = g.y
    return d


@dataclass(frozen=True)
class MetricSpec:
    sigma: tuple = field(default=(1.0,))
    tau: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(float(s) for s in np.atleast_1d(self.sigma)))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def n(self):
        return len(self.sigma)

    @classmethod
    def standard(cls, n, tau=1.0):
        return cls((1.0,) * n, tau)


def validate_metric(spec):
    s = np.asarray(spec.sigma, dtype=float)
    if s.size == 0 or not np.all(np.isfinite(s)):
        raise MetricSpecError("sigma must be a non-empty vector of finite values")
    if np.any(np.diff(s) > 0):
        raise NotSorted(f"sigma must be non-increasing, got {tuple(s)}")
    if s[-1] != 1.0:
        raise LastSigmaNotOne(f"last sigma must equal 1, got {s[-1]}")
    if not (np.isfinite(spec.tau) and spec.tau > 0):
        raise NonPositiveTau(f"tau must be positive, got {spec.tau}")
    return spec


def riemannian_metric_components(spec, q):
    """Left-invariant metric in coordinates as a nested list over a generic point."""
    n = spec.n
    tau = spec.tau
    x = q[:n]
    dim = 2 * n + 1
    g = [[0] * dim for _ in range(dim)]
    for k in range(n):
        g[k][k] = spec.sigma[k]
        for j in range(n):
            g[n + k][n + j] = tau * x[k] * x[j] + (spec.sigma[k] if j == k else 0.0)
        g[n + k][2 * n] = -tau * x[k]
        g[2 * n][n + k] = -tau * x[k]
    g[2 * n][2 * n] = tau
    return g


def riemannian_metric_matrix(spec, g):
    if g.n != spec.n:
        raise DimensionMismatch("metric and point have different n")
    comps = riemannian_metric_components(spec, list(g.as_array()))
    return np.array([[float(ad.value_of(c)) for c in row] for row in comps])
