"""Closed-form Hamiltonians and vector fields for the LL and LR systems.

Charts (flat state arrays):

* ``ll-full``, ``lr-full``: ``(x_1..x_n, y_1..y_n, z, lam_1..lam_{2n+1})`` on
  T*H_{2n+1}, canonical Poisson structure.
* ``ll-reduced``, ``lr-reduced``: ``(x, y, p)`` on T*R^{2n} at the level
  ``lam_{2n+1} = C`` with a magnetic Poisson structure.
* ``lr-hyperspherical``: ``(r, theta_1..theta_{2n-1}, p_r, p_theta)``.

LR systems use the left-invariant metric with ``sigma = (1, ..., 1)`` and
any ``tau > 0``. With ``w = (y, -x)`` and ``P = lam_bar + lam_z (y, 0)`` the LR
Hamiltonian is ``H = 1/2 (|P|^2 - tau <w, P>^2 / (1 + tau |q|^2))``.
"""

from dataclasses import dataclass

import numpy as np

from . import ad
from . import hyperspherical as hs
from .fields import ScalarField
from .framework import build_sr_hamiltonian, left_structure, right_structure
from .group import MetricSpec, MetricSpecError, validate_metric
from .poisson import canonical_tensor, hyperspherical_tensor, magnetic_tensor

__all__ = [
    "KINDS",
    "SystemId",
    "hamiltonian",
    "builder_hamiltonian",
    "hamiltonian_vector_field",
    "tensor_vector_field",
    "system_tensor",
    "reduce",
    "reduce_state",
    "lift_state",
    "magnetic_coefficients",
]

KINDS = ("ll-full", "ll-reduced", "lr-full", "lr-reduced", "lr-hyperspherical")


@dataclass(frozen=True)
class SystemId:
    kind: str
    n: int
    spec: MetricSpec = None
    C: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown system kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if int(self.n) < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        spec = self.spec if self.spec is not None else MetricSpec.standard(self.n)
        validate_metric(spec)
        if spec.n != self.n:
            raise MetricSpecError(f"sigma has length {spec.n} but n = {self.n}")
        if self.kind.startswith("lr") and any(s != 1.0 for s in spec.sigma):
            raise MetricSpecError("LR systems require sigma = (1, ..., 1)")
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "C", float(self.C))

    @property
    def full(self):
        return self.kind.endswith("full")

    @property
    def dim(self):
        return 4 * self.n + 2 if self.full else 4 * self.n

    @property
    def canonical(self):
        """True when the chart's Poisson structure is canonical."""
        return self.full or self.C == 0.0

    @property
    def label(self):
        s = f"{self.kind}(n={self.n}, sigma={list(self.spec.sigma)}, tau={self.spec.tau:g}"
        return s + ("" if self.full else f", C={self.C:g}") + ")"

    @property
    def labels(self):
        n = self.n
        if self.full:
            return (
                [f"x{k}" for k in range(1, n + 1)]
                + [f"y{k}" for k in range(1, n + 1)]
                + ["z"]
                + [f"lam{k}" for k in range(1, 2 * n + 2)]
            )
        if self.kind == "lr-hyperspherical":
            return (
                ["r"]
                + [f"th{k}" for k in range(1, 2 * n)]
                + ["pr"]
                + [f"pth{k}" for k in range(1, 2 * n)]
            )
        return (
            [f"x{k}" for k in range(1, n + 1)]
            + [f"y{k}" for k in range(1, n + 1)]
            + [f"p{k}" for k in range(1, 2 * n + 1)]
        )

    def guard(self, x):
        if self.kind == "lr-hyperspherical":
            hs.guard_hyperspherical(x)
        return x

    def sample(self, rng, k=1, scale=1.0):
        """``k`` random non-singular states of this chart."""
        n = self.n
        if self.kind == "lr-hyperspherical":
            out = np.empty((k, 4 * n))
            out[:, 0] = rng.uniform(0.5, 1.5, k)
            out[:, 1:n] = rng.uniform(0.15, np.pi / 2 - 0.15, (k, n - 1))
            out[:, n : 2 * n] = rng.uniform(-np.pi, np.pi, (k, n))
            out[:, 2 * n :] = scale * rng.normal(size=(k, 2 * n))
            return out
        out = scale * rng.normal(size=(k, self.dim))
        if self.kind == "lr-reduced":
            # redraw the (measure-zero in practice) points on the chart's singular loci
            for i in range(k):
                while True:
                    try:
                        hs.guard_cartesian(out[i])
                        break
                    except hs.SingularChartPoint:
                        out[i] = scale * rng.normal(size=self.dim)
        return out

    def with_C(self, C):
        return SystemId(self.kind, self.n, self.spec, C)


# -- Hamiltonians ----------------------------------------------------------


def _ll_full(n, sigma):
    def fn(z):
        x, lam = z[:n], z[2 * n + 1 :]
        h = 0
        for k in range(n):
            u = lam[n + k] + x[k] * lam[2 * n]
            h = h + (lam[k] * lam[k] + u * u) / sigma[k]
        return 0.5 * h

    return fn


def _ll_reduced(n, sigma):
    def fn(z):
        p = z[2 * n :]
        h = 0
        for k in range(n):
            h = h + (p[k] * p[k] + p[n + k] * p[n + k]) / sigma[k]
        return 0.5 * h

    return fn


def _lr_quadratic(x, y, P, tau):
    n = len(x)
    pp = 0
    m = 0
    qq = 1.0
    for k in range(n):
        pp = pp + P[k] * P[k] + P[n + k] * P[n + k]
        m = m + y[k] * P[k] - x[k] * P[n + k]
        qq = qq + tau * (x[k] * x[k] + y[k] * y[k])
    return 0.5 * (pp - tau * m * m / qq)


def _lr_full(n, tau):
    def fn(z):
        x, y, lam = z[:n], z[n : 2 * n], z[2 * n + 1 :]
        P = [lam[k] + lam[2 * n] * y[k] for k in range(n)] + list(lam[n : 2 * n])
        return _lr_quadratic(x, y, P, tau)

    return fn


def _lr_reduced(n, tau):
    def fn(z):
        return _lr_quadratic(z[:n], z[n : 2 * n], z[2 * n :], tau)

    return fn


def _lr_hyperspherical(n, tau):
    def fn(w):
        r = w[0]
        th = [None] + list(w[1 : 2 * n])
        p_r = w[2 * n]
        pth = [None] + list(w[2 * n + 1 :])
        h = p_r * p_r
        c2 = r * r
        for j in range(1, n):
            h = h + pth[j] * pth[j] / c2
            c2 = c2 * ad.cos(th[j]) ** 2
        rho2 = hs.plane_radii_sq(r, th, n)
        ang = 0
        for k in range(1, n + 1):
            pk = pth[n + k - 1]
            h = h + pk * pk / rho2[k - 1]
            ang = ang + pk
        h = h - tau * ang * ang / (1.0 + tau * r * r)
        return 0.5 * h

    return fn


def hamiltonian(sys: SystemId) -> ScalarField:
    n, spec = sys.n, sys.spec
    name = f"H[{sys.kind}]"
    if sys.kind == "ll-full":
        return ScalarField(name, sys.dim, _ll_full(n, spec.sigma))
    if sys.kind == "ll-reduced":
        return ScalarField(name, sys.dim, _ll_reduced(n, spec.sigma))
    if sys.kind == "lr-full":
        return ScalarField(name, sys.dim, _lr_full(n, spec.tau))
    if sys.kind == "lr-reduced":
        return ScalarField(name, sys.dim, _lr_reduced(n, spec.tau))
    return ScalarField(name, sys.dim, _lr_hyperspherical(n, spec.tau), hs.guard_hyperspherical)


def builder_hamiltonian(sys: SystemId) -> ScalarField:
    """Hamiltonian of a full system assembled from its frame and Gram matrix."""
    if sys.kind == "ll-full":
        return build_sr_hamiltonian(left_structure(sys.spec), "H_sR[ll-full]")
    if sys.kind == "lr-full":
        return build_sr_hamiltonian(right_structure(sys.spec), "H_sR[lr-full]")
    raise ValueError("the builder applies to full systems only")


def system_tensor(sys: SystemId):
    if sys.full:
        return canonical_tensor(2 * sys.n + 1)
    if sys.kind == "ll-reduced":
        return magnetic_tensor(sys.n, sys.C, "LL")
    if sys.kind == "lr-reduced":
        return magnetic_tensor(sys.n, sys.C, "LR")
    return hyperspherical_tensor(sys.n, sys.C)


def tensor_vector_field(sys: SystemId):
    """``x -> Lambda(x) grad H(x)`` evaluated with exact derivatives."""
    h = hamiltonian(sys)
    lam = system_tensor(sys)

    def field(x):
        x = np.asarray(x, dtype=float)
        return np.einsum("...ij,...j->...i", lam.matrix(x), h.grad(x))

    return field


# -- closed-form vector fields ---------------------------------------------


def _vf_ll_full(n, sigma):
    sigma = np.asarray(sigma)

    def field(s):
        s = np.asarray(s, dtype=float)
        x = s[..., :n]
        lam = s[..., 2 * n + 1 :]
        lz = lam[..., 2 * n : 2 * n + 1]
        u = lam[..., n : 2 * n] + x * lz
        xd = lam[..., :n] / sigma
        yd = u / sigma
        zd = np.sum(x * yd, axis=-1, keepdims=True)
        ld = -lz * yd
        zero = np.zeros_like(u)
        return np.concatenate([xd, yd, zd, ld, zero, np.zeros_like(lz)], axis=-1)

    return field


def _vf_ll_reduced(n, sigma, C):
    sigma = np.asarray(sigma)

    def field(s):
        s = np.asarray(s, dtype=float)
        p = s[..., 2 * n :]
        px, py = p[..., :n], p[..., n:]
        return np.concatenate([px / sigma, py / sigma, -C * py / sigma, C * px / sigma], axis=-1)

    return field


def _lr_parts(x, y, P, tau):
    w = np.concatenate([y, -x], axis=-1)
    m = np.sum(w * P, axis=-1, keepdims=True)
    s = 1.0 + tau * np.sum(x * x + y * y, axis=-1, keepdims=True)
    return w, tau * m / s


def _vf_lr_full(n, tau):
    def field(s):
        s = np.asarray(s, dtype=float)
        x, y = s[..., :n], s[..., n : 2 * n]
        lam = s[..., 2 * n + 1 :]
        lz = lam[..., 2 * n : 2 * n + 1]
        P = lam[..., : 2 * n].copy()
        P[..., :n] += lz * y
        Px, Py = P[..., :n], P[..., n:]
        w, k = _lr_parts(x, y, P, tau)
        qd = P - k * w
        zd = np.sum(Px * y, axis=-1, keepdims=True) - k * np.sum(y * y, axis=-1, keepdims=True)
        dx = k * Py + k * k * x
        dy = lz * Px - k * (Px + lz * y) + k * k * y
        return np.concatenate([qd, zd, -dx, -dy, np.zeros_like(lz)], axis=-1)

    return field


def _vf_lr_reduced(n, tau, C):
    def field(s):
        s = np.asarray(s, dtype=float)
        x, y, p = s[..., :n], s[..., n : 2 * n], s[..., 2 * n :]
        px, py = p[..., :n], p[..., n:]
        w, k = _lr_parts(x, y, p, tau)
        qd = p - k * w
        dx = k * py + k * k * x
        dy = -k * px + k * k * y
        # magnetic terms: {p_k, p_{n+k}} = C
        pxd = -dx + C * qd[..., n:]
        pyd = -dy - C * qd[..., :n]
        return np.concatenate([qd, pxd, pyd], axis=-1)

    return field


def _vf_lr_hyperspherical_2(tau, C):
    """Hamilton equations of the n = 2 hyperspherical system written out by hand."""

    def field(w):
        w = hs.guard_hyperspherical(w)
        r, t1 = w[..., 0], w[..., 1]
        pr, p1, p2, p3 = (w[..., 4 + i] for i in range(4))
        c, s = np.cos(t1), np.sin(t1)
        S = p2 + p3
        D = 1.0 + tau * r * r
        rd = pr
        t1d = p1 / r**2
        t2d = p2 / (r * c) ** 2 - tau * S / D
        t3d = p3 / (r * s) ** 2 - tau * S / D
        prd = (
            p1**2 / r**3
            + p2**2 / (r**3 * c**2)
            + p3**2 / (r**3 * s**2)
            - tau**2 * r * S**2 / D**2
            + r * C * (c**2 * t2d + s**2 * t3d)
        )
        p1d = -(p2**2) * s / (r**2 * c**3) + p3**2 * c / (r**2 * s**3) + r**2 * C * s * c * (t3d - t2d)
        p2d = -r * C * c**2 * pr + C * s * c * p1
        p3d = -r * C * s**2 * pr - C * s * c * p1
        # planar angles are cyclic: their momenta change only through the magnetic terms
        return np.stack([rd, t1d, t2d, t3d, prd, p1d, p2d, p3d], axis=-1)

    return field


def _vf_lr_hyperspherical(n, tau, C):
    """General n: push the Cartesian reduced field forward through the chart."""
    cart = _vf_lr_reduced(n, tau, C)

    def field(w):
        w = hs.guard_hyperspherical(w)
        z = hs.from_hyperspherical(w)
        jac_rows = hs.hs_from_cartesian(ad.variables(z, 1), n)
        jac = np.stack([np.asarray(c.gradient()) for c in jac_rows], axis=-2)
        return np.einsum("...ij,...j->...i", jac, cart(z))

    return field


def hamiltonian_vector_field(sys: SystemId):
    """Closed-form Hamilton vector field of a system (independent of :func:`tensor_vector_field`)."""
    n, spec = sys.n, sys.spec
    if sys.kind == "ll-full":
        return _vf_ll_full(n, spec.sigma)
    if sys.kind == "ll-reduced":
        return _vf_ll_reduced(n, spec.sigma, sys.C)
    if sys.kind == "lr-full":
        return _vf_lr_full(n, spec.tau)
    if sys.kind == "lr-reduced":
        return _vf_lr_reduced(n, spec.tau, sys.C)
    if n == 2:
        return _vf_lr_hyperspherical_2(spec.tau, sys.C)
    return _vf_lr_hyperspherical(n, spec.tau, sys.C)


# -- reductions ------------------------------------------------------------


def reduce(sys: SystemId, C: float) -> SystemId:
    if sys.kind == "ll-full":
        return SystemId("ll-reduced", sys.n, sys.spec, C)
    if sys.kind == "lr-full":
        return SystemId("lr-reduced", sys.n, sys.spec, C)
    raise ValueError("only full systems can be reduced")


def reduce_state(sys: SystemId, state):
    """Project a full state to the reduced chart at its own level ``C = lam_{2n+1}``.

    LL: ``p_k = lam_k``, ``p_{n+k} = lam_{n+k} + C x_k``.
    LR: ``p_k = lam_k + C y_k``, ``p_{n+k} = lam_{n+k}``.
    """
    s = np.asarray(state, dtype=float)
    n = sys.n
    x, y = s[..., :n], s[..., n : 2 * n]
    lam = s[..., 2 * n + 1 :]
    C = lam[..., 2 * n : 2 * n + 1]
    px, py = lam[..., :n], lam[..., n : 2 * n]
    if sys.kind == "ll-full":
        p = np.concatenate([px, py + C * x], axis=-1)
    elif sys.kind == "lr-full":
        p = np.concatenate([px + C * y, py], axis=-1)
    else:
        raise ValueError("only full systems can be reduced")
    return np.concatenate([x, y, p], axis=-1)


def lift_state(sys: SystemId, state, z=0.0):
    """Inverse of :func:`reduce_state` for a reduced system, placing the point at height ``z``."""
    s = np.asarray(state, dtype=float)
    n, C = sys.n, sys.C
    x, y, p = s[..., :n], s[..., n : 2 * n], s[..., 2 * n :]
    px, py = p[..., :n], p[..., n:]
    if sys.kind == "ll-reduced":
        lam = np.concatenate([px, py - C * x], axis=-1)
    elif sys.kind == "lr-reduced":
        lam = np.concatenate([px - C * y, py], axis=-1)
    else:
        raise ValueError("lift applies to Cartesian reduced systems")
    zc = np.full(s.shape[:-1] + (1,), float(z))
    cc = np.full(s.shape[:-1] + (1,), C)
    return np.concatenate([x, y, zc, lam, cc], axis=-1)


def magnetic_coefficients(sys: SystemId):
    """Per-plane field strengths ``B_k`` of ``F = sum B_k dx_k ^ dy_k``.

    LL reduction: ``-C / sigma_k``; LR reduction: ``C``.
    """
    if sys.kind == "ll-reduced":
        return -sys.C / np.asarray(sys.spec.sigma)
    if sys.kind in ("lr-reduced", "lr-hyperspherical"):
        return np.full(sys.n, sys.C)
    raise ValueError("magnetic coefficients exist for reduced systems only")
