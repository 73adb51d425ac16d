"""Hyperspherical chart on the reduced phase space T*R^{2n}.

Coordinates ``(r, theta_1, ..., theta_{2n-1})``: ``theta_1..theta_{n-1}`` are
radial angles splitting the radius among the n planes, ``theta_{n+k-1}`` is the
polar angle in the k-th plane ``(x_k, y_k)``. Plane radii are

    rho_1 = r cos(theta_1) ... cos(theta_{n-1}),
    rho_k = r cos(theta_1) ... cos(theta_{n-k}) sin(theta_{n-k+1}),   k >= 2,

and ``(x_k, y_k) = rho_k (cos, sin)(theta_{n+k-1})``. Momenta are the
cotangent lift ``p_a = sum_i p_i dq_i/da``; with ``beta_k = x_k p_k + y_k p_{n+k}``

    p_r          = <q, p> / |q|
    p_theta_j    = beta_m / alpha_m - alpha_m (beta_1 + ... + beta_{m-1}),  m = n+1-j
    p_theta_{n+k-1} = x_k p_{n+k} - y_k p_k

where ``alpha_m = rho_m / sqrt(rho_1^2 + ... + rho_{m-1}^2)`` equals
``tan(theta_j)``.

Phase-space points are flat arrays: Cartesian ``(x, y, p)`` of length 4n and
hyperspherical ``(r, theta, p_r, p_theta)`` of length 4n. Angles are zero-based
in code: ``theta_j`` lives at index ``j`` of the position block.
"""

import numpy as np

from . import ad

__all__ = [
    "EPS",
    "SingularChartPoint",
    "plane_radii_sq",
    "radial_factor",
    "hs_from_cartesian",
    "cartesian_from_hs",
    "to_hyperspherical",
    "from_hyperspherical",
    "guard_cartesian",
    "guard_hyperspherical",
    "hyperspherical_metric",
    "position_jacobian",
    "reduced_metric",
]

EPS = 1e-6


class SingularChartPoint(ValueError):
    """Point on (or within ``eps`` of) a coordinate singularity of the chart."""

    def __init__(self, message, eps=EPS):
        super().__init__(f"{message} (eps={eps:g})")
        self.eps = eps


def radial_factor(n, k, j):
    """How plane ``k`` depends on radial angle ``j`` (both 1-based).

    Returns ``"cos"``, ``"sin"`` or ``None``.
    """
    if j <= n - k:
        return "cos"
    if k >= 2 and j == n - k + 1:
        return "sin"
    return None


def _plane_radius_factors(r, th, n):
    rho = []
    for k in range(1, n + 1):
        f = r
        for j in range(1, n):
            kind = radial_factor(n, k, j)
            if kind == "cos":
                f = f * ad.cos(th[j])
            elif kind == "sin":
                f = f * ad.sin(th[j])
        rho.append(f)
    return rho


def plane_radii_sq(r, th, n):
    """Squared plane radii ``rho_k^2`` over generic components; ``th[j]`` is theta_j."""
    return [f * f for f in _plane_radius_factors(r, th, n)]


def hs_from_cartesian(z, n):
    """Map generic Cartesian components ``(x, y, p)`` to ``(r, theta, p_r, p_theta)``."""
    x, y, p = z[:n], z[n : 2 * n], z[2 * n :]
    rho2 = [x[k] * x[k] + y[k] * y[k] for k in range(n)]
    beta = [x[k] * p[k] + y[k] * p[n + k] for k in range(n)]
    r2 = rho2[0]
    for v in rho2[1:]:
        r2 = r2 + v
    r = ad.sqrt(r2)

    th = [None] * (2 * n)  # th[0] unused, th[j] = theta_j
    pth = [None] * (2 * n)
    partial = [rho2[0]]
    partial_beta = [beta[0]]
    for m in range(2, n + 1):
        partial.append(partial[-1] + rho2[m - 1])
        partial_beta.append(partial_beta[-1] + beta[m - 1])
    for j in range(1, n):
        m = n + 1 - j
        rho_m = ad.sqrt(rho2[m - 1])
        below = ad.sqrt(partial[m - 2])
        th[j] = ad.atan2(rho_m, below)
        alpha = rho_m / below
        pth[j] = beta[m - 1] / alpha - alpha * partial_beta[m - 2]
    for k in range(1, n + 1):
        th[n + k - 1] = ad.atan2(y[k - 1], x[k - 1])
        pth[n + k - 1] = x[k - 1] * p[n + k - 1] - y[k - 1] * p[k - 1]
    total_beta = partial_beta[-1]
    p_r = total_beta / r
    return [r] + th[1:] + [p_r] + pth[1:]


def cartesian_from_hs(w, n):
    """Inverse of :func:`hs_from_cartesian` over generic components."""
    r = w[0]
    th = [None] + list(w[1 : 2 * n])
    p_r = w[2 * n]
    pth = [None] + list(w[2 * n + 1 :])
    rho = _plane_radius_factors(r, th, n)

    # squared scale factors of the orthogonal chart for the radial angles
    h2 = [None] * n
    c2 = r * r
    for j in range(1, n):
        h2[j] = c2
        c2 = c2 * ad.cos(th[j]) * ad.cos(th[j])

    radial = p_r / r
    shared = []
    for k in range(1, n + 1):
        s = radial
        for j in range(1, n):
            kind = radial_factor(n, k, j)
            if kind == "cos":
                s = s - ad.tan(th[j]) * pth[j] / h2[j]
            elif kind == "sin":
                s = s + pth[j] / (ad.tan(th[j]) * h2[j])
        shared.append(s)

    xs, ys, px, py = [], [], [], []
    for k in range(1, n + 1):
        phi = th[n + k - 1]
        xk = rho[k - 1] * ad.cos(phi)
        yk = rho[k - 1] * ad.sin(phi)
        ang = pth[n + k - 1] / (rho[k - 1] * rho[k - 1])
        xs.append(xk)
        ys.append(yk)
        px.append(xk * shared[k - 1] - yk * ang)
        py.append(yk * shared[k - 1] + xk * ang)
    return xs + ys + px + py


def guard_cartesian(pts, eps=EPS):
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[-1] // 4
    x, y = pts[..., :n], pts[..., n : 2 * n]
    rho = np.sqrt(x * x + y * y)
    r = np.sqrt(np.sum(rho * rho, axis=-1))
    if np.any(r <= eps):
        raise SingularChartPoint("hyperspherical chart undefined at r = 0", eps)
    if np.any(rho <= eps * r[..., None]):
        raise SingularChartPoint("point lies on a coordinate plane-collapse locus", eps)
    return pts


def guard_hyperspherical(pts, eps=EPS):
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[-1] // 4
    r = pts[..., 0]
    if np.any(r <= eps):
        raise SingularChartPoint("hyperspherical chart undefined at r <= 0", eps)
    rad = pts[..., 1:n]
    if rad.size and (np.any(np.abs(np.cos(rad)) <= eps) or np.any(np.abs(np.sin(rad)) <= eps)):
        raise SingularChartPoint("radial angle on a singular locus", eps)
    return pts


def _apply(fn, pts, n):
    pts = np.asarray(pts, dtype=float)
    out = fn([pts[..., i] for i in range(4 * n)], n)
    return np.stack([np.broadcast_to(np.asarray(c, float), pts.shape[:-1]) for c in out], axis=-1)


def to_hyperspherical(state, eps=EPS):
    """Cartesian reduced state(s) ``(x, y, p)`` -> ``(r, theta, p_r, p_theta)``."""
    state = guard_cartesian(state, eps)
    return _apply(hs_from_cartesian, state, state.shape[-1] // 4)


def from_hyperspherical(state, eps=EPS):
    state = guard_hyperspherical(state, eps)
    return _apply(cartesian_from_hs, state, state.shape[-1] // 4)


def position_jacobian(r, theta, n):
    """``d(x, y) / d(r, theta)`` at one point (2n x 2n), via exact jets."""
    w = np.concatenate([[r], np.asarray(theta, float)])
    z = ad.variables(w, 1)
    pos = cartesian_from_hs(z + [0.0] * (2 * n), n)[: 2 * n]
    return np.array([np.asarray(c.gradient(), float) for c in pos])


def reduced_metric(q, tau=1.0):
    """Riemannian metric of the reduced LR system on R^{2n}: ``E + tau w w^T``, ``w = (y, -x)``."""
    q = np.asarray(q, dtype=float)
    n = q.size // 2
    w = np.concatenate([q[n:], -q[:n]])
    return np.eye(2 * n) + tau * np.outer(w, w)


def hyperspherical_metric(n, r, theta, tau=1.0, eps=EPS):
    """Reduced LR metric in hyperspherical coordinates ``(r, theta_1..theta_{2n-1})``.

    Flat part ``dr^2 + sum h_j^2 dtheta_j^2 + sum rho_k^2 dphi_k^2`` plus the
    magnetic correction ``tau (sum_k rho_k^2 dphi_k)^2``.
    """
    theta = np.asarray(theta, dtype=float)
    guard_hyperspherical(np.concatenate([[r], theta, np.zeros(2 * n)]), eps)
    th = [None] + list(theta)
    g = np.zeros((2 * n, 2 * n))
    g[0, 0] = 1.0
    c2 = r * r
    for j in range(1, n):
        g[j, j] = c2
        c2 = c2 * np.cos(th[j]) ** 2
    rho2 = np.array(plane_radii_sq(r, th, n), dtype=float)
    planar = np.arange(n, 2 * n)
    g[planar, planar] = rho2
    g[np.ix_(planar, planar)] += tau * np.outer(rho2, rho2)
    return g
