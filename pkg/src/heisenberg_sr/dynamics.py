"""Integrators, trajectories, closed-form LL helices and magnetic orbit closure."""

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .hamiltonians import SystemId, hamiltonian, hamiltonian_vector_field, tensor_vector_field
from .hyperspherical import SingularChartPoint

__all__ = [
    "METHODS",
    "IntegrationError",
    "ZeroFrequency",
    "Trajectory",
    "integrate",
    "HelixParams",
    "helix_params",
    "helix_solution",
    "helix_velocity",
    "helix_state",
    "helix_z_rate",
    "horizontality_residual",
    "helix_from_state",
    "conservation_report",
    "OrbitResult",
    "orbit_classify",
    "circle_fit_residual",
    "trajectory_csv",
    "write_csv",
]

METHODS = ("dopri", "rk4", "midpoint")


class IntegrationError(RuntimeError):
    """Integration aborted; ``t`` and ``state`` hold the last good point."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class ZeroFrequency(ValueError):
    pass


@dataclass
class Trajectory:
    system: SystemId
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    method: str
    rtol: float = None
    atol: float = None
    step: float = None
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]

    def at(self, t):
        """Cubic Hermite dense output at time(s) ``t`` inside the integrated span."""
        t = np.asarray(t, dtype=float)
        ts = self.times
        forward = ts[-1] >= ts[0]
        key = ts if forward else -ts
        tk = t if forward else -t
        i = np.clip(np.searchsorted(key, tk, side="right") - 1, 0, len(ts) - 2)
        t0, t1 = ts[i], ts[i + 1]
        h = (t1 - t0)[..., None]
        s = ((t - t0) / (t1 - t0))[..., None]
        y0, y1 = self.states[i], self.states[i + 1]
        f0, f1 = self.derivs[i], self.derivs[i + 1]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1

    def energies(self):
        return hamiltonian(self.system)(self.states)

    def energy_drift(self):
        e = self.energies()
        return float(np.max(np.abs(e - e[0])) / max(1.0, abs(e[0])))


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array(_A[6] + [0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _checked(f, t, y):
    try:
        v = f(y)
    except SingularChartPoint as exc:
        raise IntegrationError(f"trajectory reached a singular chart locus at t={t:.17g}: {exc}", t, y) from None
    if not np.all(np.isfinite(v)):
        raise IntegrationError(f"non-finite vector field at t={t:.17g}", t, y)
    return v


def _initial_step(f, y0, f0, direction, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = f(y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _dopri(f, y0, t_end, rtol, atol, max_steps, max_step=np.inf):
    direction = 1.0 if t_end >= 0 else -1.0
    span = abs(t_end)
    t, y = 0.0, y0.copy()
    k1 = _checked(f, t, y)
    ts, ys, fs = [0.0], [y.copy()], [k1.copy()]
    if span == 0:
        return ts, ys, fs, {"accepted": 0, "rejected": 0}
    h = min(_initial_step(f, y, k1, direction, rtol, atol), span, max_step)
    accepted = rejected = 0
    k = np.empty((7, y.size))
    while abs(t) < span:
        if accepted + rejected >= max_steps:
            raise IntegrationError(f"maximum number of steps reached at t={t:.17g}", t, y)
        h = min(h, span - abs(t), max_step)
        if h <= 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.17g}", t, y)
        hs = direction * h
        k[0] = k1
        for i in range(1, 7):
            k[i] = _checked(f, t + _C[i] * hs, y + hs * (np.asarray(_A[i]) @ k[:i]))
        y_new = y + hs * (_B5 @ k)
        err_vec = hs * (_E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if not np.isfinite(err):
            h *= 0.2
            rejected += 1
            continue
        if err <= 1.0:
            t = t + hs
            if abs(span - abs(t)) < 1e-15 * span:
                t = direction * span
            y = y_new
            k1 = k[6].copy()
            ts.append(t)
            ys.append(y.copy())
            fs.append(k1.copy())
            accepted += 1
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** (-0.2)))
        else:
            rejected += 1
            fac = max(0.2, 0.9 * err ** (-0.2))
        h *= fac
    return ts, ys, fs, {"accepted": accepted, "rejected": rejected}


def _fixed_steps(t_end, step):
    if step is None or step <= 0:
        raise ValueError("fixed-step methods need a positive step")
    m = max(1, int(round(abs(t_end) / step)))
    return m, t_end / m


def _rk4(f, y0, t_end, step):
    m, h = _fixed_steps(t_end, step)
    y = y0.copy()
    f0 = _checked(f, 0.0, y)
    ts, ys, fs = [0.0], [y.copy()], [f0]
    for i in range(m):
        t = i * h
        k1 = fs[-1]
        k2 = _checked(f, t + h / 2, y + h / 2 * k1)
        k3 = _checked(f, t + h / 2, y + h / 2 * k2)
        k4 = _checked(f, t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ts.append((i + 1) * h)
        ys.append(y.copy())
        fs.append(_checked(f, (i + 1) * h, y))
    return ts, ys, fs, {"accepted": m, "rejected": 0}


def _midpoint(f, y0, t_end, step, tol=1e-13, max_iter=50):
    m, h = _fixed_steps(t_end, step)
    y = y0.copy()
    ts, ys, fs = [0.0], [y.copy()], [_checked(f, 0.0, y)]
    iters = 0
    for i in range(m):
        t = i * h
        y_new = y + h * fs[-1]
        for it in range(max_iter):
            nxt = y + h * _checked(f, t + h / 2, 0.5 * (y + y_new))
            delta = np.max(np.abs(nxt - y_new))
            y_new = nxt
            if delta <= tol * max(1.0, np.max(np.abs(y_new))):
                break
        else:
            raise IntegrationError(f"midpoint fixed-point iteration did not converge at t={t:.17g}", t, y)
        iters += it + 1
        y = y_new
        ts.append((i + 1) * h)
        ys.append(y.copy())
        fs.append(_checked(f, (i + 1) * h, y))
    return ts, ys, fs, {"accepted": m, "rejected": 0, "fixed_point_iterations": iters}


def integrate(
    sys: SystemId,
    x0,
    t_end,
    method="dopri",
    rtol=1e-10,
    atol=1e-12,
    step=None,
    path="closed",
    reverse=False,
    max_steps=2_000_000,
    max_step=None,
):
    """Integrate the Hamilton equations of ``sys`` from ``x0`` over ``[0, t_end]``.

    ``method`` is ``"dopri"`` (adaptive Dormand-Prince 5(4)), ``"rk4"`` or
    ``"midpoint"`` (implicit midpoint, canonical charts only); the fixed-step
    methods need ``step``. ``path`` picks the closed-form vector field or the
    ``Lambda grad H`` evaluation. ``reverse`` negates the vector field.
    A negative ``t_end`` integrates backwards in time. ``max_step`` caps the
    adaptive step, which keeps the Hermite dense output accurate.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    x0 = np.array(x0, dtype=float).reshape(-1)
    if x0.size != sys.dim:
        raise ValueError(f"initial state has {x0.size} components, {sys.kind} with n={sys.n} needs {sys.dim}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial state must be finite")
    try:
        sys.guard(x0)
    except SingularChartPoint as exc:
        raise IntegrationError(f"initial state lies on a singular chart locus: {exc}", 0.0, x0) from None
    if method == "midpoint" and not sys.canonical:
        raise ValueError("implicit midpoint is only available on canonical charts")
    vf = hamiltonian_vector_field(sys) if path == "closed" else tensor_vector_field(sys)
    f = (lambda y: -vf(y)) if reverse else vf
    if method == "dopri":
        ts, ys, fs, stats = _dopri(f, x0, float(t_end), rtol, atol, max_steps, max_step or np.inf)
    elif method == "rk4":
        ts, ys, fs, stats = _rk4(f, x0, float(t_end), step)
    else:
        ts, ys, fs, stats = _midpoint(f, x0, float(t_end), step)
    return Trajectory(
        sys,
        np.array(ts),
        np.array(ys),
        np.array(fs),
        method,
        rtol if method == "dopri" else None,
        atol if method == "dopri" else None,
        step if method != "dopri" else None,
        stats,
    )


# -- helices -----------------------------------------------------------------


@dataclass(frozen=True)
class HelixParams:
    """Coefficients of the closed-form LL geodesic.

    ``x_k = a_k cos(w_k t) + b_k sin(w_k t) + c_k``,
    ``y_k = -b_k cos(w_k t) + a_k sin(w_k t) + d_k``, ``w_k = lam_z / sigma_k``.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    c0: float
    freq: np.ndarray
    lam_z: float
    sigma: np.ndarray

    @property
    def n(self):
        return len(self.a)

    @property
    def radii(self):
        return np.hypot(self.a, self.b)


def helix_params(a, b, c, d, c0, lam_z, sigma=None):
    a, b, c, d = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (a, b, c, d))
    sigma = np.ones_like(a) if sigma is None else np.asarray(sigma, dtype=float)
    if lam_z == 0:
        raise ZeroFrequency("helix formulas need lam_{2n+1} != 0")
    return HelixParams(a, b, c, d, float(c0), lam_z / sigma, float(lam_z), sigma)


def helix_solution(p: HelixParams, t):
    """Base point ``(x, y, z)`` along the helix at time(s) ``t``."""
    t = np.asarray(t, dtype=float)[..., None]
    w = p.freq
    cs, sn = np.cos(w * t), np.sin(w * t)
    c2, s2 = np.cos(2 * w * t), np.sin(2 * w * t)
    a, b, c, d = p.a, p.b, p.c, p.d
    x = a * cs + b * sn + c
    y = -b * cs + a * sn + d
    z = p.c0 + np.sum(
        0.5 * w * t * (a**2 + b**2)
        + 0.25 * (a**2 - b**2) * s2
        - 0.5 * a * b * c2
        + a * c * sn
        - b * c * cs,
        axis=-1,
        keepdims=True,
    )
    return np.concatenate([x, y, z], axis=-1)


def helix_velocity(p: HelixParams, t):
    t = np.asarray(t, dtype=float)[..., None]
    w = p.freq
    cs, sn = np.cos(w * t), np.sin(w * t)
    xd = w * (-p.a * sn + p.b * cs)
    yd = w * (p.b * sn + p.a * cs)
    x = p.a * cs + p.b * sn + p.c
    zd = np.sum(x * yd, axis=-1, keepdims=True)
    return np.concatenate([xd, yd, zd], axis=-1)


def helix_z_rate(p: HelixParams, t):
    """Time derivative of the closed-form ``z(t)``, differentiated term by term."""
    t = np.asarray(t, dtype=float)[..., None]
    w = p.freq
    a, b, c = p.a, p.b, p.c
    return np.sum(
        0.5 * w * (a**2 + b**2)
        + 0.5 * w * (a**2 - b**2) * np.cos(2 * w * t)
        + w * a * b * np.sin(2 * w * t)
        + w * a * c * np.cos(w * t)
        + w * b * c * np.sin(w * t),
        axis=-1,
    )


def horizontality_residual(p: HelixParams, t):
    """Max of ``|z' - sum x_j y_j'|`` along the closed form at times ``t``."""
    q = helix_solution(p, t)
    v = helix_velocity(p, t)
    n = p.n
    return float(np.max(np.abs(helix_z_rate(p, t) - np.sum(q[..., :n] * v[..., n : 2 * n], axis=-1))))


def helix_state(p: HelixParams, t):
    """Full LL phase-space state ``(q, lam)`` along the helix."""
    q = helix_solution(p, t)
    v = helix_velocity(p, t)
    n = p.n
    x = q[..., :n]
    lam_x = p.sigma * v[..., :n]
    lam_y = p.sigma * v[..., n : 2 * n] - x * p.lam_z
    lz = np.full(q.shape[:-1] + (1,), p.lam_z)
    return np.concatenate([q, lam_x, lam_y, lz], axis=-1)


def helix_from_state(sys: SystemId, state) -> HelixParams:
    """Helix coefficients of the LL geodesic through a full state with ``lam_{2n+1} != 0``."""
    if sys.kind != "ll-full":
        raise ValueError("helices describe the full LL system")
    s = np.asarray(state, dtype=float)
    n = sys.n
    x, y, z = s[:n], s[n : 2 * n], s[2 * n]
    lam = s[2 * n + 1 :]
    lz = lam[2 * n]
    if lz == 0:
        raise ZeroFrequency("helix formulas need lam_{2n+1} != 0")
    b = lam[:n] / lz
    a = (lam[n : 2 * n] + x * lz) / lz
    c = x - a
    d = y + b
    c0 = z + np.sum(a * b / 2 + b * c)
    return helix_params(a, b, c, d, c0, lz, sys.spec.sigma)


# -- monitoring ----------------------------------------------------------------


def conservation_report(traj: Trajectory, fam):
    """Max relative drift ``|f(x(t)) - f(x(0))| / max(1, |f(x(0))|)`` per member."""
    if fam.system.dim != traj.system.dim:
        raise ValueError("family and trajectory live on different charts")
    out = {}
    for f in fam.members:
        v = np.asarray(f(traj.states), dtype=float)
        out[f.name] = float(np.max(np.abs(v - v[0])) / max(1.0, abs(v[0])))
    return out


def circle_fit_residual(points):
    """Max radial residual of an algebraic least-squares circle fit to 2D points."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    m = np.column_stack([x, y, np.ones_like(x)])
    sol, *_ = np.linalg.lstsq(m, x**2 + y**2, rcond=None)
    cx, cy = sol[0] / 2, sol[1] / 2
    r = math.sqrt(max(sol[2] + cx**2 + cy**2, 0.0))
    return float(np.max(np.abs(np.hypot(x - cx, y - cy) - r)))


# -- orbit closure -----------------------------------------------------------------


@dataclass
class OrbitResult:
    closed: bool
    period: float
    min_return_distance: float
    horizon: float
    frequencies: list
    ratio_evidence: list

    def to_dict(self):
        return {
            "closed": self.closed,
            "period": self.period,
            "min_return_distance": self.min_return_distance,
            "horizon": self.horizon,
            "frequencies": self.frequencies,
            "ratio_evidence": self.ratio_evidence,
        }


def _linear_generator(sys):
    n, C = sys.n, sys.C
    sigma = np.asarray(sys.spec.sigma)
    a = np.zeros((4 * n, 4 * n))
    for k in range(n):
        a[k, 2 * n + k] = 1 / sigma[k]
        a[n + k, 3 * n + k] = 1 / sigma[k]
        a[2 * n + k, 3 * n + k] = -C / sigma[k]
        a[3 * n + k, 2 * n + k] = C / sigma[k]
    return a


def orbit_classify(sys: SystemId, x0, horizon=1e3, tol=1e-6, max_den=64):
    """Decide whether the reduced LL orbit through ``x0`` closes within ``horizon``.

    The reduced LL flow is linear, so it is propagated exactly through the
    eigendecomposition of its generator. The first return time is located by
    scanning the return distance and refining with a root of
    ``(x(t) - x0) . x'(t)``; the orbit counts as closed when that distance is
    below ``tol * max(1, |x0|)``.
    """
    if sys.kind != "ll-reduced":
        raise ValueError("orbit classification applies to the reduced LL system")
    if sys.C == 0:
        raise ValueError("orbit classification needs C != 0")
    x0 = np.asarray(x0, dtype=float)
    gen = _linear_generator(sys)
    mu, vec = np.linalg.eig(gen)
    coef = np.linalg.solve(vec, x0.astype(complex))

    def state(t):
        t = np.asarray(t, dtype=float)
        return np.real(np.exp(np.multiply.outer(t, mu)) * coef @ vec.T)

    def gfun(t):
        return float((state(t) - x0) @ (gen @ state(t)))

    freqs = np.abs(sys.C) / np.asarray(sys.spec.sigma)
    evidence = []
    for k in range(1, len(freqs)):
        ratio = freqs[k] / freqs[0]
        frac = Fraction(ratio).limit_denominator(max_den)
        evidence.append(
            {"ratio": float(ratio), "approx": f"{frac.numerator}/{frac.denominator}", "error": abs(ratio - float(frac))}
        )

    dt = 2 * np.pi / np.max(freqs) / 64
    grid = np.arange(1, int(np.ceil(horizon / dt)) + 1) * dt
    scale = max(1.0, float(np.linalg.norm(x0)))
    best = np.inf
    for lo in range(0, len(grid), 4096):
        tt = grid[lo : lo + 4096 + 2]
        dist = np.linalg.norm(state(tt) - x0, axis=-1)
        for i in range(1, len(tt) - 1):
            if not (dist[i] <= dist[i - 1] and dist[i] <= dist[i + 1]):
                continue
            a, b = tt[i - 1], tt[i + 1]
            ga, gb = gfun(a), gfun(b)
            if ga < 0 < gb:
                t_star = brentq(gfun, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            else:
                t_star = tt[i]
            d = float(np.linalg.norm(state(t_star) - x0))
            best = min(best, d)
            if d < tol * scale:
                return OrbitResult(True, float(t_star), d, horizon, freqs.tolist(), evidence)
    return OrbitResult(False, float("nan"), float(best), horizon, freqs.tolist(), evidence)


# -- export ------------------------------------------------------------------------


def trajectory_csv(traj: Trajectory, fam=None):
    """CSV text: header ``t,<state labels>,<integral names>``, 17 significant digits."""
    labels = list(traj.system.labels)
    cols = [traj.times[:, None], traj.states]
    if fam is not None:
        labels += fam.names
        cols.append(np.column_stack([np.asarray(f(traj.states), float) for f in fam.members]))
    data = np.hstack(cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + labels)
    for row in data:
        w.writerow(["%.17g" % v for v in row])
    return buf.getvalue()


def write_csv(traj: Trajectory, path, fam=None):
    with open(path, "w", newline="") as fh:
        fh.write(trajectory_csv(traj, fam))
