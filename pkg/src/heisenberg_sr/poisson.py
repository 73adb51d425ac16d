"""Poisson tensors on phase-space charts, brackets, derived integrals and rank audits."""

import json
from dataclasses import dataclass, field

import numpy as np

from . import ad
from .fields import ScalarField
from .hyperspherical import SingularChartPoint, guard_hyperspherical, radial_factor

__all__ = [
    "PoissonTensor",
    "DerivedField",
    "IntegralFamily",
    "AuditReport",
    "DegenerateSampling",
    "RankParityError",
    "canonical_tensor",
    "magnetic_tensor",
    "hyperspherical_tensor",
    "pushforward_tensor",
    "bracket",
    "bracket_matrix",
    "derived_integral",
    "jacobi_residual",
    "audit",
]


class DegenerateSampling(RuntimeError):
    pass


class RankParityError(AssertionError):
    pass


class PoissonTensor:
    """Skew matrix field ``Lambda(x)`` with ``{f, g} = df . Lambda . dg``.

    ``fn(z)`` returns the upper triangle as a dict ``{(i, j): entry}`` with
    ``i < j`` over generic components ``z``; missing entries are zero.
    """

    def __init__(self, dim, fn, name="Lambda", guard=None, constant=False):
        self.dim = int(dim)
        self.fn = fn
        self.name = name
        self.guard = guard
        self.constant = constant

    def __repr__(self):
        return f"PoissonTensor({self.name!r}, dim={self.dim})"

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"{self.name}: expected points of dimension {self.dim}, got {x.shape[-1]}")
        if self.guard is not None:
            self.guard(x)
        return x

    def matrix(self, x):
        x = self._points(x)
        batch = x.shape[:-1]
        out = np.zeros(batch + (self.dim, self.dim))
        for (i, j), v in self.fn([x[..., k] for k in range(self.dim)]).items():
            v = np.asarray(ad.value_of(v), dtype=float)
            out[..., i, j] = v
            out[..., j, i] = -v
        return out

    def matrix_with_derivative(self, x):
        """``(Lambda, dLambda)`` with ``dLambda[..., i, j, k] = d Lambda_ij / d x_k``."""
        x = self._points(x)
        batch = x.shape[:-1]
        lam = np.zeros(batch + (self.dim, self.dim))
        dlam = np.zeros(batch + (self.dim, self.dim, self.dim))
        if self.constant:
            return self.matrix(x), dlam
        for (i, j), v in self.fn(ad.variables(x, 1)).items():
            if isinstance(v, ad.Jet):
                lam[..., i, j] = v.v
                lam[..., j, i] = -v.v
                g = v.gradient()
                dlam[..., i, j, :] = g
                dlam[..., j, i, :] = -g
            else:
                lam[..., i, j] = v
                lam[..., j, i] = -v
        return lam, dlam


def canonical_tensor(m, name=None):
    """Canonical structure on ``(q_1..q_m, p_1..p_m)``: ``{q_i, p_j} = delta_ij``."""

    def fn(z):
        return {(i, m + i): 1.0 for i in range(m)}

    return PoissonTensor(2 * m, fn, name or f"canonical({m})", constant=True)


def magnetic_tensor(n, C, sign="LR"):
    """Magnetic structure on ``(x, y, p)`` in R^{4n}.

    ``{x_k, p_k} = {y_k, p_{n+k}} = 1`` and ``{p_k, p_{n+k}} = +C`` for the LR
    reduction (``p_k = lambda_k + C y_k``) or ``-C`` for the LL reduction
    (``p_{n+k} = lambda_{n+k} + C x_k``).
    """
    if sign not in ("LL", "LR"):
        raise ValueError("sign must be 'LL' or 'LR'")
    c = float(C) if sign == "LR" else -float(C)
    d = 2 * n

    def fn(z):
        out = {(i, d + i): 1.0 for i in range(d)}
        if c != 0.0:
            for k in range(n):
                out[(d + k, d + n + k)] = c
        return out

    return PoissonTensor(2 * d, fn, f"magnetic({sign}, n={n}, C={C:g})", constant=True)


def hyperspherical_tensor(n, C):
    """Reduced LR structure in hyperspherical coordinates ``(r, theta, p_r, p_theta)``.

    Canonical pairs plus ``{p_a, p_phi_k} = (C/2) d(rho_k^2)/da`` for the radial
    coordinates ``a`` in ``(r, theta_1..theta_{n-1})``, where ``phi_k`` is the
    polar angle of plane ``k``.
    """
    d = 2 * n
    C = float(C)

    def fn(z):
        r = z[0]
        th = [None] + list(z[1:d])
        out = {(i, d + i): 1.0 for i in range(d)}
        if C == 0.0:
            return out
        rho2 = []
        for k in range(1, n + 1):
            f = r * r
            for j in range(1, n):
                kind = radial_factor(n, k, j)
                if kind == "cos":
                    f = f * ad.cos(th[j]) ** 2
                elif kind == "sin":
                    f = f * ad.sin(th[j]) ** 2
            rho2.append(f)
        for k in range(1, n + 1):
            pk = d + n + k - 1
            out[(d, pk)] = C * rho2[k - 1] / r
            for j in range(1, n):
                kind = radial_factor(n, k, j)
                if kind == "cos":
                    out[(d + j, pk)] = -C * rho2[k - 1] * ad.tan(th[j])
                elif kind == "sin":
                    out[(d + j, pk)] = C * rho2[k - 1] / ad.tan(th[j])
        return out

    return PoissonTensor(2 * d, fn, f"hyperspherical(n={n}, C={C:g})", guard_hyperspherical)


def pushforward_tensor(base, chart, inverse, name=None, guard=None):
    """``Lambda'(w) = D chart(z) Lambda(z) D chart(z)^T`` with ``z = inverse(w)``.

    ``chart`` and ``inverse`` map generic component lists. Numeric only (no
    derivative of the result is available).
    """
    dim = base.dim

    def matrix(w):
        w = np.asarray(w, dtype=float)
        if guard is not None:
            guard(w)
        z = np.stack(
            [np.asarray(c, float) for c in inverse([w[..., i] for i in range(dim)])],
            axis=-1,
        )
        comps = chart(ad.variables(z, 1))
        jac = np.stack([np.asarray(c.gradient()) for c in comps], axis=-2)
        return jac @ base.matrix(z) @ np.swapaxes(jac, -1, -2)

    t = PoissonTensor(dim, None, name or f"pushforward({base.name})", guard)
    t.matrix = matrix
    return t


def bracket(lam, f, g, x):
    """``{f, g}(x) = df . Lambda . dg`` (batched over leading axes of ``x``)."""
    x = np.asarray(x, dtype=float)
    if f is g:
        return np.zeros(x.shape[:-1])
    gf, gg = f.grad(x), g.grad(x)
    return np.einsum("...i,...ij,...j->...", gf, lam.matrix(x), gg)


def bracket_matrix(lam, fields, x):
    """Skew matrix ``B_ij = {f_i, f_j}`` at every point of ``x``."""
    x = np.asarray(x, dtype=float)
    grads = np.stack([f.grad(x) for f in fields], axis=-2)
    b = grads @ lam.matrix(x) @ np.swapaxes(grads, -1, -2)
    return 0.5 * (b - np.swapaxes(b, -1, -2))


class DerivedField(ScalarField):
    """The field ``{f, g}`` with an exact gradient built from Hessians of ``f, g``.

    The gradient is

        d_k {f, g} = (H_f Lambda dg)_k - (H_g Lambda df)_k + df_i (d_k Lambda_ij) dg_j.
    """

    def __init__(self, lam, f, g, name=None):
        guard = f.guard or g.guard
        super().__init__(name or "{%s,%s}" % (f.name, g.name), f.dim, None, guard)
        self.lam, self.f, self.g = lam, f, g

    def __call__(self, x):
        x = self._points(x)
        return np.asarray(bracket(self.lam, self.f, self.g, x), dtype=float)

    def jet(self, x, order=1):
        raise NotImplementedError("derived fields expose values and gradients only")

    def grad(self, x):
        x = self._points(x)
        jf, jg = self.f.jet(x, 2), self.g.jet(x, 2)
        df, dg = jf.gradient(), jg.gradient()
        hf, hg = jf.hessian(), jg.hessian()
        lam, dlam = self.lam.matrix_with_derivative(x)
        out = np.einsum("...ki,...i->...k", hf, np.einsum("...ij,...j->...i", lam, dg))
        out = out - np.einsum("...ki,...i->...k", hg, np.einsum("...ij,...j->...i", lam, df))
        out = out + np.einsum("...i,...ijk,...j->...k", df, dlam, dg)
        return out

    def hessian(self, x):
        raise NotImplementedError("derived fields carry first derivatives only")


def derived_integral(lam, f, g, name=None):
    """``{f, g}`` as a field with exact gradient; zero field when ``f is g``."""
    if f is g:
        return ScalarField(name or "{%s,%s}" % (f.name, f.name), f.dim, lambda z: 0.0, f.guard)
    return DerivedField(lam, f, g, name)


def jacobi_residual(lam, x):
    """Max over points and index triples of the cyclic sum of coordinate brackets."""
    m, dm = lam.matrix_with_derivative(x)
    # t[ijk] = sum_l Lambda_il d_l Lambda_jk
    t = np.einsum("...il,...jkl->...ijk", m, dm)
    cyc = t + np.einsum("...ijk->...jki", t) + np.einsum("...ijk->...kij", t)
    return float(np.max(np.abs(cyc))) if cyc.size else 0.0


@dataclass
class IntegralFamily:
    """First integrals of a system on its chart.

    ``system`` must provide ``sample(rng, k)`` returning non-singular states
    and a ``label`` string; ``tensor`` is the chart's Poisson structure.
    """

    system: object
    members: list
    tensor: PoissonTensor
    claimed_ddim: int
    claimed_dind: object = "audit"

    @property
    def names(self):
        return [f.name for f in self.members]

    def member(self, name):
        for f in self.members:
            if f.name == name:
                return f
        raise KeyError(name)


@dataclass
class AuditReport:
    system: str
    members: list
    seed: int
    samples: int
    dim: int
    ddim: int
    dind: int
    complete: bool
    gram_max_abs: float
    jacobian_singular_values: list = field(repr=False, default_factory=list)
    gram_singular_values: list = field(repr=False, default_factory=list)
    claimed_ddim: object = None
    claimed_dind: object = None

    def to_dict(self):
        return {
            "system": self.system,
            "members": list(self.members),
            "seed": self.seed,
            "samples": self.samples,
            "dim": self.dim,
            "ddim": self.ddim,
            "dind": self.dind,
            "complete": self.complete,
            "gram_max_abs": self.gram_max_abs,
            "claimed_ddim": self.claimed_ddim,
            "claimed_dind": self.claimed_dind,
            "jacobian_singular_values": self.jacobian_singular_values,
            "gram_singular_values": self.gram_singular_values,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _rank(sv, threshold):
    return int(np.sum(sv > threshold))


def audit(lam, fam, samples=50, seed=0, rel_tol=1e-8, gram_tol=1e-8):
    """Estimate ``ddim`` and ``dind`` of a family by sampling.

    At each point the Jacobian rows ``df_i`` are normalized to unit length and
    its rank is the number of singular values above ``rel_tol`` times the
    largest. The bracket matrix is normalized entrywise by
    ``|df_i| |df_j| |Lambda|`` and its rank counts singular values above
    ``gram_tol``. Both ranks are maximized over samples and
    ``dind = ddim - rank(B)``.
    """
    if samples < 30:
        raise ValueError("audit needs at least 30 sample points")
    rng = np.random.default_rng(seed)
    pts = []
    tries = 0
    while len(pts) < samples and tries < 20 * samples:
        tries += 1
        x = fam.system.sample(rng, 1)[0]
        try:
            for f in fam.members:
                if f.guard is not None:
                    f.guard(x)
            if lam.guard is not None:
                lam.guard(x)
        except SingularChartPoint:
            continue
        pts.append(x)
    if not pts:
        raise DegenerateSampling("no non-singular sample points found")
    pts = np.array(pts)

    grads = np.stack([f.grad(pts) for f in fam.members], axis=1)
    norms = np.linalg.norm(grads, axis=-1)
    safe = np.where(norms > 0, norms, 1.0)
    jsv = np.linalg.svd(grads / safe[..., None], compute_uv=False)
    lmat = lam.matrix(pts)
    b = grads @ lmat @ np.swapaxes(grads, -1, -2)
    b = 0.5 * (b - np.swapaxes(b, -1, -2))
    lnorm = np.linalg.norm(lmat, ord=2, axis=(-2, -1))
    bn = b / (safe[:, :, None] * safe[:, None, :] * lnorm[:, None, None])
    bsv = np.linalg.svd(bn, compute_uv=False)

    ddim = 0
    grank = 0
    for s_j, s_b in zip(jsv, bsv):
        ddim = max(ddim, _rank(s_j, rel_tol * s_j[0]))
        r = _rank(s_b, gram_tol)
        if r % 2:
            raise RankParityError(f"bracket matrix rank {r} is odd; threshold straddles a singular value pair")
        grank = max(grank, r)
    dind = ddim - grank
    system_label = getattr(fam.system, "label", str(fam.system))
    return AuditReport(
        system=system_label,
        members=fam.names,
        seed=int(seed),
        samples=len(pts),
        dim=lam.dim,
        ddim=ddim,
        dind=dind,
        complete=ddim + dind == lam.dim,
        gram_max_abs=float(np.max(np.abs(b))),
        jacobian_singular_values=jsv.tolist(),
        gram_singular_values=bsv.tolist(),
        claimed_ddim=fam.claimed_ddim,
        claimed_dind=fam.claimed_dind,
    )
