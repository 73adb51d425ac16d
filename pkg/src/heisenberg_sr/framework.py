"""Generic sub-Riemannian machinery on a coordinate chart.

A structure is given by ``m`` vector fields spanning the distribution and the
matrix of their inner products. From these we get the momentum functions
``P_X(q, lam) = lam(X(q))``, the cometric ``beta_q = F^T g^{-1} F`` and the
Hamiltonian ``H = 1/2 sum g^{ab} P_a P_b``.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ad
from .fields import ScalarField, generic_solve
from .group import MetricSpec, frame_components, riemannian_metric_components, validate_metric

__all__ = [
    "SingularGram",
    "SubRiemannianStructure",
    "left_structure",
    "right_structure",
    "momentum_function",
    "build_sr_hamiltonian",
    "cometric_matrix",
    "cometric_map",
    "vector_field_bracket",
]


class SingularGram(ValueError):
    pass


@dataclass(frozen=True)
class SubRiemannianStructure:
    """Distribution frame plus Gram matrix on a base chart of dimension ``base_dim``.

    ``frame(q)`` returns ``m`` legs (lists of ``base_dim`` components) and
    ``gram(q)`` an ``m x m`` nested list, both over generic components ``q``.
    """

    base_dim: int
    rank: int
    frame: Callable
    gram: Callable
    name: str = "structure"


def _gram_from_metric(legs, metric):
    m = len(legs)
    dim = len(metric)
    # metric applied to each leg first; legs are sparse
    ml = []
    for leg in legs:
        col = []
        for i in range(dim):
            s = 0
            for j in range(dim):
                if ad.is_zero(leg[j]) or ad.is_zero(metric[i][j]):
                    continue
                s = s + metric[i][j] * leg[j]
            col.append(s)
        ml.append(col)
    out = [[0] * m for _ in range(m)]
    for a in range(m):
        for b in range(a, m):
            s = 0
            for i in range(dim):
                if ad.is_zero(legs[a][i]) or ad.is_zero(ml[b][i]):
                    continue
                s = s + legs[a][i] * ml[b][i]
            out[a][b] = s
            out[b][a] = s
    return out


def _invariant_structure(side, spec):
    spec = validate_metric(spec)
    n = spec.n

    def frame(q):
        return frame_components(side, q, n)

    if side == "left":
        # the left frame is orthogonal for the left-invariant metric
        diag = list(spec.sigma) * 2

        def gram(q):
            return [[diag[a] if a == b else 0 for b in range(2 * n)] for a in range(2 * n)]

    else:

        def gram(q):
            return _gram_from_metric(frame_components(side, q, n), riemannian_metric_components(spec, q))

    return SubRiemannianStructure(2 * n + 1, 2 * n, frame, gram, f"{side}-invariant")


def left_structure(spec: MetricSpec):
    """Left-invariant distribution with the left-invariant metric (LL)."""
    return _invariant_structure("left", spec)


def right_structure(spec: MetricSpec):
    """Right-invariant distribution with the left-invariant metric (LR)."""
    return _invariant_structure("right", spec)


def momentum_function(field, base_dim, name="P"):
    """``P_X(q, lam) = sum_j X^j(q) lam_j`` on the cotangent chart ``(q, lam)``.

    ``field(q)`` returns the ``base_dim`` components of ``X`` at ``q``.
    """

    def fn(z):
        q, lam = z[:base_dim], z[base_dim:]
        comps = field(q)
        s = 0
        for c, l in zip(comps, lam):
            if not ad.is_zero(c):
                s = s + c * l
        return s

    return ScalarField(name, 2 * base_dim, fn)


def _momenta(s, q, lam):
    out = []
    for leg in s.frame(q):
        p = 0
        for c, l in zip(leg, lam):
            if not ad.is_zero(c):
                p = p + c * l
        out.append(p)
    return out


def build_sr_hamiltonian(s: SubRiemannianStructure, name="H_sR"):
    d = s.base_dim

    def fn(z):
        q, lam = z[:d], z[d:]
        p = _momenta(s, q, lam)
        try:
            c = generic_solve(s.gram(q), p)
        except ZeroDivisionError as exc:
            raise SingularGram(str(exc)) from None
        h = 0
        for pa, ca in zip(p, c):
            h = h + pa * ca
        return 0.5 * h

    return ScalarField(name, 2 * d, fn)


def _numeric(nested):
    return np.array([[float(ad.value_of(c)) for c in row] for row in nested])


def cometric_matrix(s: SubRiemannianStructure, q):
    """``beta_q = F^T g^{-1} F`` for a single base point ``q``."""
    q = list(np.asarray(q, dtype=float))
    f = _numeric(s.frame(q))
    g = _numeric(s.gram(q))
    try:
        beta = f.T @ np.linalg.solve(g, f)
    except np.linalg.LinAlgError as exc:
        raise SingularGram(str(exc)) from None
    return 0.5 * (beta + beta.T)


def cometric_map(s: SubRiemannianStructure, q, lam):
    """The horizontal vector ``beta_q(lam)``."""
    return cometric_matrix(s, q) @ np.asarray(lam, dtype=float)


def vector_field_bracket(xf, yf, q):
    """Lie bracket ``[X, Y](q) = DY X - DX Y`` of generic vector fields."""
    q = np.asarray(q, dtype=float)
    z = ad.variables(q, 1)
    dim = q.size

    def jac(field):
        comps = field(z)
        vals = np.zeros(dim)
        jm = np.zeros((dim, dim))
        for i, c in enumerate(comps):
            if isinstance(c, ad.Jet):
                vals[i] = c.v
                jm[i] = c.gradient()
            else:
                vals[i] = float(c)
        return vals, jm

    xv, dx = jac(xf)
    yv, dy = jac(yf)
    return dy @ xv - dx @ yv
