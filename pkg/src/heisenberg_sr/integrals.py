"""First-integral families of the LL and LR systems.

Member names follow the indices used in the formulas: ``I0..`` for the full
systems and the reduced LL system, ``It0..`` for the reduced LR integrals and
``Jt<k>`` for the bracket-generated ones.
"""

import numpy as np

from . import ad
from . import hyperspherical as hs
from .fields import ScalarField, pullback
from .hamiltonians import SystemId, hamiltonian, system_tensor
from .poisson import IntegralFamily, derived_integral

__all__ = [
    "integral_family",
    "ll_full_integrals",
    "ll_reduced_integrals",
    "lr_full_integrals",
    "lr_hyperspherical_integrals",
    "lr_reduced_integrals",
]


def ll_full_integrals(sys: SystemId):
    n, d = sys.n, sys.dim
    o = 2 * n + 1  # offset of lam in the state
    members = [ScalarField("I0", d, lambda z: z[o + 2 * n])]
    for k in range(n):
        members.append(ScalarField(f"I{k + 1}", d, lambda z, k=k: z[o + n + k]))
    for k in range(n):
        members.append(ScalarField(f"I{n + k + 1}", d, lambda z, k=k: z[o + k] + z[n + k] * z[o + 2 * n]))
    for k in range(n):

        def fn(z, k=k):
            u = z[o + n + k] + z[o + 2 * n] * z[k]
            return z[o + k] * z[o + k] + u * u

        members.append(ScalarField(f"I{2 * n + k + 1}", d, fn))
    return IntegralFamily(sys, members, system_tensor(sys), 3 * n + 1, n + 1)


def ll_reduced_integrals(sys: SystemId):
    """The LL integrals written in the reduced chart at ``lam_{2n+1} = C``."""
    n, d, C = sys.n, sys.dim, sys.C
    p = 2 * n
    members = []
    for k in range(n):
        members.append(ScalarField(f"I{k + 1}", d, lambda z, k=k: z[p + n + k] - C * z[k]))
    for k in range(n):
        members.append(ScalarField(f"I{n + k + 1}", d, lambda z, k=k: z[p + k] + C * z[n + k]))
    for k in range(n):
        members.append(
            ScalarField(f"I{2 * n + k + 1}", d, lambda z, k=k: z[p + k] * z[p + k] + z[p + n + k] * z[p + n + k])
        )
    return IntegralFamily(sys, members, system_tensor(sys), 3 * n, n)


def lr_full_integrals(sys: SystemId):
    n, d = sys.n, sys.dim
    o = 2 * n + 1
    lam_tensor = system_tensor(sys)
    members = [hamiltonian(sys)]
    members[0].name = "I0"

    for j in range(n):

        def fn(z, j=j):
            x, y, l = z[j], z[n + j], z[o:]
            return x * l[n + j] - y * l[j] + 0.5 * (x * x - y * y) * l[2 * n]

        members.append(ScalarField(f"I{j + 1}", d, fn))

    for k in range(1, n):

        def fn(z, k=k):
            x, y, l = z[:n], z[n : 2 * n], z[o:]
            a = y[k] * l[0] - x[0] * l[n + k] + x[k] * l[n] - y[0] * l[k]
            b = x[0] * l[k] - x[k] * l[0] - y[0] * l[n + k] + y[k] * l[n] + (x[0] * y[k] - x[k] * y[0]) * l[2 * n]
            return a * a + b * b

        members.append(ScalarField(f"I{n + k}", d, fn))

    members.append(ScalarField(f"I{2 * n}", d, lambda z: z[o + 2 * n]))
    first = members[n + 1] if n > 1 else None
    for l in range(1, n - 1):
        members.append(derived_integral(lam_tensor, first, members[n + 1 + l], f"I{2 * n + l}"))
    return IntegralFamily(sys, members, lam_tensor, len(members), d - len(members))


def _hs_members(n, C):
    """Generic closed forms of the reduced LR integrals on the hyperspherical chart."""
    out = []

    def split(w):
        return w[0], [None] + list(w[1 : 2 * n]), [None] + list(w[2 * n + 1 :])

    def plane(i):
        def fn(w):
            r, th, pth = split(w)
            return pth[n + i - 1] + 0.5 * C * hs.plane_radii_sq(r, th, n)[i - 1]

        return fn

    for i in range(1, n + 1):
        out.append((f"It{i}", plane(i)))

    if n >= 2:

        def first(w):
            r, th, pth = split(w)
            a, b, c = pth[n - 1], pth[n], pth[n + 1]
            cn, sn = ad.cos(th[n - 1]), ad.sin(th[n - 1])
            s = b + c
            return a * a - s * s + b * b / (cn * cn) + c * c / (sn * sn)

        out.append((f"It{n + 1}", first))

    for i in range(2, n):

        def higher(w, i=i):
            r, th, pth = split(w)
            cosines = [ad.cos(th[n - k]) for k in range(1, i)]
            prod = 1.0
            for c in cosines:
                prod = prod * c
            varrho = 0.0
            partial = 1.0
            for ii in range(1, i):
                t = th[n - ii]
                varrho = pth[n - ii] * ad.sin(t) * partial + varrho / ad.cos(t)
                partial = partial * ad.cos(t)
            t = ad.tan(th[n - i])
            a = pth[n] / prod * t - pth[n + i] * prod / t
            b = pth[n - i] * prod + varrho * t
            return a * a + b * b

        out.append((f"It{n + i}", higher))
    return out


def _claims(n):
    if n <= 2:
        return 2 * n, 2 * n
    return 3 * n - 2, n + 2


def _with_derived(sys, members, tensor):
    n = sys.n
    if n >= 3:
        base = {f.name: f for f in members}
        for k in range(2, n):
            members.append(derived_integral(tensor, base[f"It{n + 1}"], base[f"It{n + k}"], f"Jt{k}"))
    ddim, dind = _claims(n)
    return IntegralFamily(sys, members, tensor, ddim, dind)


def lr_hyperspherical_integrals(sys: SystemId):
    n, d = sys.n, sys.dim
    h = hamiltonian(sys)
    h.name = "It0"
    members = [h] + [ScalarField(name, d, fn, hs.guard_hyperspherical) for name, fn in _hs_members(n, sys.C)]
    return _with_derived(sys, members, system_tensor(sys))


def lr_reduced_integrals(sys: SystemId):
    """Reduced LR integrals on the Cartesian chart, pulled back through the hyperspherical map."""
    n, d = sys.n, sys.dim
    h = hamiltonian(sys)
    h.name = "It0"
    members = [h]
    for name, fn in _hs_members(n, sys.C):
        hsf = ScalarField(name, d, fn)
        members.append(pullback(hsf, lambda z: hs.hs_from_cartesian(z, n), d, name, hs.guard_cartesian))
    return _with_derived(sys, members, system_tensor(sys))


def integral_family(sys: SystemId) -> IntegralFamily:
    return {
        "ll-full": ll_full_integrals,
        "ll-reduced": ll_reduced_integrals,
        "lr-full": lr_full_integrals,
        "lr-reduced": lr_reduced_integrals,
        "lr-hyperspherical": lr_hyperspherical_integrals,
    }[sys.kind](sys)
