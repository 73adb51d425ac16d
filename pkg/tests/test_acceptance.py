"""Acceptance criteria 1-10, one test each, with a PASS/FAIL line per criterion.

The lines are printed in the pytest terminal summary (see conftest) and when
this file is run as a script: ``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest

from heisenberg_sr import hyperspherical as hs
from heisenberg_sr.dynamics import (
    conservation_report,
    helix_from_state,
    helix_params,
    helix_state,
    horizontality_residual,
    integrate,
    orbit_classify,
)
from heisenberg_sr.fields import gradient_error
from heisenberg_sr.group import MetricSpec
from heisenberg_sr.hamiltonians import SystemId, builder_hamiltonian, hamiltonian
from heisenberg_sr.integrals import integral_family
from heisenberg_sr.poisson import audit, bracket, bracket_matrix, hyperspherical_tensor, magnetic_tensor, pushforward_tensor

RESULTS = {}

LL_SIGMA = {1: (1.0,), 2: (2.0, 1.0), 3: (3.0, 2.0, 1.0)}


def _ll(kind, n, C=0.0):
    return SystemId(kind, n, MetricSpec(LL_SIGMA[n]), C)


def _lr(kind, n, C=0.0):
    return SystemId(kind, n, MetricSpec.standard(n), C)


def record(num, ok, detail):
    RESULTS[num] = (bool(ok), detail)
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_builder_oracle():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 3):
        for sys in (_ll("ll-full", n), _lr("lr-full", n)):
            x = rng.normal(size=(1000, sys.dim))
            a, b = hamiltonian(sys)(x), builder_hamiltonian(sys)(x)
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))))
    dt = time.perf_counter() - t0
    record(1, worst < 1e-10 and dt < 5, f"max rel err {worst:.2e} (< 1e-10), {dt:.2f}s (< 5s)")


def test_criterion_02_helix_oracle():
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    grid = np.linspace(0.0, 10.0, 2001)
    sup = hor = 0.0
    for n in (1, 2, 3):
        sys = _ll("ll-full", n)
        for _ in range(3):
            p = helix_params(*rng.normal(size=(4, n)), rng.normal(), rng.choice([-1, 1]) * rng.uniform(0.5, 2.0), sys.spec.sigma)
            tr = integrate(sys, helix_state(p, 0.0), 10.0, rtol=1e-10, atol=1e-12, max_step=0.05)
            sup = max(sup, float(np.max(np.abs(tr.at(grid) - helix_state(p, grid)))))
            sup = max(sup, float(np.max(np.abs(tr.states - helix_state(p, tr.times)))))
            hor = max(hor, horizontality_residual(p, grid))
    dt = time.perf_counter() - t0
    record(2, sup < 1e-6 and hor < 1e-10 and dt < 10, f"sup dev {sup:.2e} (< 1e-6), horizontality {hor:.2e} (< 1e-10), {dt:.2f}s (< 10s)")


def test_criterion_03_conservation():
    rng = np.random.default_rng(103)
    t0 = time.perf_counter()
    worst, where = 0.0, ""
    for n in (1, 2, 3):
        for sys in (_ll("ll-full", n), _lr("lr-full", n), _lr("lr-reduced", n, 1.0)):
            fam = integral_family(sys)
            for x0 in sys.sample(rng, 10):
                tr = integrate(sys, x0, 10.0, rtol=1e-10, atol=1e-12)
                for name, d in conservation_report(tr, fam).items():
                    if d > worst:
                        worst, where = d, f"{sys.kind} n={n} {name}"
    dt = time.perf_counter() - t0
    record(3, worst < 1e-8 and dt < 120, f"max drift {worst:.2e} at {where} (< 1e-8), {dt:.1f}s (< 120s)")


def test_criterion_04_involutivity():
    rng = np.random.default_rng(104)
    worst = 0.0
    for n in (1, 2):
        sys = _lr("lr-reduced", n, 1.0)
        fam = integral_family(sys)
        worst = max(worst, float(np.max(np.abs(bracket_matrix(fam.tensor, fam.members, sys.sample(rng, 100))))))
    sys = _lr("lr-hyperspherical", 2, 1.0)
    fam = integral_family(sys)
    ex = float(np.max(np.abs(bracket_matrix(fam.tensor, fam.members, sys.sample(rng, 100)))))
    record(4, worst < 1e-9 and ex < 1e-9, f"reduced LR max|B| {worst:.2e}, two-plane chart max|B| {ex:.2e} (< 1e-9)")


def test_criterion_05_completeness():
    parts, ok = [], True
    sys = _lr("lr-reduced", 3, 1.0)
    fam = integral_family(sys)
    rep = audit(fam.tensor, fam, samples=50, seed=5)  # raises on odd bracket rank
    ok &= (rep.ddim, rep.dind) == (7, 5) and rep.ddim + rep.dind == 12
    parts.append(f"LR reduced n=3 ({rep.ddim},{rep.dind})")
    for n in (1, 2, 3):
        sys = _ll("ll-full", n)
        fam = integral_family(sys)
        rep = audit(fam.tensor, fam, samples=50, seed=5)
        ok &= rep.ddim == 3 * n + 1 and rep.ddim + rep.dind == 4 * n + 2
        parts.append(f"LL full n={n} ({rep.ddim},{rep.dind})")
    record(5, ok, "; ".join(parts) + "; bracket ranks even")


def test_criterion_06_non_involutivity():
    rng = np.random.default_rng(106)
    sys = _lr("lr-reduced", 3, 1.0)
    fam = integral_family(sys)
    val = float(np.max(np.abs(bracket(fam.tensor, fam.member("It4"), fam.member("It5"), sys.sample(rng, 100)))))
    record(6, val > 1e-3, f"max |{{It4, It5}}| = {val:.3g} (> 1e-3)")


def _two_plane_metric(r, t1):
    g = np.zeros((4, 4))
    g[0, 0], g[1, 1] = 1.0, r * r
    g[2, 2] = 0.5 * r * r * np.cos(t1) ** 2 * (2 + r * r + r * r * np.cos(2 * t1))
    g[3, 3] = 0.5 * r * r * np.sin(t1) ** 2 * (2 + r * r - r * r * np.cos(2 * t1))
    g[2, 3] = g[3, 2] = 0.25 * r**4 * np.sin(2 * t1) ** 2
    return g


def _two_plane_table(r, t1, C):
    m = np.zeros((8, 8))
    m[np.arange(4), np.arange(4, 8)] = 1.0
    m[4, 6], m[4, 7] = r * C * np.cos(t1) ** 2, r * C * np.sin(t1) ** 2
    m[5, 6] = -r * r * C * np.sin(t1) * np.cos(t1)
    m[5, 7] = -m[5, 6]
    return m - m.T


def test_criterion_07_chart_integrity():
    rng = np.random.default_rng(107)
    rt = 0.0
    for n in (1, 2, 3):
        z = _lr("lr-reduced", n).sample(rng, 1000)
        rt = max(rt, float(np.max(np.abs(hs.from_hyperspherical(hs.to_hyperspherical(z)) - z))))
    C = 1.0
    sys = _lr("lr-hyperspherical", 2, C)
    pushed = pushforward_tensor(magnetic_tensor(2, C), lambda z: hs.hs_from_cartesian(z, 2), lambda w: hs.cartesian_from_hs(w, 2))
    closed = hyperspherical_tensor(2, C)
    met = tab = 0.0
    for w in sys.sample(rng, 200):
        r, th = w[0], w[1:4]
        q = hs.from_hyperspherical(w)[:4]
        jac = hs.position_jacobian(r, th, 2)
        met = max(met, float(np.max(np.abs(jac.T @ hs.reduced_metric(q) @ jac - _two_plane_metric(r, th[0])))))
        ref = _two_plane_table(r, th[0], C)
        tab = max(tab, float(np.max(np.abs(pushed.matrix(w) - ref))), float(np.max(np.abs(closed.matrix(w) - ref))))
    ok = rt < 1e-10 and met < 1e-10 and tab < 1e-10
    record(7, ok, f"round trip {rt:.1e}, metric {met:.1e}, Poisson table {tab:.1e} (all < 1e-10)")


def _all_fields():
    for kind in ("ll-full", "ll-reduced", "lr-full", "lr-reduced", "lr-hyperspherical"):
        for n in (1, 2, 3):
            sys = _ll(kind, n, 0.7) if kind.startswith("ll") else _lr(kind, n, 0.7)
            fields = list(integral_family(sys).members) + [hamiltonian(sys)]
            if sys.full:
                fields.append(builder_hamiltonian(sys))
            yield sys, fields


def test_criterion_08_derivatives():
    rng = np.random.default_rng(108)
    worst, where, count = 0.0, "", 0
    for sys, fields in _all_fields():
        x = sys.sample(rng, 100)
        for f in fields:
            e = gradient_error(f, x, h=1e-5)
            count += 1
            if e > worst:
                worst, where = e, f"{sys.kind} n={sys.n} {f.name}"
    record(8, worst < 1e-6, f"{count} fields, worst rel err {worst:.1e} at {where} (< 1e-6)")


def test_criterion_09_orbit_periods():
    rng = np.random.default_rng(109)
    s1 = SystemId("ll-reduced", 1, MetricSpec((1.0,)), 1.0)
    s2 = SystemId("ll-reduced", 2, MetricSpec((2.0, 1.0)), 1.0)
    r1 = orbit_classify(s1, s1.sample(rng, 1)[0])
    r2 = orbit_classify(s2, s2.sample(rng, 1)[0])
    e1, e2 = abs(r1.period - 2 * np.pi), abs(r2.period - 4 * np.pi)
    ok = r1.closed and r2.closed and e1 < 1e-6 and e2 < 1e-5
    record(9, ok, f"n=1 period err {e1:.1e} (< 1e-6), n=2 period err {e2:.1e} (< 1e-5)")


def test_criterion_10_convergence():
    sys = SystemId("ll-full", 1, MetricSpec((1.0,)))
    p = helix_params(1.0, 0.5, 0.2, -0.1, 0.0, 1.0)
    errs = []
    for h in (0.1, 0.05, 0.025):
        tr = integrate(sys, helix_state(p, 0.0), 10.0, "rk4", step=h)
        errs.append(float(np.max(np.abs(tr.states - helix_state(p, tr.times)))))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    rng = np.random.default_rng(110)
    tr = integrate(sys, sys.sample(rng, 1)[0], 100.0, "midpoint", step=0.01)
    drift = tr.energy_drift()
    ok = all(12 <= r <= 20 for r in ratios) and drift < 1e-8
    record(10, ok, f"rk4 ratios {', '.join(f'{r:.2f}' for r in ratios)} (in [12, 20]), midpoint drift {drift:.1e} (< 1e-8)")


def summary_lines():
    out = []
    for num in range(1, 11):
        if num in RESULTS:
            ok, detail = RESULTS[num]
            out.append(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            out.append(f"criterion {num:2d}: FAIL  (did not run to completion)")
    return out


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
