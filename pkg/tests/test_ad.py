import numpy as np
import pytest

from heisenberg_sr import ad
from heisenberg_sr.fields import ScalarField, fd_gradient, generic_solve, gradient_error


def _fd_hessian(f, x, h=1e-4):
    d = x.size
    out = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out[i] = (fd_gradient(f, x + e) - fd_gradient(f, x - e)) / (2 * h)
    return out


def _mixed(z):
    x, y, w = z
    return ad.sin(x) * ad.exp(y) + ad.sqrt(1.0 + w * w) / (2.0 + ad.cos(x * y)) + ad.atan2(y, x) * ad.log(3.0 + w) - ad.tan(0.3 * w) ** 3


def test_gradient_and_hessian_match_finite_differences(rng):
    f = ScalarField("mixed", 3, _mixed)
    pts = rng.uniform(-1, 1, (20, 3)) + np.array([1.5, 0, 0])
    assert gradient_error(f, pts) < 1e-8
    for x in pts[:5]:
        assert np.allclose(f.hessian(x), _fd_hessian(f, x), atol=1e-6)


@pytest.mark.parametrize("angle", np.linspace(-np.pi + 0.05, np.pi - 0.05, 13))
def test_atan2_branches_share_derivatives(angle):
    f = ScalarField("angle", 2, lambda z: ad.atan2(z[1], z[0]))
    p = 1.7 * np.array([np.cos(angle), np.sin(angle)])
    assert np.isclose(f(p), angle)
    assert np.allclose(f.grad(p), [-p[1] / 2.89, p[0] / 2.89])
    assert np.allclose(f.hessian(p), _fd_hessian(f, p), atol=1e-6)


def test_batched_jets_have_batched_shapes(rng):
    f = ScalarField("sq", 2, lambda z: z[0] * z[0] * z[1])
    x = rng.normal(size=(4, 5, 2))
    assert f(x).shape == (4, 5)
    assert f.grad(x).shape == (4, 5, 2)
    assert f.hessian(x).shape == (4, 5, 2, 2)


def test_constant_field_has_zero_derivatives():
    f = ScalarField("one", 3, lambda z: 1.0)
    assert np.all(f.grad(np.ones(3)) == 0)
    assert np.all(f.hessian(np.ones(3)) == 0)


def test_integer_powers():
    f = ScalarField("p", 1, lambda z: z[0] ** 3 + z[0] ** 0.5)
    x = np.array([2.0])
    assert np.isclose(f.grad(x)[0], 12 + 0.5 / np.sqrt(2))


def test_generic_solve_matches_numpy(rng):
    a = rng.normal(size=(4, 4))
    a = a @ a.T + 4 * np.eye(4)
    b = rng.normal(size=4)
    c = generic_solve([list(r) for r in a], list(b))
    assert np.allclose(c, np.linalg.solve(a, b))
    with pytest.raises(ZeroDivisionError):
        generic_solve([[0.0, 1.0], [1.0, 0.0]], [1.0, 1.0])
