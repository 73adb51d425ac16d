import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenberg_sr.group import (
    AlgebraVector,
    DimensionMismatch,
    GroupElement,
    LastSigmaNotOne,
    MetricSpec,
    NonPositiveTau,
    NotSorted,
    SymplecticForm,
    frame,
    frame_components,
    group_inv,
    group_mul,
    identity,
    left_translation_differential,
    lie_bracket,
    matrix_to_symplectic_chart,
    riemannian_metric_matrix,
    right_translation_differential,
    symplectic_mul,
    symplectic_to_matrix_chart,
    validate_metric,
)
from heisenberg_sr.framework import vector_field_bracket


def g_(x, y, z):
    return GroupElement(np.atleast_1d(x), np.atleast_1d(y), z)


def _rand(rng, n):
    return GroupElement.from_array(rng.normal(size=2 * n + 1))


def test_multiplication_of_generators():
    h = g_(1.0, 0.0, 0.0) * g_(0.0, 1.0, 0.0)
    assert np.array_equal(h.as_array(), [1.0, 1.0, 1.0])


def test_identity_and_inverse(rng):
    for n in (1, 2, 3):
        g = _rand(rng, n)
        assert np.array_equal((g * identity(n)).as_array(), g.as_array())
        assert np.allclose((g * group_inv(g)).as_array(), 0, atol=1e-15)
        assert np.allclose((group_inv(g) * g).as_array(), 0, atol=1e-15)


def test_matrix_representation_is_a_homomorphism(rng):
    for n in (1, 2, 3):
        g, h = _rand(rng, n), _rand(rng, n)
        assert np.allclose((g * h).matrix(), g.matrix() @ h.matrix(), atol=1e-14)


ints = st.integers(-50, 50)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.lists(st.lists(ints, min_size=2 * n + 1, max_size=2 * n + 1), min_size=3, max_size=3)))
def test_associativity_exact_on_integers(vals):
    g, h, k = (GroupElement.from_array(np.array(v, float)) for v in vals)
    assert np.array_equal(((g * h) * k).as_array(), (g * (h * k)).as_array())


def test_associativity_on_floats(rng):
    for n in (1, 2, 3):
        for _ in range(100):
            g, h, k = (_rand(rng, n) for _ in range(3))
            assert np.allclose(((g * h) * k).as_array(), (g * (h * k)).as_array(), atol=1e-14, rtol=0)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        group_mul(identity(1), identity(2))
    with pytest.raises(DimensionMismatch):
        GroupElement(np.zeros(2), np.zeros(1), 0.0)


def test_elements_are_immutable(rng):
    g = _rand(rng, 2)
    with pytest.raises(ValueError):
        g.x[0] = 1.0
    with pytest.raises(Exception):
        g.z = 3.0


def test_symplectic_convention():
    for n in (1, 2, 3):
        om = SymplecticForm(n)
        e = np.eye(2 * n)
        for i in range(n):
            assert om(e[i], e[n + i]) == 1.0
            assert om(e[n + i], e[i]) == -1.0
        assert np.allclose(om.matrix, -om.matrix.T)
    assert SymplecticForm(1, sign=-1)(np.array([1.0, 0]), np.array([0, 1.0])) == -1.0


def test_polarization_map(rng):
    assert np.array_equal(symplectic_to_matrix_chart(np.zeros(2), 2.5).as_array(), [0, 0, 2.5])
    # the e-direction maps to (1, 0, 0): no z-offset in this polarization
    assert np.array_equal(symplectic_to_matrix_chart(np.array([1.0, 0.0]), 0.0).as_array(), [1, 0, 0])
    for n in (1, 2, 3):
        for _ in range(100):
            u, v = rng.normal(size=2 * n), rng.normal(size=2 * n)
            zu, zv = rng.normal(size=2)
            lhs = symplectic_to_matrix_chart(u, zu) * symplectic_to_matrix_chart(v, zv)
            rhs = symplectic_to_matrix_chart(*symplectic_mul((u, zu), (v, zv), n))
            assert np.allclose(lhs.as_array(), rhs.as_array(), atol=1e-13)
        g = _rand(rng, n)
        back = symplectic_to_matrix_chart(*matrix_to_symplectic_chart(g))
        assert np.allclose(back.as_array(), g.as_array(), atol=1e-15)


def test_lie_bracket():
    n = 2
    e1, e2, f1 = (AlgebraVector.basis(n, k, 0) for k in ("e", "e", "f"))
    e2 = AlgebraVector.basis(n, "e", 1)
    xi = AlgebraVector.basis(n, "xi")
    b = lie_bracket(e1, f1)
    assert b.alpha == 1.0 and np.all(b.a == 0)
    assert lie_bracket(e1, e2).alpha == 0.0
    for v in (e1, e2, f1, xi):
        assert lie_bracket(xi, v).alpha == 0.0 and np.all(lie_bracket(xi, v).a == 0)
    with pytest.raises(DimensionMismatch):
        lie_bracket(e1, AlgebraVector.basis(1, "e"))


def test_bracket_properties(rng):
    n = 3
    for _ in range(20):
        u, v, w = (AlgebraVector(rng.normal(size=2 * n), rng.normal()) for _ in range(3))
        a, b = rng.normal(size=2)
        assert np.isclose(lie_bracket(u, v).alpha, -lie_bracket(v, u).alpha)
        assert np.isclose(lie_bracket(a * u + b * w, v).alpha, a * lie_bracket(u, v).alpha + b * lie_bracket(w, v).alpha)
        jac = lie_bracket(u, lie_bracket(v, w)) + lie_bracket(v, lie_bracket(w, u)) + lie_bracket(w, lie_bracket(u, v))
        assert jac.alpha == 0.0 and np.all(jac.a == 0)
        assert np.all(lie_bracket(u, v).a == 0)


def test_frames_at_identity_and_sample_points():
    for n in (1, 2, 3):
        for side in ("left", "right"):
            f = frame(side, identity(n))
            assert np.array_equal(f, np.eye(2 * n + 1)[: 2 * n])
    assert frame("left", g_(2.0, 0.0, 0.0))[1, 2] == 2.0
    assert frame("right", g_(0.0, 3.0, 0.0))[0, 2] == 3.0
    with pytest.raises(ValueError):
        frame("up", identity(1))


def test_frame_invariance(rng):
    for n in (1, 2, 3):
        g, h = _rand(rng, n), _rand(rng, n)
        e = frame("left", identity(n))
        assert np.allclose((left_translation_differential(g) @ e.T).T, frame("left", g))
        assert np.allclose((right_translation_differential(g) @ e.T).T, frame("right", g))
        # pushforward by a left translation preserves the left frame exactly
        assert np.allclose((left_translation_differential(g) @ frame("left", h).T).T, frame("left", g * h))


def test_translation_differentials_are_jacobians(rng):
    g, h = _rand(rng, 2), _rand(rng, 2)
    eps = 1e-6
    jl = np.empty((5, 5))
    jr = np.empty((5, 5))
    for i in range(5):
        d = np.zeros(5)
        d[i] = eps
        hp, hm = GroupElement.from_array(h.as_array() + d), GroupElement.from_array(h.as_array() - d)
        jl[:, i] = ((g * hp).as_array() - (g * hm).as_array()) / (2 * eps)
        jr[:, i] = ((hp * g).as_array() - (hm * g).as_array()) / (2 * eps)
    assert np.allclose(jl, left_translation_differential(g), atol=1e-8)
    assert np.allclose(jr, right_translation_differential(g), atol=1e-8)


def test_bracket_generating(rng):
    for n in (1, 2, 3):
        for side in ("left", "right"):
            for _ in range(10):
                q = rng.normal(size=2 * n + 1)
                legs = [lambda z, k=k: frame_components(side, z, n)[k] for k in range(2 * n)]
                vecs = [np.array([float(np.asarray(c)) for c in leg(list(q))]) for leg in legs]
                vecs.append(vector_field_bracket(legs[0], legs[n], q))
                sv = np.linalg.svd(np.array(vecs), compute_uv=False)
                assert np.sum(sv > 1e-10 * sv[0]) == 2 * n + 1


def test_validate_metric():
    assert validate_metric(MetricSpec((2.0, 1.0), 1.0))
    with pytest.raises(NotSorted):
        validate_metric(MetricSpec((1.0, 2.0), 1.0))
    with pytest.raises(NonPositiveTau):
        validate_metric(MetricSpec((1.0,), 0.0))
    with pytest.raises(LastSigmaNotOne):
        validate_metric(MetricSpec((3.0, 2.0), 1.0))


def test_riemannian_metric(rng):
    assert np.array_equal(riemannian_metric_matrix(MetricSpec((1.0,), 1.0), identity(1)), np.eye(3))
    m = riemannian_metric_matrix(MetricSpec((1.0,), 1.0), g_(1.0, 0.0, 0.0))
    assert m[1, 1] == 2.0 and m[1, 2] == -1.0 and m[2, 1] == -1.0
    spec = MetricSpec((3.0, 2.0, 1.0), 0.5)
    assert np.allclose(riemannian_metric_matrix(spec, identity(3)), np.diag([3, 2, 1, 3, 2, 1, 0.5]))
    for n in (1, 2, 3):
        spec = MetricSpec(tuple(np.linspace(2, 1, n)), 1.7)
        for _ in range(100):
            m = riemannian_metric_matrix(spec, _rand(rng, n))
            assert np.allclose(m, m.T)
            assert np.min(np.linalg.eigvalsh(m)) > 0


def test_metric_is_left_invariant(rng):
    # dL_g^T G(g h) dL_g = G(h)
    spec = MetricSpec((2.0, 1.0), 1.3)
    for _ in range(10):
        g, h = _rand(rng, 2), _rand(rng, 2)
        d = left_translation_differential(g)
        assert np.allclose(d.T @ riemannian_metric_matrix(spec, g * h) @ d, riemannian_metric_matrix(spec, h))
