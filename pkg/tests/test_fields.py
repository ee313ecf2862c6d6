import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from acm3 import fields as F
from acm3 import jets

M3 = 3
pt3 = st.lists(st.floats(-1.0, 1.0), min_size=M3, max_size=M3).map(np.array)
coef = st.lists(st.floats(-1.0, 1.0), min_size=18, max_size=18).map(np.array)


def poly_vector(c: np.ndarray, m: int = M3) -> F.Field:
    """X^i = c0 + c1 x0 x1 + c2 x2^2 + ... with 6 coefficients per component."""
    c = c.reshape(m, 6)

    def fn(x):
        x0, x1, x2 = x[0], x[1], x[2]
        monos = [x0 * 0.0 + 1.0, x0 * x1, x2 * x2, x1, x0 * x2 * x1, jets.sin(x0)]
        return jets.Jet.stack([sum((monos[k] * float(c[i, k]) for k in range(6)), monos[0] * 0.0) for i in range(m)])

    return F.from_function(fn, "vector", m)


def poly_form(c: np.ndarray, m: int = M3) -> F.Field:
    X = poly_vector(c, m)
    return F.Field(lambda p, K: X(p, K), "form", m, degree=1)


def test_coordinate_fields_commute():
    m = 7
    br = F.lie_bracket(F.coordinate_vector(0, m), F.coordinate_vector(1, m))
    assert_array_equal(br.at(np.full(m, 0.3)), 0.0)


def test_flat_reeb_brackets_vanish(flat1):
    S = flat1.structure
    p = np.linspace(-1, 1, flat1.dim)
    for a in range(3):
        for b in range(3):
            assert_array_equal(F.lie_bracket(S.xis[a], S.xis[b]).at(p), 0.0)


def test_bracket_example():
    # X = x1 d/dy1, Y = y1 d/dx1 on the (x1, y1) plane gives x1 d/dx1 - y1 d/dy1
    m = 2
    x, y = F.coordinate_function(0, m), F.coordinate_function(1, m)
    X = x * F.coordinate_vector(1, m)
    Y = y * F.coordinate_vector(0, m)
    for p in ([0.3, -0.7], [1.2, 2.0], [-0.4, 0.0]):
        assert_allclose(F.lie_bracket(X, Y).at(np.array(p)), [p[0], -p[1]], atol=1e-15)


@given(coef, coef, pt3)
def test_bracket_antisymmetric(c1, c2, p):
    X, Y = poly_vector(c1), poly_vector(c2)
    assert_allclose(F.lie_bracket(X, Y).at(p) + F.lie_bracket(Y, X).at(p), 0.0, atol=1e-12)


@given(coef, coef, coef, pt3)
def test_jacobi_identity(c1, c2, c3, p):
    X, Y, Z = poly_vector(c1), poly_vector(c2), poly_vector(c3)
    b = F.lie_bracket
    total = b(X, b(Y, Z)).at(p) + b(Y, b(Z, X)).at(p) + b(Z, b(X, Y)).at(p)
    assert_allclose(total, 0.0, atol=1e-9)


def test_d_of_coordinate_differential_vanishes():
    m = 7
    d = F.exterior_derivative(F.coordinate_differential(5, m))
    assert_array_equal(d.at(np.full(m, 0.2)), 0.0)
    dd = F.exterior_derivative(d)
    assert_array_equal(dd.at(np.full(m, 0.2)), 0.0)


def test_flat_d_eta_vanishes(flat1):
    p = np.linspace(-1, 1, flat1.dim)
    for de in flat1.structure.d_etas:
        assert_array_equal(de.at(p), 0.0)


def test_half_convention_example():
    # eta = x dy on the plane: d eta(dx, dy) = 1/2
    m = 2
    x = F.coordinate_function(0, m)
    eta = F.Field(lambda p, K: x(p, K) * F.coordinate_differential(1, m)(p, K), "form", m, degree=1)
    p = np.array([0.7, -0.3])
    assert F.exterior_derivative(eta).at(p)[0, 1] == pytest.approx(0.5)
    ex, ey = F.coordinate_vector(0, m), F.coordinate_vector(1, m)
    assert F.d_on(eta, ex, ey).at(p) == pytest.approx(0.5)


@given(coef, pt3)
def test_d_squared_vanishes(c, p):
    w = poly_form(c)
    assert_allclose(F.exterior_derivative(F.exterior_derivative(w)).at(p), 0.0, atol=1e-9)


@given(coef, coef, coef, pt3)
def test_component_d_matches_invariant_formula(c1, c2, c3, p):
    w, X, Y = poly_form(c1), poly_vector(c2), poly_vector(c3)
    dw = F.exterior_derivative(w).at(p)
    assert F.d_on(w, X, Y).at(p) == pytest.approx(X.at(p) @ dw @ Y.at(p), abs=1e-10)


def test_d_rejects_three_forms():
    m = 3
    w = F.constant(np.zeros((m, m, m)), "form", m, degree=3)
    with pytest.raises(ValueError):
        F.exterior_derivative(w)


def test_lie_derivative_endo_flat(flat1):
    S = flat1.structure
    p = np.linspace(-1, 1, flat1.dim)
    for xi in S.xis:
        for phi in S.phis:
            assert_array_equal(F.lie_derivative_endo(xi, phi).at(p), 0.0)


def test_lie_derivative_xi2_phi1_on_sphere(sphere1, sphere_points):
    S = sphere1.structure
    L = F.lie_derivative_endo(S.xis[1], S.phis[0])
    for p in sphere_points:
        assert_allclose(L.at(p), -2.0 * S.phis[2].at(p), atol=1e-8)


@given(coef, coef, pt3)
def test_lie_derivative_endo_naturality(c1, c2, p):
    m = M3
    xi = poly_vector(c1)
    A = poly_vector(c2)
    phi = F.Field(lambda q, K: jets.outer(A(q, K), A(q, K)) + jets.Jet.constant(np.diag([1.0, 2.0, 3.0]), m, K),
                  "endo", m)
    L = F.lie_derivative_endo(xi, phi).at(p)
    for j in range(m):
        op = F.lie_derivative_endo_on(xi, phi, F.coordinate_vector(j, m)).at(p)
        assert_allclose(L[:, j], op, atol=1e-9)


def test_lie_derivative_metric_examples(flat1, sphere1, sphere_points):
    m = flat1.dim
    p = np.linspace(-1, 1, m)
    g = flat1.g
    assert_array_equal(F.lie_derivative_metric(F.coordinate_vector(4, m), g).at(p), 0.0)
    x1 = F.coordinate_function(0, m)
    L = F.lie_derivative_metric(x1 * F.coordinate_vector(0, m), g).at(p)
    assert L[0, 0] == pytest.approx(2.0)
    e = F.coordinate_vector(0, m)
    assert F.lie_derivative_metric_on(x1 * e, g, e, e).at(p) == pytest.approx(2.0)
    for xi in sphere1.structure.xis:
        for q in sphere_points:
            assert np.abs(F.lie_derivative_metric(xi, sphere1.g).at(q)).max() <= 1e-7


def test_musical_flat_identity_metric(flat1):
    m = flat1.dim
    w = F.musical_flat(flat1.g, F.coordinate_vector(0, m)).at(np.zeros(m))
    assert_array_equal(w, np.eye(m)[0])


def test_musical_flat_sphere_origin(sphere1):
    m = sphere1.dim
    w = F.musical_flat(sphere1.g, F.coordinate_vector(0, m)).at(np.zeros(m))
    assert_allclose(w, 4.0 * np.eye(m)[0], atol=1e-15)


def test_musical_roundtrip_on_sphere(sphere1, rng):
    m = sphere1.dim
    pts = sphere1.sample(4, 3)
    for _ in range(32):
        V = F.constant(rng.normal(size=m), "vector", m)
        W = F.musical_sharp(sphere1.g, F.musical_flat(sphere1.g, V))
        for p in pts[:1]:
            assert_allclose(W.at(p), V.at(p), atol=1e-9)


def test_positive_definite_predicate(sphere1):
    m = sphere1.dim
    assert F.is_positive_definite(sphere1.g, np.zeros(m))
    bad = F.constant(-np.eye(m), "metric", m)
    assert not F.is_positive_definite(bad, np.zeros(m))


def test_wedge_half_convention():
    a, b = np.eye(3)[0], np.eye(3)[1]
    w = F.wedge_constant(a, b)
    assert w[0, 1] == 0.5 and w[1, 0] == -0.5
    assert F.antisymmetry_residual(w) == 0.0


def test_fields_on_different_charts_rejected():
    with pytest.raises(ValueError):
        F.lie_bracket(F.coordinate_vector(0, 3), F.coordinate_vector(0, 4))
