import functools
import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from acm3 import contact3 as c3
from acm3 import fields as F
from acm3 import models as M

idx = st.integers(1, 3)


@functools.cache
def _sphere():
    return M.make_sphere(1)


@given(idx, idx, idx)
def test_epsilon_symbol(a, b, c):
    assert c3.epsilon(a, b, c) == -c3.epsilon(b, a, c) == -c3.epsilon(a, c, b)
    if len({a, b, c}) < 3:
        assert c3.epsilon(a, b, c) == 0.0


def test_epsilon_normalization():
    assert c3.epsilon(1, 2, 3) == 1.0
    assert c3.epsilon(3, 1, 2) == 1.0
    assert c3.epsilon(2, 1, 3) == -1.0


def test_check_acms_flat_exact(flat1, flat_points):
    rep = c3.check_acms(flat1.structure.structure(1), flat_points, 1e-12)
    assert rep.max_residual == 0.0 and rep.passed and rep.banner() == ""


def test_check_acms_sphere(sphere1, sphere_points):
    rep = c3.check_acms(sphere1.structure.structure(2), sphere_points, 1e-8)
    assert rep.passed, rep.residuals


def test_check_acms_corrupted_structure_reports(flat1, flat_points):
    m = flat1.dim
    A = M.flat_phi_matrices(1)[0].copy()
    A[1, 0] *= -1.0  # phi_1 d/dx1 = -d/dy1 while phi_1 d/dy1 = -d/dx1
    s = flat1.structure.structure(1)
    bad = c3.AlmostContactMetricStructure(F.constant(A, "endo", m), s.xi, s.eta, s.g)
    rep = c3.check_acms(bad, flat_points, 1e-9)
    assert rep.max_residual >= 1.0
    assert not rep.passed
    assert rep.banner() == "structure invalid" and "structure invalid" in rep.notes


def test_check_3structure_flat(flat1, flat_points):
    rep = c3.check_3structure(flat1.structure, flat_points, 1e-12)
    assert rep.max_residual == 0.0
    S = flat1.structure
    p = flat_points[0]
    assert_array_equal(S.phis[0].at(p) @ S.xis[1].at(p), S.xis[2].at(p))


def test_check_3structure_sphere(sphere1, sphere_points):
    rep = c3.check_3structure(sphere1.structure, sphere_points, 1e-8)
    assert rep.passed, rep.residuals
    S = sphere1.structure
    for p in sphere_points:
        assert_allclose(S.phis[0].at(p) @ S.xis[2].at(p), -S.xis[1].at(p), atol=1e-8)


def test_diagonal_case_reduces_to_single_structure(sphere1, sphere_points):
    S = sphere1.structure
    for p in sphere_points[:3]:
        for a in range(3):
            A, V, W = S.phis[a].at(p), S.xis[a].at(p), S.etas[a].at(p)
            assert_allclose(A @ A, -np.eye(S.dim) + np.outer(V, W), atol=1e-8)


def test_nijenhuis_vanishes(flat1, sphere1, flat_points, sphere_points):
    for a in (1, 2, 3):
        N = c3.nijenhuis(flat1.structure.structure(a))
        for p in flat_points[:3]:
            assert_array_equal(N.at(p), 0.0)
        N = c3.nijenhuis(sphere1.structure.structure(a))
        for p in sphere_points[:4]:
            assert np.abs(N.at(p)).max() <= 1e-7


def _perturbed_phi1(flat1):
    m = flat1.dim
    A = M.flat_phi_matrices(1)[0]
    x1 = F.coordinate_function(0, m)
    bump = np.zeros((m, m))
    bump[0, 1] = 0.1  # phi^{x1}_{y1} += 0.1 x1
    phi = F.constant(A, "endo", m) + x1 * F.constant(bump, "endo", m)
    s = flat1.structure.structure(1)
    return c3.AlmostContactMetricStructure(phi, s.xi, s.eta, s.g)


def test_nijenhuis_detects_perturbation(flat1, flat_points):
    N = c3.nijenhuis(_perturbed_phi1(flat1))
    assert max(np.abs(N.at(p)).max() for p in flat_points) >= 0.05


def test_nijenhuis_components_match_operator_form(flat1, sphere1, sphere_points):
    for s, pts in ((_perturbed_phi1(flat1), flat1.sample(3, 5)), (sphere1.structure.structure(2), sphere_points[:2])):
        m = s.dim
        N = c3.nijenhuis(s)
        for p in pts:
            Np = N.at(p)
            assert_allclose(Np, -Np.transpose(0, 2, 1), atol=1e-12)
            for j, k in ((0, 1), (1, 4), (2, 6)):
                op = c3.nijenhuis_on(s, F.coordinate_vector(j, m), F.coordinate_vector(k, m)).at(p)
                assert_allclose(Np[:, j, k], op, atol=1e-9)


def test_nijenhuis_tensorial(sphere1, sphere_points):
    s = sphere1.structure.structure(1)
    m = s.dim
    f = F.coordinate_function(3, m) * F.coordinate_function(0, m)
    X, Y = F.coordinate_vector(1, m), F.coordinate_vector(5, m)
    for p in sphere_points[:2]:
        assert_allclose(c3.nijenhuis_on(s, f * X, Y).at(p), f.at(p) * c3.nijenhuis_on(s, X, Y).at(p), atol=1e-9)


def test_fundamental_form_flat_values(flat1):
    S = flat1.structure
    m = flat1.dim
    p = np.zeros(m)
    x1, y1, u1, v1, z1, z2, z3 = range(7)
    P1, P2, P3 = (Ph.at(p) for Ph in S.Phis)
    # vertical block
    assert P1[z2, z3] == -1.0
    assert P2[z1, z3] == 1.0
    assert P3[z1, z2] == -1.0
    # horizontal block: Phi(E, F) = g(E, phi F) with the matrices as given
    assert P1[x1, y1] == -1.0
    assert P3[x1, v1] == -1.0
    assert P2[x1, u1] == -1.0


def test_fundamental_form_antisymmetric_and_kills_reeb(sphere1, sphere_points, rng):
    S = sphere1.structure
    for p in sphere_points[:4]:
        for a in range(3):
            Ph = S.Phis[a].at(p)
            assert_allclose(Ph, -Ph.T, atol=1e-12)
            X = S.projector.at(p) @ rng.normal(size=S.dim)
            assert abs(S.xis[a].at(p) @ Ph @ (S.phis[a].at(p) @ X)) <= 1e-9


def test_classify_flat(flat1, flat_points):
    for a in (1, 2, 3):
        c = c3.classify(flat1.structure.structure(a), flat_points[:3], 1e-9, flat1.levi_civita)
        assert c.is_cosymplectic and c.is_almost_cosymplectic and c.is_normal
        assert not c.is_contact_metric
        assert c.residuals["cosymplectic"] == 0.0


def test_classify_sphere(sphere1, sphere_points):
    for a in (1, 2, 3):
        c = c3.classify(sphere1.structure.structure(a), sphere_points[:4], 1e-7, sphere1.levi_civita)
        assert c.is_sasakian and c.is_contact_metric and c.is_normal
        assert not c.is_cosymplectic
        assert c.residuals["nabla_xi_plus_phi"] <= 1e-7


def test_horizontal_projection(flat1, sphere1, sphere_points):
    S = flat1.structure
    m = flat1.dim
    p = np.full(m, 0.25)
    assert_array_equal(c3.horizontal_projection(S, S.xis[1]).at(p), 0.0)
    assert_array_equal(c3.horizontal_projection(S, F.coordinate_vector(0, m)).at(p), np.eye(m)[0])
    T = sphere1.structure
    E = F.coordinate_vector(0, m) + 3.0 * T.xis[1]
    Eh = c3.horizontal_projection(T, E)
    for q in sphere_points:
        for w in T.etas:
            assert abs(w.at(q) @ Eh.at(q)) <= 1e-9
        P = T.projector.at(q)
        assert_allclose(P @ P, P, atol=1e-12)


def test_form_musical_flat(flat1):
    p = np.zeros(flat1.dim)
    h = c3.horizontal_maps(flat1.structure, p)
    # the horizontal basis of the flat model is the coordinate one up to a rotation
    dx1 = h.B.T @ np.eye(flat1.dim)[0]
    dy1 = h.B.T @ np.eye(flat1.dim)[1]
    flat1_of_dx1 = c3.form_musical(flat1.structure, 1, "flat", p) @ dx1
    assert_allclose(flat1_of_dx1, -dy1, atol=1e-15)
    with pytest.raises(ValueError):
        c3.form_musical(flat1.structure, 1, "sideways", p)


def test_form_musical_sphere_roundtrip(sphere1, sphere_points, rng):
    for p in sphere_points[:4]:
        h = c3.horizontal_maps(sphere1.structure, p)
        for a in range(3):
            for _ in range(8):
                x = rng.normal(size=h.B.shape[1])
                assert_allclose(h.sharp[a] @ (h.flat[a] @ x), x, atol=1e-8)
        assert_allclose(h.flat[1] @ h.phi[2], -h.flat[2] @ h.phi[1], atol=1e-8)


def test_lemma_identities(flat1, sphere1, flat_points, sphere_points):
    assert c3.verify_lemma_antonio(flat1.structure, flat_points, 1e-12).max_residual <= 1e-14
    rep = c3.verify_lemma_antonio(sphere1.structure, sphere_points, 1e-7)
    assert rep.passed, rep.residuals


def test_reconstructed_g_flat_sends_dx1_to_dx1(flat1):
    p = np.zeros(flat1.dim)
    h = c3.horizontal_maps(flat1.structure, p)
    e = h.B.T @ np.eye(flat1.dim)[0]
    gflat = -h.flat[0] @ h.sharp[1] @ h.flat[2]
    assert_allclose(gflat @ e, e, atol=1e-15)


def test_recover_metric(flat1, sphere1, sphere_points):
    assert_allclose(c3.recover_metric_at(flat1.structure, np.full(flat1.dim, 0.3)), np.eye(flat1.dim), atol=1e-14)
    S = sphere1.structure
    for p in sphere1.sample(16, 11):
        G = c3.recover_metric_at(S, p)
        assert_allclose(G, S.g.at(p), atol=1e-7)
        V = np.column_stack([x.at(p) for x in S.xis])
        assert_allclose(V.T @ G @ V, np.eye(3), atol=1e-12)


def test_recover_metric_ignores_the_metric(sphere1):
    # only Phi_a, xi_a, eta_a enter: scaling g on H while keeping phi fixed scales the Phi_a
    S = sphere1.structure
    p = sphere1.sample(1, 3)[0]
    Phis = [2.0 * Ph.at(p) for Ph in S.Phis]
    V = [x.at(p) for x in S.xis]
    W = [w.at(p) for w in S.etas]
    G = c3.recover_metric(Phis, V, W)
    P = S.projector.at(p)
    assert_allclose(P.T @ G @ P, 2.0 * P.T @ S.g.at(p) @ P, atol=1e-9)


def test_lie_derivative_lemma(flat1, sphere1, flat_points, sphere_points):
    assert c3.lie_phi_residual(flat1.structure, flat_points[:3], 0.0) == 0.0
    assert c3.lie_phi_residual(sphere1.structure, sphere_points[:4], 2.0) <= 1e-7
    assert c3.lie_phi_residual(sphere1.structure, sphere_points[:1], 0.0) > 1.0


def test_basic_brackets_stay_horizontal(flat1, sphere1, rng):
    for model in (flat1, sphere1):
        Xs = c3.horizontal_constant_fields(model.structure, rng, 16)
        assert c3.basic_bracket_residual(model.structure, Xs, model.sample(2, 8)) <= 1e-8


def test_contact_metric_condition_and_closedness(flat1, sphere1, flat_points, sphere_points):
    S = sphere1.structure
    for p in sphere_points:
        for de, Ph in zip(S.d_etas, S.Phis):
            assert_allclose(de.at(p), Ph.at(p), atol=1e-7)
    T = flat1.structure
    for p in flat_points[:2]:
        for Ph in T.Phis:
            assert_array_equal(F.exterior_derivative(Ph).at(p), 0.0)


@given(st.integers(0, 2**32 - 1))
def test_structure_identities_on_random_sphere_points(seed):
    model = _sphere()
    pts = model.sample(2, seed)
    assert c3.check_3structure(model.structure, pts, 1e-8).passed
    for a in (1, 2, 3):
        assert c3.check_acms(model.structure.structure(a), pts, 1e-8).passed


@given(st.integers(0, 2**32 - 1))
def test_structure_identities_survive_scrambling(seed):
    model = M.scramble(M.make_flat(1), seed)
    pts = model.sample(2, seed)
    assert c3.check_3structure(model.structure, pts, 1e-12).max_residual <= 1e-12


def test_all_triples_covered():
    assert sum(1 for t in itertools.product(range(3), repeat=3) if c3.EPS[t] != 0) == 6
