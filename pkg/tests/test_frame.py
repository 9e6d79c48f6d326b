import numpy as np
import pytest

from nullstring_lab import frame as F
from nullstring_lab.curvature import oracle_curvature
from nullstring_lab.tensor import geometry_from_jets, jet_matrix_derivatives

from conftest import random_plebanski

SQRT2 = np.sqrt(2.0)


def metric_values(Q, point):
    g, _, _ = jet_matrix_derivatives(F.plebanski_metric(Q, np.asarray(point, float)), need_hessian=False)
    return g


def test_flat_plebanski_metric():
    g = metric_values(F.plebanski(), [0.3, 0.1, -0.2, 0.5])
    expected = np.zeros((4, 4))
    expected[0, 3] = expected[3, 0] = 0.5
    expected[1, 2] = expected[2, 1] = -0.5
    # ds^2/2 holds half of ds^2 = 2 dq dy - 2 dp dx
    assert np.array_equal(2 * g, 2 * expected)
    assert np.array_equal(g, expected)


def test_read_off_a_and_b():
    g = metric_values(F.plebanski("x^2", "0", "y^2"), [0, 0, 1, 2])
    assert g[1, 1] == 1.0 and g[0, 0] == 4.0


def test_q_enters_off_diagonal():
    g = metric_values(F.plebanski("0", "x", "0"), [0.2, 0.4, 0.7, -0.1])
    assert g[0, 1] == g[1, 0] == -0.7


def test_coframe_reproduces_metric(rng):
    for _ in range(5):
        Q = random_plebanski(rng)
        pt = rng.uniform(-1, 1, 4)
        pj = Q.jets(pt)
        a, _, _ = jet_matrix_derivatives(F.plebanski_metric_from_jets(pj), need_hessian=False)
        b, _, _ = jet_matrix_derivatives(F.metric_from_coframe(F.plebanski_coframe(pj)), need_hessian=False)
        assert np.allclose(a, b, atol=1e-14)


def oracle_spinor_connection(Q, pt):
    pj = Q.jets(np.asarray(pt, float))
    geo = geometry_from_jets(F.plebanski_metric_from_jets(pj))
    return F.gamma_to_spinor(F.tetrad_connection(geo, F.plebanski_coframe(pj)))


def test_flat_connection_vanishes():
    sc = F.spin_connection_plebanski(F.plebanski(), np.zeros(4))
    assert sc.max_abs() == 0.0


def test_closed_form_connection_matches_oracle():
    Q = F.plebanski("x^2", "0", "y^2")
    for pt in ([0.1, 0.2, 0.3, 0.4], [1.0, -1.0, 0.5, -0.7]):
        a = F.spin_connection_plebanski(Q, np.array(pt))
        b = oracle_spinor_connection(Q, pt)
        assert np.allclose(a.undotted, b.undotted, atol=1e-12)
        assert np.allclose(a.dotted, b.dotted, atol=1e-12)
    # Gamma_{12 2D'} = -(1/sqrt2) d^A' Q_A'D' with Q_1'1' = B = y^2, Q_2'2' = A = x^2,
    # d^1' = d_y and d^2' = -d_x
    a = F.spin_connection_plebanski(Q, np.array([0.0, 0.0, 0.3, 0.4]))
    assert a.undotted[0, 1, 1, 0] == pytest.approx(-(2 * 0.4) / SQRT2)
    assert a.undotted[0, 1, 1, 1] == pytest.approx((2 * 0.3) / SQRT2)


def test_closed_form_connection_matches_oracle_random(rng):
    for _ in range(10):
        Q = random_plebanski(rng)
        pt = rng.uniform(-1, 1, 4)
        a = F.spin_connection_plebanski(Q, pt)
        b = oracle_spinor_connection(Q, pt)
        scale = 1 + b.max_abs()
        assert np.max(np.abs(a.undotted - b.undotted)) < 1e-12 * scale
        assert np.max(np.abs(a.dotted - b.dotted)) < 1e-12 * scale


def test_zero_gamma():
    sc = F.gamma_to_spinor(F.TetradConnection(np.zeros((4, 4, 4))))
    assert sc.max_abs() == 0.0


def test_single_gamma_component():
    G = np.zeros((4, 4, 4))
    G[3, 1, 3] = 1.0  # Gamma_424
    G[1, 3, 3] = -1.0
    sc = F.gamma_to_spinor(F.TetradConnection(G))
    assert sc.undotted[0, 0, 0, 0] == pytest.approx(SQRT2)
    rest = sc.undotted.copy()
    rest[0, 0, 0, 0] = 0
    assert np.max(np.abs(rest)) == 0 and np.max(np.abs(sc.dotted)) == 0


def random_antisymmetric(rng):
    G = rng.normal(size=(4, 4, 4))
    return G - G.transpose(1, 0, 2)


def test_round_trip_through_spinor_connection(rng):
    for _ in range(20):
        G = random_antisymmetric(rng)
        back = F.spinor_to_gamma(F.gamma_to_spinor(G)).gamma
        assert np.max(np.abs(back - G)) < 1e-12


def test_matrix_and_one_form_routes_agree(rng):
    for _ in range(20):
        G = random_antisymmetric(rng)
        a, b = F.gamma_to_spinor(G), F.spinor_connection_from_forms(G)
        assert np.allclose(a.undotted, b.undotted, atol=1e-13)
        assert np.allclose(a.dotted, b.dotted, atol=1e-13)


def test_spinor_index_gymnastics():
    m = np.array([0.3, -1.2])
    assert F.contract(m, m) == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(F.raise_index(F.lower(m)), m)
    a, b = np.array([1.0, 2.0]), np.array([-0.5, 3.0])
    assert F.contract(a, b) == pytest.approx(-F.contract(b, a))


def test_coframe_consistency_recorded_by_oracle(rng):
    Q = random_plebanski(rng)
    c = oracle_curvature(Q.jets(rng.uniform(-1, 1, 4)))
    assert c.diagnostics["coframe"] < 1e-13
