import math

import numpy as np
import pytest

from nullstring_lab import jet as J
from nullstring_lab.dsl import ScalarField
from nullstring_lab.errors import DivisionNearZero, LogOfZero, SingularSampling


def test_seed_is_coordinate_function():
    j = J.seed(np.array([1.0, 2.0, 3.0, 4.0]), 0)
    assert j.value == 1.0
    assert J.partial(j, (1, 0, 0, 0)) == 1.0
    rest = np.delete(j.coeffs, [J.SLOT[(0, 0, 0, 0)], J.SLOT[(1, 0, 0, 0)]])
    assert np.all(rest == 0)


def test_seed_y_at_origin():
    j = J.seed(np.zeros(4), 3)
    assert j.value == 0.0 and J.partial(j, (0, 0, 0, 1)) == 1.0


def test_seed_complex_point():
    j = J.seed(np.array([1j, 0, 0, 0]), 0)
    assert j.is_complex
    assert j.value == 1j and J.partial(j, (1, 0, 0, 0)) == 1


def test_seed_rejects_bad_variable():
    with pytest.raises(ValueError):
        J.seed(np.zeros(4), 4)


def test_square():
    x = J.seed(np.array([0.0, 0.0, 2.0, 0.0]), 2)
    sq = J.mul(x, x)
    assert sq.value == 4.0
    assert J.partial(sq, (0, 0, 1, 0)) == 4.0
    assert sq.coeffs[J.SLOT[(0, 0, 2, 0)]] == 1.0
    assert J.partial(sq, (0, 0, 2, 0)) == 2.0


def test_exp_of_product_matches_closed_form():
    pt = np.array([1.0, 0.0, 0.0, 1.0])
    q, y = J.seed(pt, 0), J.seed(pt, 3)
    e = J.exp(q * y)
    E = math.e
    assert e.value == pytest.approx(E)
    assert J.partial(e, (1, 0, 0, 0)) == pytest.approx(E)
    # d_q d_y exp(qy) = (1 + qy) exp(qy)
    assert J.partial(e, (1, 0, 0, 1)) == pytest.approx(2 * E)
    # d_q^2 d_y exp(qy) = (2y + q y^2) exp(qy)
    assert J.partial(e, (2, 0, 0, 1)) == pytest.approx(3 * E)


def test_reciprocal_at_pole():
    x = J.seed(np.zeros(4), 2)
    with pytest.raises(DivisionNearZero):
        J.div(1.0, x)


def test_log_of_zero():
    with pytest.raises(LogOfZero):
        J.ln(J.seed(np.zeros(4), 1))


def test_partial_examples():
    x = J.seed(np.array([0.0, 0.0, 3.0, 0.0]), 2)
    assert J.partial(x * x, (0, 0, 2, 0)) == 2.0
    pt = np.array([5.0, 0.0, 0.0, 7.0])
    assert J.partial(J.seed(pt, 0) * J.seed(pt, 3), (1, 0, 0, 1)) == 1.0
    e = J.exp(J.seed(np.array([1.0, 0, 0, 0]), 0))
    assert abs(J.partial(e, (3, 0, 0, 0)) - math.e) / math.e < 1e-12


def test_partial_beyond_order_is_refused():
    j = J.derivative(J.seed(np.zeros(4), 0) ** 3, 0)
    assert j.order == 2
    with pytest.raises(ValueError):
        J.partial(j, (3, 0, 0, 0))


def test_derivative_shifts_coefficients():
    pt = np.array([0.3, -0.2, 0.5, 0.1])
    f = ScalarField("sin(q*x) + p^3*y")
    d = J.derivative(f.jet(pt), 2)
    g = ScalarField("q*cos(q*x)")
    for alpha in [(0, 0, 0, 0), (1, 0, 0, 0), (0, 0, 1, 0), (1, 0, 1, 0), (2, 0, 0, 0)]:
        assert J.partial(d, alpha) == pytest.approx(J.partial(g.jet(pt), alpha), rel=1e-12)


def test_real_stays_real():
    pt = np.array([0.1, 0.2, 0.3, 0.4])
    j = J.sin(J.seed(pt, 0)) * J.exp(J.seed(pt, 1))
    assert not j.is_complex


@pytest.mark.parametrize("alpha", [(0, 0, 2, 0), (0, 0, 1, 0), (0, 0, 3, 0)])
def test_fd_check_square(alpha):
    f = ScalarField("x^2")
    assert J.finite_diff_check(f, np.array([0.1, 0.2, 0.7, -0.3]), alpha) < 1e-6


def test_fd_check_exp_qp(rng):
    f = ScalarField("exp(q*p)")
    for _ in range(10):
        pt = np.concatenate([rng.uniform(-1, 1, 2), [0.0, 0.0]])
        assert J.finite_diff_check(f, pt, (1, 1, 0, 0)) < 1e-6


def test_fd_check_refuses_pole():
    f = ScalarField("1/x")
    with pytest.raises(SingularSampling):
        J.finite_diff_check(f, np.array([0.0, 0.0, 1e-5, 0.0]), (0, 0, 1, 0))


def test_jet_apply_dispatch():
    pt = np.array([0.2, 0.0, 0.0, 0.0])
    q = J.seed(pt, 0)
    assert J.jet_apply("cos", q).value == pytest.approx(math.cos(0.2))
    assert J.jet_apply("pow_int", q, 3).value == pytest.approx(0.008)
    assert J.jet_apply("sub", q, q).value == 0.0
