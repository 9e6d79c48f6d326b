import numpy as np
import pytest

from nullstring_lab import frame as F
from nullstring_lab import jet as J
from nullstring_lab.curvature import compare, einstein_residual, oracle_curvature, plebanski_curvature
from nullstring_lab.dsl import ScalarField
from nullstring_lab.tensor import geometry_from_jets

from conftest import random_plebanski

# Independent symbolic oracle (Christoffel -> Riemann -> Weyl in exact arithmetic,
# full ds^2 = 2 (dq dy - dp dx + A dp^2 - 2 Q dp dq + B dq^2)), frozen here:
# (A, Q, B, point, usual scalar curvature, C_abcd C^abcd, R_ab R^ab)
SYMBOLIC = [
    ("x^3 + q*x^2", "0", "y^3 + p*y^2", (0.3, -0.2, 0.5, 0.7),
     14.799999999999999, 73.013333333333323, 54.799999999999992),
    ("x^2*y + q*p*x", "x*y*p + exp(q*x)", "q*y^3 + x*y*p", (0.1, 0.4, -0.3, 0.6),
     4.7200000000000001, 5.5875519477230051, 5.2919093071948358),
]

_W, _S, _BAR = np.array([1, 2, 1]), np.array([1, -1, 1]), (2, 1, 0)


def spinor_square(components):
    """psi_ABCD psi^ABCD from psi_k (k indices equal to 2)."""
    c = components
    return 2 * (c[0] * c[4] - 4 * c[1] * c[3] + 3 * c[2] ** 2)


def ricci_square(r):
    """C_AB C'D' C^AB C'D' from the 3x3 pair matrix."""
    return sum(_W[i] * _W[j] * _S[i] * _S[j] * r[i, j] * r[_BAR[i], _BAR[j]] for i in range(3) for j in range(3))


@pytest.mark.parametrize("A,Q,B,pt,scalar,weyl2,ric2", SYMBOLIC)
def test_against_symbolic_invariants(A, Q, B, pt, scalar, weyl2, ric2):
    c = oracle_curvature(F.plebanski(A, Q, B).jets(np.array(pt)))
    assert c.R == pytest.approx(-scalar, rel=1e-12)
    sd = c.Cup[::-1] / 2
    assert 4 * (spinor_square(sd) + spinor_square(c.Cdown)) == pytest.approx(weyl2, rel=1e-11)
    assert 4 * ricci_square(c.ricci) == pytest.approx(ric2 - scalar**2 / 4, rel=1e-9, abs=1e-12)


def test_flat_is_flat():
    for route in (oracle_curvature, plebanski_curvature):
        c = route(F.plebanski().jets(np.array([0.1, 0.2, 0.3, 0.4])))
        assert c.scale() == 0.0


def test_quadratic_a_b():
    Q = F.plebanski("x^2", "0", "y^2")
    for pt in ([0.0, 0.0, 0.0, 0.0], [0.7, -0.3, 0.2, 0.9]):
        for route in (oracle_curvature, plebanski_curvature):
            c = route(Q.jets(np.array(pt)))
            assert c.Cup[2] == pytest.approx(-4 / 3)
            assert c.R == pytest.approx(-8)
            assert np.max(np.abs(c.ricci)) < 1e-12
            assert einstein_residual(c, 2.0).passes(1e-12)


def _pd(f, pt, *names):
    idx = ["qpxy".index(n) for n in names]
    alpha = [0, 0, 0, 0]
    for i in idx:
        alpha[i] += 1
    return J.partial(ScalarField(f).jet(pt), alpha)


def test_walker_block(rng):
    A, B = "x^3*p + sin(q*x) + q^2*x^2", "exp(p*y) + q*y^3 + p^2*y"
    Q = F.plebanski(A, "0", B)
    for _ in range(5):
        pt = rng.uniform(-1, 1, 4)
        c = plebanski_curvature(Q, pt)
        o = oracle_curvature(Q.jets(pt))
        d = lambda f, *n: _pd(f, pt, *n)  # noqa: E731
        c3 = -(d(A, "x", "x") + d(B, "y", "y")) / 3
        c2 = -d(A, "q", "x") - d(B, "p", "y")
        half_c1 = (-d(B, "p", "p") - d(A, "q", "q") + d(B, "p") * d(A, "x") - d(B, "y") * d(A, "q"))
        for cd in (c, o):
            assert cd.Cup[2] == pytest.approx(c3, rel=1e-10)
            assert cd.R / 6 == pytest.approx(c3, rel=1e-10)
            assert 2 * cd.Cdown[2] == pytest.approx(c3, rel=1e-10)
            assert cd.Cup[1] == pytest.approx(c2, rel=1e-10, abs=1e-12)
            assert cd.Cup[0] / 2 == pytest.approx(half_c1, rel=1e-10, abs=1e-12)
            assert cd.ricci[1, 1] == pytest.approx((d(A, "x", "x") - d(B, "y", "y")) / 4, rel=1e-10, abs=1e-12)
            assert cd.ricci[2, 1] == pytest.approx((d(A, "x", "q") - d(B, "y", "p")) / 2, rel=1e-10, abs=1e-12)


def test_self_dual_family(rng):
    M, P, N, Om = "q*p + q^2", "sin(q) + p", "p^2 - q", "q^2*p"
    A = f"({M})*x^2 + ({P})*x + {Om}"
    B = f"-({M})*y^2 + ({N})*y"
    Q = F.plebanski(A, "0", B)
    for _ in range(5):
        pt = rng.uniform(-1, 1, 4)
        for route in (oracle_curvature, plebanski_curvature):
            c = route(Q.jets(pt))
            assert np.max(np.abs(c.Cdown)) < 1e-12 * (1 + c.scale())
            x, y = pt[2], pt[3]
            expected = (2 * _pd(M, pt, "p") * y - 2 * _pd(M, pt, "q") * x - _pd(N, pt, "p") - _pd(P, pt, "q"))
            assert c.Cup[1] == pytest.approx(expected, rel=1e-10)


def test_einstein_family_with_potential(rng):
    # A = Lambda/2 x^2 + Phi_p x, B = Lambda/2 y^2 + Phi_q y with Phi = q p, Lambda = 1
    Q = F.plebanski("x^2/2 + q*x", "0", "y^2/2 + p*y")
    for _ in range(10):
        c = oracle_curvature(Q.jets(rng.uniform(-1, 1, 4)))
        r = einstein_residual(c, 1.0)
        assert r.maxRicci < 1e-10 and r.scalarGap < 1e-10


def test_flat_einstein_residual():
    c = oracle_curvature(F.plebanski().jets(np.zeros(4)))
    r = einstein_residual(c, 0.0)
    assert (r.maxRicci, r.scalarGap) == (0.0, 0.0)


def test_cubic_a_is_not_einstein():
    c = plebanski_curvature(F.plebanski("x^3", "0", "0"), np.array([0.0, 0.0, 1.0, 0.0]))
    assert c.ricci[1, 1] == pytest.approx(6 / 4)
    assert einstein_residual(c, 0.0).maxRicci > 0


def test_fast_path_structure(rng):
    c = plebanski_curvature(random_plebanski(rng), rng.uniform(-1, 1, 4))
    assert c.Cup[3] == 0 and c.Cup[4] == 0
    assert np.all(c.ricci[0] == 0)
    assert c.R == 6 * c.Cup[2]


def test_oracle_agrees_with_fast_path_random(rng):
    for _ in range(20):
        Q = random_plebanski(rng)
        pt = rng.uniform(-1, 1, 4)
        a, b = oracle_curvature(Q.jets(pt)), plebanski_curvature(Q, pt)
        assert compare(a, b) < 1e-9


def test_oracle_diagnostics(rng):
    Q = random_plebanski(rng)
    c = oracle_curvature(Q.jets(rng.uniform(-1, 1, 4)))
    scale = 1 + c.scale()
    for key in ("bianchi", "sd_split_residual", "asd_split_residual", "scalar_mismatch", "ricci_mismatch"):
        assert c.diagnostics[key] < 1e-10 * scale


def test_complex_instance(rng):
    Q = F.plebanski("x^2*y + i*q*x^2", "p*x*y", "i*y^3 + q*p", mode="complex")
    pt = rng.uniform(-1, 1, 4) + 1j * rng.uniform(-1, 1, 4)
    a, b = oracle_curvature(Q.jets(pt)), plebanski_curvature(Q, pt)
    assert np.iscomplexobj(a.Cup) and compare(a, b) < 1e-9


def test_degenerate_metric_rejected():
    from nullstring_lab.errors import DegenerateMetric

    zero = J.constant(0.0)
    with pytest.raises(DegenerateMetric):
        geometry_from_jets([[zero] * 4 for _ in range(4)])
