"""Congruences of null strings: verification, expansion, Sommers vector, optics.

The generic route works in any null coframe.  At a point we build the spinor
connection Gamma_{ABMN'}, Gamma_{A'B'MN'} from the coordinate Christoffels and
the spinor derivative d_{MN'} from the dual frame, then

    nabla_{MN'} psi_C  = d_{MN'} psi_C  - Gamma_{BCMN'}   eps^{BS}   psi_S
    nabla_{MN'} psi_C' = d_{MN'} psi_C' - Gamma_{B'C'MN'} eps^{B'S'} psi_S'

An SD spinor m_A generates a congruence of null strings iff
m^A m^B nabla_{AC'} m_B = 0; then nabla_{AC'} m_B = Z_{AC'} m_B + eps_AB M_C'.
The ASD case swaps the roles of dotted and undotted indices.

The Plebanski-specific systems (z-, w- and n-forms) are evaluated with jets
directly from the printed formulas; they give an independent check of the
generic route.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import frame as F
from . import jet as J
from .dsl import DEFAULT_COORDINATES, ScalarField, eval_jet_expr, eval_value_expr, parse
from .errors import BothLeadingZero, ImplicitSolveFailed, ZeroSpinor
from .tensor import geometry_from_jets, value_grad

NULL_TOL = 1e-9
EXPANSION_TOL = 1e-9


# spinor fields -------------------------------------------------------------------

def _jet_of(f, point):
    if isinstance(f, (int, float, complex, np.number)):
        return J.as_jet(f)
    return F._field_jet(f, point)


@dataclass(frozen=True)
class SpinorFieldSpec:
    """A lower-index spinor field m_A (SD) or m_A' (ASD).

    ``components`` holds two entries, each a number, a ScalarField, a Jet or a
    callable ``point -> Jet``.
    """

    duality: str
    components: tuple
    name: str = ""

    def __post_init__(self):
        if self.duality not in ("SD", "ASD"):
            raise ValueError(f"duality must be SD or ASD, got {self.duality!r}")
        if len(self.components) != 2:
            raise ValueError("a spinor has two components")

    def jets(self, point):
        return [_jet_of(c, point) for c in self.components]

    @classmethod
    def constant0m(cls, duality="SD", m=1.0, name=""):
        """[0, m]."""
        return cls(duality, (0.0, m), name)

    @classmethod
    def constant1n(cls, duality, n, name=""):
        """[1, n] with n a field or number."""
        return cls(duality, (1.0, n), name)

    @classmethod
    def dotted_z(cls, z, name=""):
        """m_A' = [z, 1]."""
        return cls("ASD", (z, 1.0), name)

    @classmethod
    def dotted_w(cls, w, name=""):
        """n_A' = [1, w]."""
        return cls("ASD", (1.0, w), name)


# frame data at a point -------------------------------------------------------------

@dataclass
class PointFrame:
    """Everything the generic route needs at one point."""

    point: np.ndarray
    connection: F.SpinorConnection
    derivative: np.ndarray  # d_{MN'} coordinate components, shape (2, 2, 4)

    @property
    def connection_scale(self):
        return self.connection.max_abs()


def point_frame(metric_jets, coframe_jets, point=None):
    """Spinor connection and derivative operators from metric and coframe jets.

    ``metric_jets`` holds ds^2/2; pass PlebanskiJets to use the Plebanski coframe.
    """
    if isinstance(metric_jets, F.PlebanskiJets):
        pj = metric_jets
        metric_jets = F.plebanski_metric_from_jets(pj)
        if coframe_jets is None:
            coframe_jets = F.plebanski_coframe(pj)
    geo = geometry_from_jets(metric_jets)
    conn = F.gamma_to_spinor(F.tetrad_connection(geo, coframe_jets))
    _, _, E = F.frame_values(coframe_jets)
    return PointFrame(
        None if point is None else np.asarray(point), conn, F.spinor_derivative_vectors(E)
    )


def plebanski_frame(Q, point):
    """PointFrame of a PlebanskiData instance in its own tetrad."""
    return point_frame(Q.jets(point), None, point)


# covariant derivative ---------------------------------------------------------------

def covariant_derivative_values(psi, dpsi, gamma, dvec):
    """nabla_{MN'} psi_C from values psi[C], gradients dpsi[C, mu] and Gamma[B, C, M, N']."""
    partial = np.einsum("mnu,cu->mnc", dvec, dpsi)
    correction = np.einsum("bcmn,bs,s->mnc", gamma, F.EPS, psi)
    return partial - correction


def _spinor_values(spec, point):
    jets = spec.jets(point)
    vals, grads = zip(*(value_grad(j) for j in jets))
    dtype = np.result_type(*vals, *(g.dtype for g in grads))
    return np.array(vals, dtype=dtype), np.array(grads, dtype=dtype)


def covariant_derivative_spinor(spec, frame, point=None):
    """Array nabla[M, N', C] = nabla_{MN'} psi_C (or psi_C' for ASD fields)."""
    point = frame.point if point is None else point
    psi, dpsi = _spinor_values(spec, point)
    gamma = frame.connection.undotted if spec.duality == "SD" else frame.connection.dotted
    return covariant_derivative_values(psi, dpsi, gamma, frame.derivative), psi, dpsi


def complement(m):
    """A spinor chi with chi^A m_A = 1, built from the larger component of m."""
    m = np.asarray(m)
    chi = np.zeros(2, dtype=np.result_type(m.dtype, float))
    # chi^A m_A = chi_0 m_1 - chi_1 m_0
    if abs(m[1]) >= abs(m[0]):
        chi[0] = 1 / m[1]
    else:
        chi[1] = -1 / m[0]
    return chi


@dataclass
class CongruenceReport:
    duality: str
    spinor: np.ndarray
    residual: float
    sommers: np.ndarray
    expansion: np.ndarray
    scale: float
    nonexpanding: bool
    name: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def verified(self):
        return self.residual <= NULL_TOL * self.scale

    @property
    def flag(self):
        return "n" if self.nonexpanding else "e"


def verify_null_string(spec, frame, point=None, tol=NULL_TOL, expansion_tol=EXPANSION_TOL):
    """Null-string residual, Sommers vector and expansion of a spinor field.

    SD: residual = max_C' |m^A m^B nabla_{AC'} m_B|,
        M_C' = chi^A m^B nabla_{AC'} m_B / (chi^A m_A).
    ASD: residual = max_A |m^C' m^B' nabla_{AC'} m_B'|,
        M_A = chi^C' m^B' nabla_{AC'} m_B' / (chi^C' m_C').
    """
    nab, m, dm = covariant_derivative_spinor(spec, frame, point)
    size = float(np.max(np.abs(m)))
    if size == 0.0:
        raise ZeroSpinor(f"spinor {spec.name or spec.duality} vanishes at the point")
    # a constant rescaling does not change the congruence; work with max|m| = 1
    m, dm, nab = m / size, dm / size, nab / size
    mu = F.raise_index(m)
    chi = complement(m)
    chu = F.raise_index(chi)
    norm = chu @ m
    eps = F.EPS
    if spec.duality == "SD":
        # nab[A, C', B] = nabla_{AC'} m_B
        residual = np.einsum("a,b,acb->c", mu, mu, nab)
        expansion = np.einsum("a,b,acb->c", chu, mu, nab) / norm
        # Z_{AC'} chi^B m_B = chi^B nabla_{AC'} m_B - chi^B eps_AB M_C'
        sommers = (np.einsum("b,acb->ac", chu, nab) - np.einsum("b,ab,c->ac", chu, eps, expansion)) / norm
    else:
        # nab[A, C', B'] = nabla_{AC'} m_B'
        residual = np.einsum("c,b,acb->a", mu, mu, nab)
        expansion = np.einsum("c,b,acb->a", chu, mu, nab) / norm
        sommers = (np.einsum("b,acb->ac", chu, nab) - np.einsum("b,cb,a->ac", chu, eps, expansion)) / norm
    scale = 1.0 + frame.connection_scale + float(np.max(np.abs(dm)))
    res = float(np.max(np.abs(residual)))
    nonexp = bool(np.max(np.abs(expansion)) <= expansion_tol * scale)
    return CongruenceReport(
        spec.duality, m, res, sommers, expansion, scale, nonexp, spec.name,
        {"covariant_derivative": nab, "max_expansion": float(np.max(np.abs(expansion)))},
    )


# intersections --------------------------------------------------------------------

OPTICS_TOL = 1e-9


@dataclass
class OpticsReport:
    theta: complex
    rho: complex
    cls: str
    threshold: float


def intersection_optics(a, b, tol=OPTICS_TOL):
    """theta ~ m_A M^A + m_A' M^A', rho ~ m_A M^A - m_A' M^A'.

    ``a`` is the SD report (spinor m_A, expansion M_A'), ``b`` the ASD one
    (spinor m_A', expansion M_A).  Only the zero pattern is meaningful.
    """
    if a.duality != "SD" or b.duality != "ASD":
        raise ValueError("intersection_optics expects an SD report and an ASD report")
    s = F.contract(a.spinor, b.expansion)
    t = F.contract(b.spinor, a.expansion)
    theta, rho = s + t, s - t
    size_a = float(np.max(np.abs(a.spinor)))
    size_b = float(np.max(np.abs(b.spinor)))
    threshold = tol * (size_a * b.scale + size_b * a.scale)
    cls = ("+" if abs(theta) > threshold else "-") + ("+" if abs(rho) > threshold else "-")
    return OpticsReport(theta, rho, cls, threshold)


def optics_table(sd_reports, asd_reports, tol=OPTICS_TOL):
    """Optics in the canonical order (m, m'), (m, n'), (n, m'), (n, n')."""
    return [intersection_optics(a, b, tol) for a in sd_reports for b in asd_reports]


# Plebanski-form systems ---------------------------------------------------------------

def _d(f, v):
    return J.derivative(f, v)


def _val(j):
    return j.value


def asd_z_system_residual(z, Q, point):
    """(r1, r2, M_A) for m_A' = [z, 1] in the weak-HH metric with data Q.

    r1 = z z_y - z_x and r2 = z_q - z z_p - z_y Y + z Y_y - Y_x with
    Y = B + 2 z Q + z^2 A; derivatives of Y are total derivatives.
    """
    pj = Q.jets(point) if isinstance(Q, F.PlebanskiData) else Q
    zj = _jet_of(z, point)
    q_, p_, x_, y_ = range(4)
    r1 = zj * _d(zj, y_) - _d(zj, x_)
    Y = pj.b + 2 * zj * pj.q + zj * zj * pj.a
    r2 = _d(zj, q_) - zj * _d(zj, p_) - _d(zj, y_) * Y + zj * _d(Y, y_) - _d(Y, x_)
    W = pj.q + zj * pj.a
    m1 = -_d(zj, y_)
    m2 = -_d(zj, p_) - _d(W, x_) + zj * _d(W, y_) - _d(zj, y_) * W
    M = F.SQRT2 * np.array([m1.value, m2.value])
    return r1.value, r2.value, M


def asd_w_system_residual(w, Q, point):
    """(r1, r2, N_A) for n_A' = [1, w]; Z = A + 2 w Q + w^2 B."""
    pj = Q.jets(point) if isinstance(Q, F.PlebanskiData) else Q
    wj = _jet_of(w, point)
    q_, p_, x_, y_ = range(4)
    r1 = _d(wj, y_) - wj * _d(wj, x_)
    Z = pj.a + 2 * wj * pj.q + wj * wj * pj.b
    r2 = _d(wj, p_) - wj * _d(wj, q_) + _d(Z, y_) - wj * _d(Z, x_) + _d(wj, x_) * Z
    W = pj.q + wj * pj.b
    n1 = _d(wj, x_)
    n2 = _d(wj, q_) + wj * _d(W, x_) - _d(W, y_) - _d(wj, x_) * W
    N = F.SQRT2 * np.array([n1.value, n2.value])
    return r1.value, r2.value, N


def second_sd_residual(n, A, B, point):
    """(r1, r2, N_A') for n_A = [1, n] in the Walker-pK form (Q = 0).

    r1 = n_q - n_y B - B_p + n B_y - n n_x
    r2 = n_p + n_x A + A_q - n A_x - n n_y
    N_M' = sqrt2 dn/dp^M' = sqrt2 (n_x, n_y).
    """
    nj, a, b = (_jet_of(f, point) for f in (n, A, B))
    q_, p_, x_, y_ = range(4)
    r1 = _d(nj, q_) - _d(nj, y_) * b - _d(b, p_) + nj * _d(b, y_) - nj * _d(nj, x_)
    r2 = _d(nj, p_) + _d(nj, x_) * a + _d(a, q_) - nj * _d(a, x_) - nj * _d(nj, y_)
    N = F.SQRT2 * np.array([_d(nj, x_).value, _d(nj, y_).value])
    return r1.value, r2.value, N


def candidate_n(Cup, real_mode=False, tol=1e-8, scale=None):
    """Roots n of C^(1) - 4 C^(2) n + 6 C^(3) n^2 = 0.

    Returns (n_plus, n_minus) when C^(3) != 0, (C^(1) / (4 C^(2)),) when only
    C^(3) vanishes.  In real mode a negative discriminant gives ().
    """
    c1, c2, c3 = Cup[0], Cup[1], Cup[2]
    s = float(np.max(np.abs(Cup))) if scale is None else float(scale)
    thr = tol * s
    if abs(c3) > thr:
        delta = 2 * c2 * c2 - 3 * c3 * c1
        if real_mode:
            delta = float(np.real(delta))
            if abs(delta) <= tol * s * s:
                root = 0.0
            elif delta < 0:
                return ()
            else:
                root = np.sqrt(2 * delta)
        else:
            root = np.sqrt(complex(2 * delta))
            if abs(delta) <= tol * s * s:
                root = 0.0
        base = c2 / (3 * c3)
        return (base + root / (6 * c3), base - root / (6 * c3))
    if abs(c2) > thr:
        return (c1 / (4 * c2),)
    raise BothLeadingZero("C^(3) and C^(2) both vanish")


# type [III] second congruence ------------------------------------------------------

def type3_coefficients(M0, N, P, Om, point):
    """Jets of a, b, c, f built from N, P, Omega (functions of q, p)."""
    Nj, Pj, Oj = (_jet_of(f, point) for f in (N, P, Om))
    q_, p_ = 0, 1
    Np, Pq, Oq = _d(Nj, p_), _d(Pj, q_), _d(Oj, q_)
    a = Np + Pq
    b = Pj * Np - _d(Np, p_) + 2 * M0 * Oq
    c = Nj * Pq + _d(Pq, q_)
    f = _d(Oq, q_) + Nj * Oq
    return Nj, Pj, Oj, a, b, c, f


def _type3_terms(M0, N, P, Om, point):
    Nj, Pj, Oj, a, b, c, f = type3_coefficients(M0, N, P, Om, point)
    q_, p_ = 0, 1
    Np, Pq, Oq = _d(Nj, p_), _d(Pj, q_), _d(Oj, q_)
    # a..f are order-1 jets here, enough for one more derivative
    return [
        [2 * b * _d(a, q_), -2 * a * _d(b, q_), -4 * a * a * Np, -2 * M0 * a * f, c * b],
        [2 * a * _d(c, q_), -2 * c * _d(a, q_), 2 * Nj * a * c, -c * c],
        [2 * a * _d(f, q_), -2 * f * _d(a, q_), 2 * Nj * a * f, -f * c],
        [2 * b * _d(a, p_), -2 * a * _d(b, p_), -4 * M0 * a * a * Oj, 2 * Pj * b * a, -b * b],
        [2 * a * _d(c, p_), -2 * c * _d(a, p_), 4 * a * a * Pq, -2 * M0 * a * f, c * b],
        [2 * a * _d(f, p_), -2 * f * _d(a, p_), 4 * a * a * Oq, 2 * Oj * a * c, -2 * Pj * f * a, f * b],
    ]


def type3_system_residual(M0, N, P, Om, point):
    """Six residuals of the overdetermined system for N, P, Omega."""
    return np.array([sum(J.as_jet(t).value for t in eq) for eq in _type3_terms(M0, N, P, Om, point)])


def type3_system_scale(M0, N, P, Om, point):
    """Largest single term of each equation; rounding error is relative to it."""
    return np.array([max(abs(J.as_jet(t).value) for t in eq) for eq in _type3_terms(M0, N, P, Om, point)])


def type3_n(M0, N, P, Om, point):
    """Jet of n = C^(1) / (4 C^(2)) for the SD type [III] metric with M = M0.

    C^(2) = -a and C^(1) / 2 = 2 M0 a x y + b y - c x - f.
    """
    _, _, _, a, b, c, f = type3_coefficients(M0, N, P, Om, point)
    x = J.seed(np.asarray(point), 2)
    y = J.seed(np.asarray(point), 3)
    c1 = 2 * (2 * M0 * a * x * y + b * y - c * x - f)
    return c1 / (-4 * a)


# implicitly defined fields ------------------------------------------------------------

IMPLICIT_TOL = 1e-13
IMPLICIT_MAXITER = 60


class ImplicitField:
    """u(q, p, x, y) defined by G(q, p, x, y, u) = 0 near a seed value.

    ``equation`` is a DSL expression over the coordinates plus ``unknown``.
    The value is found by Newton's method (bracketed Brent fallback), the jet
    by chord iteration U <- U - G(U) / G_u, which gains one order per step.
    """

    def __init__(self, equation, unknown="u", params=None, guess=0.0, bracket=None,
                 coordinates=DEFAULT_COORDINATES, mode="real"):
        self.expr = parse(equation, coordinates=coordinates, mode=mode, auxiliary=(unknown,))
        self.params = dict(params or {})
        self.guess = guess
        self.bracket = bracket
        self.source = equation
        self.mode = mode

    def _residual(self, point, u):
        return eval_value_expr(self.expr, np.append(np.asarray(point, dtype=float), u), self.params)

    def _slope(self, point, u):
        coords = [J.constant(float(v)) for v in point] + [J.seed(np.array([u, 0, 0, 0.0]), 0)]
        g = eval_jet_expr(self.expr, coords, self.params)
        return J.partial(g, (1, 0, 0, 0))

    def solve(self, point):
        point = np.asarray(point, dtype=float)
        f = lambda u: self._residual(point, u)  # noqa: E731
        fp = lambda u: self._slope(point, u)  # noqa: E731
        try:
            u = optimize.newton(f, self.guess, fprime=fp, tol=IMPLICIT_TOL, maxiter=IMPLICIT_MAXITER)
            if np.isfinite(u) and abs(f(u)) <= 1e-10 * (1 + abs(u)):
                return float(u)
        except (RuntimeError, ZeroDivisionError, ArithmeticError):
            pass
        if self.bracket is None:
            raise ImplicitSolveFailed(f"no root of {self.source!r} near {self.guess} at {point}")
        try:
            return float(optimize.brentq(f, *self.bracket, xtol=IMPLICIT_TOL, maxiter=IMPLICIT_MAXITER))
        except (ValueError, RuntimeError) as exc:
            raise ImplicitSolveFailed(str(exc)) from None

    def value(self, point):
        return self.solve(point)

    def jet(self, point):
        point = np.asarray(point, dtype=float)
        u0 = self.solve(point)
        slope = self._slope(point, u0)
        if slope == 0:
            raise ImplicitSolveFailed("implicit equation is degenerate (G_u = 0)")
        coords = [J.seed(point, v) for v in range(J.NVARS)]
        U = J.constant(u0)
        for _ in range(J.ORDER + 1):
            G = eval_jet_expr(self.expr, coords + [U], self.params)
            U = U - G / slope
        return J.Jet(U.coeffs, J.ORDER)

    __call__ = jet


def scalar(f, point):
    """Value of a field-like object at a point."""
    return _jet_of(f, point).value


def as_field(source, params=None, mode="real", coordinates=DEFAULT_COORDINATES):
    """ScalarField from a string, or the object itself."""
    if isinstance(source, str):
        return ScalarField(source, params, mode, coordinates)
    return source
