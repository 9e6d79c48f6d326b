"""Two-spinor conventions, the Plebanski null tetrad and connection conversions.

Index rules: eps_AB = eps^AB = [[0, 1], [-1, 0]], lowering m_A = eps_AB m^B,
raising m^A = m_B eps^BA, identically for dotted indices.  Tetrad indices
a = 1..4 are stored 0-based.  The line element is ds^2 = 2 e1 e2 + 2 e3 e4,
and metric jets hold the ds^2/2 tensor.

Coordinates are (q, p, x, y) = (q^1', q^2', p^1', p^2').  For a symmetric
Q^{A'B'} = [[A, Q], [Q, B]] the Plebanski coframe is

    [e3, e1] = dq_A'            [e4, e2] = -dp^A' + Q^{A'B'} dq_B'

with the derivative operators ``d_A' = d/dp^A'``, ``d^A' = d/dp_A'``,
``eth_A' = d/dq^A' - Q_A'^B' d_B'`` and ``eth^A' = d/dq_A' + Q^{A'B'} d_B'``
taken literally as written (with p_1' = y, p_2' = -x, q_1' = p, q_2' = -q).
"""

from dataclasses import dataclass

import numpy as np

from . import jet as J
from .dsl import ScalarField

SQRT2 = np.sqrt(2.0)
EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])

# tetrad metric of ds^2 = 2 e1 e2 + 2 e3 e4
ETA = np.array(
    [[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0]]
)

Q_, P_, X_, Y_ = range(4)


def lower(m_up):
    """m_A = eps_AB m^B."""
    return EPS @ np.asarray(m_up)


def raise_index(m_dn):
    """m^A = m_B eps^BA."""
    return EPS.T @ np.asarray(m_dn)


def contract(a_dn, b_dn):
    """a_A b^A for two lower-index spinors."""
    return a_dn @ raise_index(b_dn)


# Plebanski data -----------------------------------------------------------------

@dataclass(frozen=True)
class PlebanskiData:
    """The three independent entries (A, Q, B) of Q^{A'B'}.

    Each entry is a ScalarField or any callable ``point -> Jet``.
    """

    A: object
    Q: object
    B: object

    def jets(self, point):
        return PlebanskiJets(*(_field_jet(f, point) for f in (self.A, self.Q, self.B)))


def _field_jet(f, point):
    if isinstance(f, ScalarField):
        return f.jet(point)
    if isinstance(f, J.Jet):
        return f
    if callable(f):
        return f(point)
    return J.as_jet(f)


def plebanski(A="0", Q="0", B="0", params=None, mode="real"):
    """Build PlebanskiData from DSL strings."""
    return PlebanskiData(*(ScalarField(s, params, mode) for s in (A, Q, B)))


class PlebanskiJets:
    """Jets of Q^{A'B'} at a point with the derivative operators of the frame."""

    def __init__(self, a, q, b):
        self.a, self.q, self.b = a, q, b
        self.up = [[a, q], [q, b]]
        # Q_{A'B'} = eps_A'C' eps_B'D' Q^{C'D'}
        self.dn = [[b, -q], [-q, a]]
        # Q_A'^B' = eps_A'C' Q^{C'B'}
        self.mixed = [[q, b], [-a, -q]]

    @staticmethod
    def d_dn(f, A):
        """d_A' = d / dp^A'  (d_x, d_y)."""
        return J.derivative(f, (X_, Y_)[A])

    @staticmethod
    def d_up(f, A):
        """d^A' = d / dp_A'  with p_1' = y, p_2' = -x."""
        return J.derivative(f, Y_) if A == 0 else -J.derivative(f, X_)

    @staticmethod
    def dq_up(f, A):
        """d / dq^A'  (d_q, d_p)."""
        return J.derivative(f, (Q_, P_)[A])

    @staticmethod
    def dq_dn(f, A):
        """d / dq_A'  with q_1' = p, q_2' = -q."""
        return J.derivative(f, P_) if A == 0 else -J.derivative(f, Q_)

    def eth_up(self, f, A):
        return self.dq_dn(f, A) + self.up[A][0] * self.d_dn(f, 0) + self.up[A][1] * self.d_dn(f, 1)

    def eth_dn(self, f, A):
        return self.dq_up(f, A) - self.mixed[A][0] * self.d_dn(f, 0) - self.mixed[A][1] * self.d_dn(f, 1)


def plebanski_metric(Q, point):
    """Jets of the ds^2/2 tensor dq dy - dp dx + A dp^2 - 2 Q dp dq + B dq^2."""
    pj = Q.jets(point) if isinstance(Q, PlebanskiData) else Q
    return plebanski_metric_from_jets(pj)


def plebanski_metric_from_jets(pj):
    zero = J.constant(0.0)
    half = J.constant(0.5)
    g = [[zero] * 4 for _ in range(4)]
    g[Q_][Y_] = g[Y_][Q_] = half
    g[P_][X_] = g[X_][P_] = -half
    g[P_][P_] = pj.a
    g[Q_][Q_] = pj.b
    g[P_][Q_] = g[Q_][P_] = -pj.q
    return g


def plebanski_coframe(pj):
    """Rows e^a_mu (a = 1..4) of the Plebanski coframe as jets."""
    c = J.constant
    return [
        [c(-1.0), c(0.0), c(0.0), c(0.0)],
        [-pj.b, pj.q, c(0.0), c(-1.0)],
        [c(0.0), c(1.0), c(0.0), c(0.0)],
        [-pj.q, pj.a, c(-1.0), c(0.0)],
    ]


def metric_from_coframe(e):
    """ds^2/2 = e1 e2 + e3 e4 as a jet matrix, from coframe jets."""
    g = [[None] * 4 for _ in range(4)]
    for m in range(4):
        for n in range(m, 4):
            val = 0.5 * (e[0][m] * e[1][n] + e[1][m] * e[0][n] + e[2][m] * e[3][n] + e[3][m] * e[2][n])
            g[m][n] = g[n][m] = val
    return g


# connections ----------------------------------------------------------------------

@dataclass
class TetradConnection:
    """Gamma_abc (0-based array), antisymmetric in the first pair."""

    gamma: np.ndarray

    def __call__(self, a, b, c):
        """1-based access, e.g. ``conn(4, 2, 1)`` for Gamma_421."""
        return self.gamma[a - 1, b - 1, c - 1]


@dataclass
class SpinorConnection:
    """undotted[A, B, M, N'] = Gamma_{ABMN'}, dotted[A', B', M, N'] = Gamma_{A'B'MN'}."""

    undotted: np.ndarray
    dotted: np.ndarray

    def max_abs(self):
        return float(max(np.max(np.abs(self.undotted)), np.max(np.abs(self.dotted))))


def _one_form_matrix(X, factor):
    # factor * [[X4, X2], [X1, -X3]] (rows M, columns N'), X 0-based over tetrad index
    return factor * np.array([[X[3], X[1]], [X[0], -X[2]]])


def gamma_to_spinor(conn):
    """Spinor connection from Gamma_abc by the explicit 2x2 matrix relations."""
    G = conn.gamma if isinstance(conn, TetradConnection) else np.asarray(conn)
    g = lambda a, b: G[a - 1, b - 1, :]  # noqa: E731
    dtype = G.dtype
    un = np.zeros((2, 2, 2, 2), dtype=dtype)
    dt = np.zeros((2, 2, 2, 2), dtype=dtype)
    un[0, 0] = _one_form_matrix(g(4, 2), SQRT2)
    un[1, 1] = _one_form_matrix(g(3, 1), SQRT2)
    un[0, 1] = un[1, 0] = _one_form_matrix(g(1, 2) + g(3, 4), 1 / SQRT2)
    dt[0, 0] = _one_form_matrix(g(4, 1), SQRT2)
    dt[1, 1] = _one_form_matrix(g(3, 2), SQRT2)
    dt[0, 1] = dt[1, 0] = _one_form_matrix(-g(1, 2) + g(3, 4), 1 / SQRT2)
    return SpinorConnection(un, dt)


def spinor_forms(F):
    """Split an so(4)-valued form F_ab... into its SD and ASD spinor images.

    Gamma_AB   = -1/2 [[2 F42, F12 + F34], [F12 + F34, 2 F31]]
    Gamma_A'B' = -1/2 [[2 F41, -F12 + F34], [-F12 + F34, 2 F32]]

    ``F`` has shape (4, 4, ...); the trailing axes (form components) are kept.
    """
    F = np.asarray(F)
    f = lambda a, b: F[a - 1, b - 1]  # noqa: E731
    un = np.zeros((2, 2) + F.shape[2:], dtype=F.dtype)
    dt = np.zeros_like(un)
    un[0, 0] = -f(4, 2)
    un[1, 1] = -f(3, 1)
    un[0, 1] = un[1, 0] = -0.5 * (f(1, 2) + f(3, 4))
    dt[0, 0] = -f(4, 1)
    dt[1, 1] = -f(3, 2)
    dt[0, 1] = dt[1, 0] = -0.5 * (-f(1, 2) + f(3, 4))
    return un, dt


def _spinor_components_from_one_forms(forms):
    # Gamma_AB = -1/2 Gamma_ABMN' g^{MN'}, g^{MN'} = sqrt2 [[e4, e2], [e1, -e3]]
    out = np.zeros((2, 2, 2, 2), dtype=forms.dtype)
    out[:, :, 0, 0] = -SQRT2 * forms[:, :, 3]
    out[:, :, 0, 1] = -SQRT2 * forms[:, :, 1]
    out[:, :, 1, 0] = -SQRT2 * forms[:, :, 0]
    out[:, :, 1, 1] = SQRT2 * forms[:, :, 2]
    return out


def spinor_connection_from_forms(conn):
    """Spinor connection via the 1-form relations (independent of gamma_to_spinor)."""
    G = conn.gamma if isinstance(conn, TetradConnection) else np.asarray(conn)
    un_forms, dt_forms = spinor_forms(G)
    return SpinorConnection(
        _spinor_components_from_one_forms(un_forms), _spinor_components_from_one_forms(dt_forms)
    )


def spinor_to_gamma(sc):
    """Invert the 1-form relations: recover Gamma_abc from a spinor connection."""
    def forms(arr):
        # Gamma_AB(E_c) from Gamma_ABMN'
        f = np.zeros((2, 2, 4), dtype=arr.dtype)
        f[:, :, 3] = -arr[:, :, 0, 0] / SQRT2
        f[:, :, 1] = -arr[:, :, 0, 1] / SQRT2
        f[:, :, 0] = -arr[:, :, 1, 0] / SQRT2
        f[:, :, 2] = arr[:, :, 1, 1] / SQRT2
        return f

    un, dt = forms(sc.undotted), forms(sc.dotted)
    G = np.zeros((4, 4, 4), dtype=un.dtype)

    def put(a, b, v):
        G[a - 1, b - 1] = v
        G[b - 1, a - 1] = -v

    put(4, 2, -un[0, 0])
    put(3, 1, -un[1, 1])
    put(4, 1, -dt[0, 0])
    put(3, 2, -dt[1, 1])
    # F12 + F34 = -2 un01 and -F12 + F34 = -2 dt01
    put(3, 4, -(un[0, 1] + dt[0, 1]))
    put(1, 2, -un[0, 1] + dt[0, 1])
    return TetradConnection(G)


def spin_connection_plebanski(Q, point):
    """Closed-form spinor connection of the Plebanski tetrad.

    Gamma_{122D'} = -(1/sqrt2) d^A' Q_A'D',  Gamma_{222D'} = -sqrt2 eth^A' Q_A'D',
    Gamma_{A'B'2D'} = sqrt2 d_(A' Q_B')D'; every other component is zero.
    """
    pj = Q.jets(point) if isinstance(Q, PlebanskiData) else Q
    dtype = complex if any(j.is_complex for j in (pj.a, pj.q, pj.b)) else float
    un = np.zeros((2, 2, 2, 2), dtype=dtype)
    dt = np.zeros((2, 2, 2, 2), dtype=dtype)
    for D in range(2):
        g12 = -(pj.d_up(pj.dn[0][D], 0) + pj.d_up(pj.dn[1][D], 1)).value / SQRT2
        g22 = -SQRT2 * (pj.eth_up(pj.dn[0][D], 0) + pj.eth_up(pj.dn[1][D], 1)).value
        un[0, 1, 1, D] = un[1, 0, 1, D] = g12
        un[1, 1, 1, D] = g22
        for A in range(2):
            for B in range(2):
                sym = 0.5 * (pj.d_dn(pj.dn[B][D], A) + pj.d_dn(pj.dn[A][D], B))
                dt[A, B, 1, D] = SQRT2 * sym.value
    return SpinorConnection(un, dt)


# coordinate oracle: Gamma_abc from Christoffels -------------------------------------

def frame_values(coframe_jets):
    """Coframe e[a, mu], its derivatives de[m, a, mu] and the dual frame E[mu, a]."""
    from .tensor import jet_matrix_derivatives

    e, de, _ = jet_matrix_derivatives(coframe_jets, need_hessian=False)
    E = np.linalg.inv(e)
    return e, de, E


def tetrad_connection(geometry, coframe_jets):
    """Gamma_abc = <E_a, nabla_{E_c} E_b> from the coordinate Christoffels.

    Equivalent to de^a = -Gamma^a_b ^ e^b with Gamma_ab = Gamma_abc e^c.
    """
    e, de, E = frame_values(coframe_jets)
    # d_m E = -E (d_m e) E
    dE = -np.einsum("ua,mab,bv->muv", E, de, E)  # dE[m, nu, b] = d_m E_b^nu
    G = geometry.gamma
    D = np.einsum("mc,mvb->vbc", E, dE) + np.einsum("vml,mc,lb->vbc", G, E, E)
    omega = np.einsum("av,vbc->abc", e, D)
    return TetradConnection(np.einsum("ad,dbc->abc", ETA, omega))


def check_coframe(geometry, coframe_jets, factor=2.0):
    """max |g_mu nu - eta_ab e^a_mu e^b_nu| (both for ds^2)."""
    e, _, _ = frame_values(coframe_jets)
    return float(np.max(np.abs(geometry.g - np.einsum("am,ab,bn->mn", e, ETA, e))))


def spinor_derivative_vectors(E):
    """Coordinate components of d_{MN'} = -sqrt2 [[E4, E2], [E1, -E3]]; shape (2, 2, 4)."""
    out = np.zeros((2, 2, 4), dtype=E.dtype)
    out[0, 0] = -SQRT2 * E[:, 3]
    out[0, 1] = -SQRT2 * E[:, 1]
    out[1, 0] = -SQRT2 * E[:, 0]
    out[1, 1] = SQRT2 * E[:, 2]
    return out
