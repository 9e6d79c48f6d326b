"""Curvature at a point by two independent routes.

``oracle_curvature`` works from any metric plus a null coframe: coordinate
Christoffels, the Riemann tensor, tetrad components, and finally projection
of the spinor curvature 2-forms onto the SD/ASD bases S^{AB}, S^{A'B'} via

    R_AB   = -1/2 C_ABCD S^CD       + R/24 S_AB   + 1/2 C_ABC'D' S^C'D'
    R_A'B' = -1/2 C_A'B'C'D' S^C'D' + R/24 S_A'B' + 1/2 C_CDA'B' S^CD

``plebanski_curvature`` evaluates the closed-form expressions valid in the
Plebanski tetrad.  R is the scalar curvature of ds^2 (R = -4 Lambda for
Einstein spaces).

The SD coefficients C^(i) are read with nu_A = [0, 1], mu_A = [1, 0]:
C^(1) = 2 C_2222, C^(2) = 2 C_1222, C^(3) = 2 C_1122, C^(4) = 2 C_1112,
C^(5) = 2 C_1111.  The scalar is sign-flipped relative to the usual
contraction R^r_srn so that Einstein spaces have R = -4 Lambda.
"""

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from . import frame as F
from . import jet as J
from .tensor import geometry_from_jets

ZERO_TOL = 1e-8

# component k of a totally symmetric 4-spinor carries k indices equal to 2
_SYM4_INDEX = [(0, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 1), (0, 1, 1, 1), (1, 1, 1, 1)]
_PAIRS = [(0, 0), (0, 1), (1, 1)]


@dataclass
class CurvatureData:
    """Curvature summary in the adapted null tetrad.

    ``Cup`` = (C^(1), ..., C^(5)); ``Cdown[k]`` = C_{A'B'C'D'} with k dotted
    indices equal to 2; ``ricci[i, j]`` = C_{AB C'D'} for AB, C'D' in
    (11, 12, 22); ``R`` the scalar curvature of ds^2.
    """

    Cup: np.ndarray
    Cdown: np.ndarray
    ricci: np.ndarray
    R: complex
    diagnostics: dict = field(default_factory=dict)

    def components(self):
        return np.concatenate([self.Cup, self.Cdown, self.ricci.ravel(), [self.R]])

    def scale(self):
        return float(np.max(np.abs(self.components())))

    def zero_threshold(self, tol=ZERO_TOL):
        return tol * (1.0 + self.scale())

    def is_zero(self, value, tol=ZERO_TOL):
        return abs(value) <= self.zero_threshold(tol)

    @property
    def C(self):
        """Named access: C[1] .. C[5]."""
        return {i + 1: self.Cup[i] for i in range(5)}

    def sd_spinor(self):
        """Components C_1111, C_1112, C_1122, C_1222, C_2222."""
        c1, c2, c3, c4, c5 = self.Cup
        return np.array([c5, c4, c3, c2, c1]) / 2

    def is_real(self, tol=1e-12):
        return bool(np.max(np.abs(np.imag(self.components()))) <= tol * (1 + self.scale()))


def cup_from_spinor(s):
    """(C^(1), ..., C^(5)) from C_1111, C_1112, C_1122, C_1222, C_2222."""
    s = np.asarray(s)
    return 2 * s[::-1]


@dataclass
class EinsteinResidual:
    maxRicci: float
    scalarGap: float

    def passes(self, tol):
        return self.maxRicci <= tol and self.scalarGap <= tol


# two-form bases ------------------------------------------------------------------

def _wedge(a, b):
    m = np.zeros((4, 4))
    m[a - 1, b - 1] = 1.0
    m[b - 1, a - 1] = -1.0
    return m


SD_BASIS = [2 * _wedge(4, 2), _wedge(1, 2) + _wedge(3, 4), 2 * _wedge(3, 1)]
ASD_BASIS = [2 * _wedge(4, 1), -_wedge(1, 2) + _wedge(3, 4), 2 * _wedge(3, 2)]
_UPPER = np.triu_indices(4, 1)
_BASIS_MATRIX = np.array([b[_UPPER] for b in SD_BASIS + ASD_BASIS]).T


def decompose_two_form(F2):
    """Coefficients of a 2-form (antisymmetric tetrad components) on S^{AB}, S^{A'B'}."""
    coeffs = np.linalg.solve(_BASIS_MATRIX, np.asarray(F2)[_UPPER])
    return coeffs[:3], coeffs[3:]


def _weyl_system():
    # unknowns: (W_1111, W_1112, W_1122, W_1222, W_2222, R/24)
    # rows: coefficient of S^{CD} (CD in 11,12,22) in R_AB for AB in 11,12,22
    rows = []
    for ab in _PAIRS:
        for cd in _PAIRS:
            row = np.zeros(6)
            idx = tuple(sorted(ab + cd))
            k = sum(idx)
            if cd == (0, 1):
                row[k] = -1.0
                if ab == (0, 1):
                    row[5] = -1.0
            else:
                row[k] = -0.5
                if (ab, cd) in (((1, 1), (0, 0)), ((0, 0), (1, 1))):
                    row[5] = 1.0
            rows.append(row)
    return np.array(rows)


_WEYL_SYSTEM = _weyl_system()


def _split(forms, dotted=False):
    """Solve the Weyl/scalar part and the mixed Ricci part of three curvature forms.

    Undotted forms R_AB carry their own Weyl part on S^{AB}; dotted forms
    R_A'B' carry it on S^{A'B'}, and the mixed part sits on the other basis.
    """
    same = np.zeros(9, dtype=forms.dtype)
    mixed = np.zeros((3, 3), dtype=forms.dtype)
    for i, (A, B) in enumerate(_PAIRS):
        s, a = decompose_two_form(forms[A, B])
        if dotted:
            s, a = a, s
        same[3 * i:3 * i + 3] = s
        # 1/2 C_AB C'D' S^{C'D'} summed over C'D' = 11, 12, 21, 22
        mixed[i] = a * np.array([2.0, 1.0, 2.0])
    sol, res, _, _ = np.linalg.lstsq(_WEYL_SYSTEM.astype(forms.dtype), same, rcond=None)
    residual = float(np.max(np.abs(_WEYL_SYSTEM @ sol - same)))
    return sol[:5], 24 * sol[5], mixed, residual


def oracle_curvature(metric_jets, coframe_jets=None, return_geometry=False):
    """Curvature from the coordinate metric by the Christoffel -> Riemann chain.

    ``metric_jets`` is the ds^2/2 tensor (order >= 2).  ``coframe_jets``
    defaults to the metric's Plebanski coframe when the metric is given as
    PlebanskiData/PlebanskiJets; otherwise it must be supplied.
    """
    if isinstance(metric_jets, F.PlebanskiJets):
        pj = metric_jets
        metric_jets = F.plebanski_metric_from_jets(pj)
        coframe_jets = F.plebanski_coframe(pj) if coframe_jets is None else coframe_jets
    if coframe_jets is None:
        raise ValueError("a null coframe is needed for the spinor decomposition")
    geo = geometry_from_jets(metric_jets)
    e, _, E = F.frame_values(coframe_jets)
    Rl = geo.riemann_lower()
    Rt = np.einsum("rsmn,ra,sb,mc,nd->abcd", Rl, E, E, E, E)
    un, dt = F.spinor_forms(Rt)
    sd, R_sd, ricci_sd, res_sd = _split(un)
    asd, R_asd, ricci_asd, res_asd = _split(dt, dotted=True)
    R_tensor = -geo.scalar()
    diagnostics = {
        "coframe": F.check_coframe(geo, coframe_jets),
        "bianchi": geo.bianchi_residual(),
        "sd_split_residual": res_sd,
        "asd_split_residual": res_asd,
        "scalar_mismatch": float(max(abs(R_sd - R_tensor), abs(R_asd - R_tensor))),
        # ricci_asd[i, j] = C_{CD A'B'} with A'B' = pair i, CD = pair j
        "ricci_mismatch": float(np.max(np.abs(ricci_sd - ricci_asd.T))),
    }
    data = CurvatureData(cup_from_spinor(sd), np.asarray(asd), ricci_sd, R_tensor, diagnostics)
    if return_geometry:
        return data, geo
    return data


def _sym4(T):
    out = []
    for idx in _SYM4_INDEX:
        vals = [T[p] for p in set(permutations(idx))]
        out.append(sum(vals) / len(vals))
    return out


def plebanski_curvature(Q, point=None):
    """Closed-form curvature of the weak-HH metric in the Plebanski tetrad."""
    pj = Q.jets(point) if isinstance(Q, F.PlebanskiData) else Q
    up, dn = pj.up, pj.dn
    d_dn, d_up, eth = pj.d_dn, pj.d_up, pj.eth_up

    c3 = -sum(d_dn(d_dn(up[A][B], A), B).value for A in range(2) for B in range(2)) / 3
    eth_q = [[eth(dn[A][B], B) for B in range(2)] for A in range(2)]  # eth^B Q_AB, not summed
    c2 = -sum(d_up(eth_q[A][B], A).value for A in range(2) for B in range(2))
    half_c1 = -sum(eth(eth_q[A][B], A).value for A in range(2) for B in range(2))
    for B in range(2):
        left = eth(dn[0][B], 0) + eth(dn[1][B], 1)
        right = d_dn(up[B][0], 0) + d_dn(up[B][1], 1)
        half_c1 = half_c1 + (left.value * right.value)
    c1 = 2 * half_c1

    T = {}
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    T[(a, b, c, d)] = d_dn(d_dn(dn[c][d], b), a).value
    cdown = -np.array(_sym4(T))

    dtype = complex if any(j.is_complex for j in (pj.a, pj.q, pj.b)) else float
    ricci = np.zeros((3, 3), dtype=dtype)
    inner12 = [d_up(dn[B][0], 0) + d_up(dn[B][1], 1) for B in range(2)]  # d^C Q_BC
    inner22 = [eth(dn[B][0], 0) + eth(dn[B][1], 1) for B in range(2)]  # eth^C Q_BC
    for j, (A, B) in enumerate(_PAIRS):
        s12 = 0.5 * (d_dn(inner12[B], A).value + d_dn(inner12[A], B).value)
        s22 = 0.5 * (d_dn(inner22[B], A).value + d_dn(inner22[A], B).value)
        ricci[1, j] = -0.5 * s12
        ricci[2, j] = -s22
    cup = np.array([c1, c2, c3, 0.0, 0.0], dtype=np.result_type(c1, c2, c3))
    return CurvatureData(cup, cdown.astype(cup.dtype), ricci, 6 * c3)


def einstein_residual(c, Lambda):
    """Largest traceless-Ricci component and |R + 4 Lambda|."""
    return EinsteinResidual(float(np.max(np.abs(c.ricci))), float(abs(c.R + 4 * Lambda)))


def compare(a, b):
    """Largest component difference relative to the larger scale (+1e-30)."""
    scale = max(a.scale(), b.scale()) + 1e-30
    return float(np.max(np.abs(a.components() - b.components())) / scale)
