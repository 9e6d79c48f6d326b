"""Coordinate-basis tensor calculus at a point, fed by metric jets.

This is the independent reference route: Christoffel symbols from the metric
and its derivatives, then the Riemann tensor from the Christoffels and their
first derivatives.  Nothing here knows about spinors or tetrads.
"""

import numpy as np

from . import jet as J
from .errors import DegenerateMetric

_UNIT = [tuple(1 if i == v else 0 for i in range(4)) for v in range(4)]


def value_grad_hess(j):
    """Value, gradient and Hessian of a jet (needs order >= 2)."""
    val = j.value
    grad = np.array([J.partial(j, _UNIT[v]) for v in range(4)])
    hess = np.empty((4, 4), dtype=j.coeffs.dtype)
    for a in range(4):
        for b in range(a, 4):
            alpha = [0, 0, 0, 0]
            alpha[a] += 1
            alpha[b] += 1
            hess[a, b] = hess[b, a] = J.partial(j, alpha)
    return val, grad, hess


def value_grad(j):
    return j.value, np.array([J.partial(j, _UNIT[v]) for v in range(4)])


def jet_matrix_derivatives(jets, need_hessian=True):
    """Stack a matrix of jets into value, first and second derivative arrays.

    Returns (m[i,j], dm[k,i,j], ddm[k,l,i,j]).
    """
    rows, cols = len(jets), len(jets[0])
    complex_ = any(jets[i][j].is_complex for i in range(rows) for j in range(cols))
    dtype = complex if complex_ else float
    m = np.zeros((rows, cols), dtype=dtype)
    dm = np.zeros((4, rows, cols), dtype=dtype)
    ddm = np.zeros((4, 4, rows, cols), dtype=dtype) if need_hessian else None
    for i in range(rows):
        for j in range(cols):
            if need_hessian:
                v, g, h = value_grad_hess(jets[i][j])
                ddm[:, :, i, j] = h
            else:
                v, g = value_grad(jets[i][j])
            m[i, j] = v
            dm[:, i, j] = g
    return m, dm, ddm


class CoordinateGeometry:
    """Metric, inverse metric, Christoffels and Riemann tensor at one point.

    Index conventions: ``dg[k, i, j] = d_k g_ij``;
    ``gamma[l, i, j] = Gamma^l_ij``; ``dgamma[m, l, i, j] = d_m Gamma^l_ij``;
    ``riemann[r, s, m, n] = R^r_smn`` with
    R^r_smn = d_m Gamma^r_ns - d_n Gamma^r_ms + Gamma^r_ml Gamma^l_ns - Gamma^r_nl Gamma^l_ms.
    """

    def __init__(self, g, dg, ddg):
        scale = max(float(np.max(np.abs(g))), 1e-300)
        det = np.linalg.det(g)
        if not np.isfinite(det) or abs(det) <= 1e-12 * scale**4:
            raise DegenerateMetric(f"metric determinant {det!r} is numerically zero")
        self.g, self.dg, self.ddg = g, dg, ddg
        ginv = np.linalg.inv(g)
        self.ginv = ginv
        first = 0.5 * (
            np.einsum("ikj->kij", dg) + np.einsum("jki->kij", dg) - dg
        )  # first[k,i,j] = Gamma_kij
        self.gamma = np.einsum("lk,kij->lij", ginv, first)
        if ddg is None:
            self.dgamma = None
            self.riemann = None
            return
        dfirst = 0.5 * (
            np.einsum("mikj->mkij", ddg) + np.einsum("mjki->mkij", ddg) - ddg
        )
        dginv = -np.einsum("la,mab,bk->mlk", ginv, dg, ginv)
        self.dgamma = np.einsum("mlk,kij->mlij", dginv, first) + np.einsum(
            "lk,mkij->mlij", ginv, dfirst
        )
        dG = self.dgamma
        G = self.gamma
        self.riemann = (
            np.einsum("mrns->rsmn", dG)
            - np.einsum("nrms->rsmn", dG)
            + np.einsum("rml,lns->rsmn", G, G)
            - np.einsum("rnl,lms->rsmn", G, G)
        )

    def riemann_lower(self):
        """R_rsmn = g_rl R^l_smn."""
        return np.einsum("rl,lsmn->rsmn", self.g, self.riemann)

    def ricci(self):
        """R_sn = R^r_srn."""
        return np.einsum("rsrn->sn", self.riemann)

    def scalar(self):
        return np.einsum("sn,sn->", self.ginv, self.ricci())

    def bianchi_residual(self):
        """max |R_r[smn]| (first Bianchi identity)."""
        R = self.riemann_lower()
        cyc = R + np.einsum("rmns->rsmn", R) + np.einsum("rnsm->rsmn", R)
        return float(np.max(np.abs(cyc)))


def geometry_from_jets(metric_jets, factor=2.0):
    """Coordinate geometry of ``factor`` times the tensor given by the jets.

    Metric jets in this package hold ds^2/2; the curvature of the line
    element ds^2 itself is wanted, hence the default factor 2.
    """
    g, dg, ddg = jet_matrix_derivatives(metric_jets)
    return CoordinateGeometry(factor * g, factor * dg, factor * ddg)
