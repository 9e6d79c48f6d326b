"""Built-in metric families, their claimed geometry symbols and symmetry data.

Every family supplies, at a point, the jets of its displayed line element
(the ds^2/2 tensor in its own coordinates) and of a null coframe with
ds^2 = 2 e1 e2 + 2 e3 e4.  Families in Plebanski form (q, p, x, y) use the
Plebanski coframe; the others use the Plebanski coframe pulled back along
their coordinate change, so the declared congruence spinors keep their
Plebanski-tetrad components.

Slots are free functions with an arity contract: a slot expression may only
reference the coordinates listed for it.
"""

import configparser
import io
import math
import zlib
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from . import frame as F
from . import jet as J
from .classify import (
    ZERO_TOL,
    GeometrySymbol,
    assemble_symbol,
    classify_curvature,
    parse_symbol,
)
from .congruence import (
    SpinorFieldSpec,
    optics_table,
    point_frame,
    type3_n,
    type3_system_residual,
    type3_system_scale,
    verify_null_string,
)
from .curvature import oracle_curvature
from .dsl import ScalarField, coordinates_used, pretty
from .errors import (
    ArityViolation,
    DegenerateMetric,
    IllConditioned,
    MetricFileError,
    NullStringLabError,
    SingularPoint,
    UnboundSlot,
)
from .tensor import geometry_from_jets, jet_matrix_derivatives

LOCUS_DISTANCE = 1e-3
SAMPLE_POINTS = 20
MAX_ATTEMPTS = 2000


# descriptors --------------------------------------------------------------------

@dataclass(frozen=True)
class Slot:
    name: str
    arguments: tuple
    default: str


@dataclass(frozen=True)
class SpinorDecl:
    """A declared congruence: components are numbers or ``ctx -> Jet`` callables."""

    name: str
    duality: str
    components: tuple
    expected: str  # "n" or "e"


@dataclass(frozen=True)
class VectorFieldSpec:
    """K = K^mu d_mu with DSL components; ``chi0`` is a number or parameter name.

    ``asd_flag`` optionally records the expected expansion flag of the ASD
    congruence generated by the dotted spinor of a null K.
    """

    name: str
    components: tuple
    chi0: object = 0.0
    asd_flag: str = ""


@dataclass(frozen=True)
class MetricFamily:
    id: str
    title: str
    coordinates: tuple
    slots: tuple
    params: dict
    claimed: str
    functions_text: str
    congruences: tuple
    plebanski: object = None  # ctx -> (A, Q, B) jets
    line_element: object = None  # ctx -> {(i, j): coefficient of dx^i dx^j in ds^2/2}
    coframe: object = None  # ctx -> 4x4 jets
    loci: tuple = ()  # (label, ctx -> Jet) singular loci
    conditions: tuple = ()  # (label, ctx -> Jet) must not vanish
    killing: tuple = ()
    in_table: bool = True
    einstein: bool = False
    self_dual: bool = False
    master: object = None  # (instance, point) -> residual list
    type3: object = None  # (instance, point) -> six residuals

    @property
    def claimed_symbol(self):
        return parse_symbol(self.claimed)

    @property
    def slot_names(self):
        return tuple(s.name for s in self.slots)


class Ctx(SimpleNamespace):
    """Jets at a point: ``f`` slot jets, ``c`` coordinate jets, ``k`` parameters."""

    def d(self, j, *names):
        for name in names:
            j = J.derivative(j, self.index[name])
        return j

    def coord(self, name):
        return self.c[self.index[name]]


# Plebanski helpers ----------------------------------------------------------------

def _const(v):
    return J.constant(v)


def _pleb_coframe(a, q, b):
    return F.plebanski_coframe(F.PlebanskiJets(a, q, b))


def _pullback(rows, jac):
    """Rows e^a_mu in (q, p, x, y) pulled back with jac[mu][nu] = d old^mu / d new^nu."""
    out = []
    for row in rows:
        new = []
        for nu in range(4):
            acc = _const(0.0)
            for mu in range(4):
                acc = acc + row[mu] * jac[mu][nu]
            new.append(acc)
        out.append(new)
    return out


def _identity_jac():
    return [[_const(1.0 if i == j else 0.0) for j in range(4)] for i in range(4)]


# family definitions ---------------------------------------------------------------

QPXY = ("q", "p", "x", "y")
QP = ("q", "p")


def _weak_hh():
    return MetricFamily(
        "weak-hh", "weak HH-space in Plebanski form", QPXY,
        (Slot("A", QPXY, "x^2*y + q*p*x + p*sin(y)"), Slot("Q", QPXY, "x*y*p + exp(q*x)"),
         Slot("B", QPXY, "q*y^3 + x*y*p + cos(x)")),
        {}, "[deg]^{n} ⊗ [any]", "3 functions of 4 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"),),
        plebanski=lambda s: (s.f["A"], s.f["Q"], s.f["B"]),
    )


def _sesqui_pp():
    coords = ("q", "p", "x", "z")

    def parts(s):
        S = s.f["Sigma"]
        z, x = s.coord("z"), s.coord("x")
        Sq, Sp, Sz = s.d(S, "q"), s.d(S, "p"), s.d(S, "z")
        A, Q, Om = s.f["A"], s.f["Q"], s.f["Omega"]
        B = (x - Sz) * Om + z * Sp - Sq - 2 * z * Q - z * z * A
        return A, Q, B, Sq, Sp, Sz, Om, x, z

    def coframe(s):
        A, Q, B, Sq, Sp, Sz, _, x, z = parts(s)
        jac = _identity_jac()
        # y = -x z + Sigma(q, p, z)
        jac[3] = [Sq, Sp, -z, Sz - x]
        return _pullback(_pleb_coframe(A, Q, B), jac)

    def line(s):
        A, Q, _, _, Sp, Sz, Om, x, z = parts(s)
        return {
            (1, 2): _const(-1.0), (0, 2): -z, (0, 3): -(x - Sz), (1, 1): A,
            (0, 1): Sp - 2 * Q,
            (0, 0): (x - Sz) * Om + z * Sp - 2 * z * Q - z * z * A,
        }

    return MetricFamily(
        "sesqui-pp", "one SD and one expanding ASD congruence, intersection [++]", coords,
        (Slot("A", coords, "x*z + q^2 + p*z^2"), Slot("Q", coords, "x*p + q*z"),
         Slot("Sigma", ("q", "p", "z"), "z^3/3 + q*p*z"), Slot("Omega", ("q", "p", "z"), "q*z + p")),
        {}, "{[deg]^{n} ⊗ [any]^{e}, [++]}", "2 functions of 4 variables, 2 functions of 3 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"),
         SpinorDecl("m'", "ASD", (lambda s: s.coord("z"), 1.0), "e")),
        line_element=line, coframe=coframe,
        loci=(("x - Sigma_z", lambda s: s.coord("x") - s.d(s.f["Sigma"], "z")),),
    )


def _sesqui_mm():
    return MetricFamily(
        "sesqui-mm", "one SD and one expanding ASD congruence, intersection [--]", QPXY,
        (Slot("A", QPXY, "x*y^2 + q*p + x^2"), Slot("Q", QPXY, "x*y + 2*x + q*p"),
         Slot("B", ("q", "p", "y"), "q*y^3 + p*y")),
        {}, "{[deg]^{n} ⊗ [any]^{e}, [--]}", "2 functions of 4 variables, 1 function of 3 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "e")),
        plebanski=lambda s: (s.f["A"], s.f["Q"], s.f["B"]),
        conditions=(("Q_x", lambda s: s.d(s.f["Q"], "x")),),
    )


def _two_sided_walker():
    return MetricFamily(
        "two-sided-walker", "two-sided Walker space", QPXY,
        (Slot("A", QPXY, "x^2*y + q*x^3 + p*y^2"), Slot("Q", ("q", "p", "y"), "q*y^2 + p*y"),
         Slot("B", ("q", "p", "y"), "p*y^3 + q^2*y")),
        {}, "[deg]^{n} ⊗ [deg]^{n}", "1 function of 4 variables, 2 functions of 3 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n")),
        plebanski=lambda s: (s.f["A"], s.f["Q"], s.f["B"]),
    )


def _walker_ne_pp():
    coords = ("q", "p", "w", "y")

    def parts(s):
        S = s.f["Sigma"]
        w, y = s.coord("w"), s.coord("y")
        Sq, Sp, Sw = s.d(S, "q"), s.d(S, "p"), s.d(S, "w")
        Q, B, Om = s.f["Q"], s.f["B"], s.f["Omega"]
        shown = (y - Sw) * Om - w * Sq - 2 * w * Q - w * w * B
        return Q, B, Sq, Sp, Sw, shown, w, y

    def coframe(s):
        Q, B, Sq, Sp, Sw, shown, w, y = parts(s)
        jac = _identity_jac()
        # x = -w y + Sigma(q, p, w)
        jac[2] = [Sq, Sp, Sw - y, -w]
        return _pullback(_pleb_coframe(shown + Sp, Q, B), jac)

    def line(s):
        Q, B, Sq, _, Sw, shown, w, y = parts(s)
        return {
            (0, 3): _const(1.0), (1, 3): w, (1, 2): y - Sw, (0, 0): B,
            (0, 1): -(2 * Q + Sq), (1, 1): shown,
        }

    return MetricFamily(
        "walker-ne-pp", "SD Walker with ASD congruences n and e, intersections [--,++]", coords,
        (Slot("Q", ("q", "p", "y"), "q*y^2 + p"), Slot("B", ("q", "p", "y"), "p*y^3 + q*y"),
         Slot("Omega", ("q", "p", "w"), "q*w + p^2"), Slot("Sigma", ("q", "p", "w"), "w^3/3 + q*p*w")),
        {}, "{[deg]^{n} ⊗ [deg]^{ne}, [--,++]}", "4 functions of 3 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n"),
         SpinorDecl("n'", "ASD", (1.0, lambda s: s.coord("w")), "e")),
        line_element=line, coframe=coframe,
        loci=(("y - Sigma_w", lambda s: s.coord("y") - s.d(s.f["Sigma"], "w")),),
    )


def _walker_ne_mm():
    return MetricFamily(
        "walker-ne-mm", "SD Walker with ASD congruences n and e, intersections [--,--]", QPXY,
        (Slot("A", ("q", "p", "x"), "x^3 + q*p*x^2 + p"), Slot("Q", ("q", "p", "y"), "y^2 + 2*y + q*p"),
         Slot("B", ("q", "p", "y"), "q*y^3 + p*y^2")),
        {}, "{[deg]^{n} ⊗ [deg]^{ne}, [--,--]}", "3 functions of 3 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n"),
         SpinorDecl("n'", "ASD", (1.0, 0.0), "e")),
        plebanski=lambda s: (s.f["A"], s.f["Q"], s.f["B"]),
        conditions=(("Q_y", lambda s: s.d(s.f["Q"], "y")),),
    )


def _walker_pk():
    return MetricFamily(
        "walker-pk", "para-Kaehler Walker space", QPXY,
        (Slot("A", ("q", "p", "x"), "x^3 + q*x^2"), Slot("B", ("q", "p", "y"), "y^3 + p*y^2")),
        {}, "[deg]^{n} ⊗ [D]^{nn}", "2 functions of 3 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n"),
         SpinorDecl("n'", "ASD", (1.0, 0.0), "n")),
        plebanski=lambda s: (s.f["A"], _const(0.0), s.f["B"]),
    )


def _type_ii_ne():
    coords = ("q", "p", "x", "n")

    def coframe(s):
        A, B = s.f["A"], s.f["B"]
        p, n = s.coord("p"), s.coord("n")
        c = _const
        return [
            [c(-1.0), c(0.0), c(0.0), c(0.0)],
            [-A * (p - B), n, c(0.0), p - B],
            [c(0.0), c(1.0), c(0.0), c(0.0)],
            [c(0.0), c(0.0), c(-1.0), c(0.0)],
        ]

    def line(s):
        A, B = s.f["A"], s.f["B"]
        p, n = s.coord("p"), s.coord("n")
        return {(1, 2): _const(-1.0), (0, 1): -n, (0, 3): B - p, (0, 0): A * (p - B)}

    def c3_numerator(s):
        A, B = s.f["A"], s.f["B"]
        p = s.coord("p")
        E = A * s.d(B, "n") + s.d(B, "q")
        return s.d(A, "n", "n") * (B - p) ** 2 + (B - p) * s.d(E, "n") - s.d(B, "n") * E

    return MetricFamily(
        "typeII-ne", "SD type II with a second expanding SD congruence", coords,
        (Slot("A", ("q", "n"), "0"), Slot("B", ("q", "n"), "q*n")),
        {}, "{[II]^{ne} ⊗ [D]^{nn}, [--,--,--,++]}", "2 functions of 2 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("n", "SD", (1.0, lambda s: s.coord("n")), "e"),
         SpinorDecl("m'", "ASD", (0.0, 1.0), "n"), SpinorDecl("n'", "ASD", (1.0, 0.0), "n")),
        line_element=line, coframe=coframe,
        loci=(("B - p", lambda s: s.f["B"] - s.coord("p")),),
        conditions=(
            ("A B_n + B_q", lambda s: s.f["A"] * s.d(s.f["B"], "n") + s.d(s.f["B"], "q")),
            ("C3 numerator", c3_numerator),
        ),
    )


def _type_d_ne():
    coords = ("q", "p", "x", "z")

    def coframe(s):
        Fz = s.d(s.f["F"], "z")
        p, z = s.coord("p"), s.coord("z")
        c = _const
        return [
            [c(-1.0), c(0.0), c(0.0), c(0.0)],
            [c(0.0), s.f["F"], c(0.0), (p - z) * Fz],
            [c(0.0), c(1.0), c(0.0), c(0.0)],
            [c(0.0), c(0.0), c(-1.0), c(0.0)],
        ]

    def line(s):
        Fz = s.d(s.f["F"], "z")
        return {(1, 2): _const(-1.0), (0, 1): -s.f["F"], (0, 3): (s.coord("z") - s.coord("p")) * Fz}

    return MetricFamily(
        "typeD-ne", "SD type D with a second expanding SD congruence", coords,
        (Slot("F", ("q", "z"), "exp(q*z)"),),
        {}, "{[D]^{ne} ⊗ [D]^{nn}, [--,--,--,++]}", "1 function of 2 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("n", "SD", (1.0, lambda s: s.f["F"]), "e"),
         SpinorDecl("m'", "ASD", (0.0, 1.0), "n"), SpinorDecl("n'", "ASD", (1.0, 0.0), "n")),
        line_element=line, coframe=coframe,
        loci=(("z - p", lambda s: s.coord("z") - s.coord("p")),
              ("F_z", lambda s: s.d(s.f["F"], "z"))),
        conditions=(("d_z d_q ln F_z", lambda s: s.d(J.ln(s.d(s.f["F"], "z")), "z", "q")),),
    )


def _dxd_recurrent():
    return MetricFamily(
        "dxd-recurrent", "two-sided conformally recurrent type D x D", QPXY,
        (Slot("A", ("p", "x"), "x^2*(2 + p^2) + exp(x)"), Slot("B", ("q", "y"), "y^2 + q*y^3/6")),
        {}, "[D]^{nn} ⊗ [D]^{nn}", "2 functions of 2 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("n", "SD", (1.0, 0.0), "n"),
         SpinorDecl("m'", "ASD", (0.0, 1.0), "n"), SpinorDecl("n'", "ASD", (1.0, 0.0), "n")),
        plebanski=lambda s: (s.f["A"], _const(0.0), s.f["B"]),
        conditions=(("A_xx + B_yy", lambda s: s.d(s.f["A"], "x", "x") + s.d(s.f["B"], "y", "y")),),
    )


def _sd_iii():
    def pleb(s):
        x, y = s.coord("x"), s.coord("y")
        M = s.f["M"]
        return M * x * x + s.f["P"] * x + s.f["Omega"], _const(0.0), -M * y * y + s.f["N"] * y

    def c2(s):
        M = s.f["M"]
        return (2 * s.d(M, "p") * s.coord("y") - 2 * s.d(M, "q") * s.coord("x")
                - s.d(s.f["N"], "p") - s.d(s.f["P"], "q"))

    return MetricFamily(
        "sd-III", "self-dual type III, non-Einstein", QPXY,
        (Slot("M", QP, "q*p"), Slot("P", QP, "q"), Slot("N", QP, "p"), Slot("Omega", QP, "q^2")),
        {}, "[III]^{n} ⊗ [O]^{n}", "4 functions of 2 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n")),
        plebanski=pleb, conditions=(("C2", c2),), self_dual=True,
    )


def _sd_n():
    def pleb(s):
        x, y = s.coord("x"), s.coord("y")
        M0 = s.k["M0"]
        S = s.f["Sigma"]
        return (M0 * x * x + s.d(S, "p") * x + s.f["Omega"], _const(0.0),
                -(M0 * y * y + s.d(S, "q") * y))

    return MetricFamily(
        "sd-N", "self-dual type N, non-Einstein", QPXY,
        (Slot("Sigma", QP, "q*p + p^3"), Slot("Omega", QP, "q^3 + p*q")),
        {"M0": 1.0}, "[N]^{n} ⊗ [O]^{n}", "2 functions of 2 variables, 1 constant",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n")),
        plebanski=pleb, self_dual=True,
    )


def _pke_pleb(s):
    L = s.k["Lambda"]
    x, y = s.coord("x"), s.coord("y")
    return L / 2 * x * x + s.f["Omega"], _const(0.0), L / 2 * y * y + s.f["Sigma"]


_PKE_SPINORS = (
    SpinorDecl("m", "SD", (0.0, 1.0), "n"),
    SpinorDecl("m'", "ASD", (0.0, 1.0), "n"),
    SpinorDecl("n'", "ASD", (1.0, 0.0), "n"),
)


def _pke_master(inst, point, d1="0", d2="0"):
    return pke_master_residuals(inst, point, d1, d2)


def _pke_ii():
    return MetricFamily(
        "pkE-II", "para-Kaehler Einstein space, SD type II", QPXY,
        (Slot("Sigma", QP, "exp(p)"), Slot("Omega", QP, "q^2")),
        {"Lambda": 2.0}, "[II]^{n} ⊗ [D]^{nn}", "2 functions of 2 variables, 1 constant",
        _PKE_SPINORS, plebanski=_pke_pleb, einstein=True,
        conditions=(("|Sigma_p| + |Omega_q|",
                     lambda s: J.constant(abs(s.d(s.f["Sigma"], "p").value) + abs(s.d(s.f["Omega"], "q").value))),),
    )


def _dxd_einstein():
    def factors(s):
        L = s.k["Lambda"]
        a = 1 + L / 2 * s.coord("x") * s.coord("p")
        b = 1 + L / 2 * s.coord("y") * s.coord("q")
        return a, b

    def coframe(s):
        a, b = factors(s)
        c = _const
        return [
            [c(-1.0), c(0.0), c(0.0), c(0.0)],
            [c(0.0), c(0.0), c(0.0), -1 / (b * b)],
            [c(0.0), c(1.0), c(0.0), c(0.0)],
            [c(0.0), c(0.0), 1 / (a * a), c(0.0)],
        ]

    def line(s):
        a, b = factors(s)
        return {(1, 2): 1 / (a * a), (0, 3): 1 / (b * b)}

    return MetricFamily(
        "dxd-einstein", "homogeneous para-Kaehler Einstein D x D", QPXY,
        (), {"Lambda": 1.0}, "[D]^{nn} ⊗ [D]^{nn}", "1 constant",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("n", "SD", (1.0, 0.0), "n"),
         SpinorDecl("m'", "ASD", (0.0, 1.0), "n"), SpinorDecl("n'", "ASD", (1.0, 0.0), "n")),
        line_element=line, coframe=coframe, einstein=True,
        loci=(("1 + Lambda x p / 2", lambda s: factors(s)[0]),
              ("1 + Lambda y q / 2", lambda s: factors(s)[1])),
    )


def _heavenly_pleb(s):
    Phi = s.f["Phi"]
    return (s.d(Phi, "p") * s.coord("x") + s.f["Omega"], _const(0.0), s.d(Phi, "q") * s.coord("y"))


def _heavenly_iii():
    return MetricFamily(
        "heavenly-III", "Einstein self-dual type III", QPXY,
        (Slot("Phi", QP, "exp(q + p)"), Slot("Omega", QP, "q^2*p")),
        {}, "[III]^{n} ⊗ [O]^{n}", "2 functions of 2 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n")),
        plebanski=_heavenly_pleb, einstein=True, self_dual=True,
        conditions=(("Phi_pq", lambda s: s.d(s.f["Phi"], "p", "q")),),
    )


def _heavenly_n():
    return MetricFamily(
        "heavenly-N", "Einstein self-dual type N", QPXY,
        (Slot("Omega", QP, "q^4 + 3*q^2 + p*q^3"),),
        {}, "[N]^{n} ⊗ [O]^{n}", "1 function of 2 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n")),
        plebanski=lambda s: (s.f["Omega"], _const(0.0), _const(0.0)), einstein=True, self_dual=True,
        conditions=(("Omega_qq", lambda s: s.d(s.f["Omega"], "q", "q")),),
    )


# auxiliary families ----------------------------------------------------------------

def _pke_d():
    ks = (
        VectorFieldSpec("K1", ("0", "1", "0", "0")),
        VectorFieldSpec("K2", ("1", "0", "0", "0")),
        VectorFieldSpec("K3", ("q", "0", "0", "-y")),
        VectorFieldSpec("K4", ("0", "p", "-x", "0")),
        VectorFieldSpec("K5", ("q^2", "0", "0", "-2*(q*y - 1/Lambda)")),
        VectorFieldSpec("K6", ("0", "p^2", "-2*(p*x + 1/Lambda)", "0")),
    )
    return MetricFamily(
        "pkE-D", "para-Kaehler Einstein space, Sigma = Omega = 0", QPXY,
        (Slot("Sigma", QP, "0"), Slot("Omega", QP, "0")),
        {"Lambda": 1.0}, "[D]^{nn} ⊗ [D]^{nn}", "1 constant",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("n", "SD", (1.0, 0.0), "n"),
         SpinorDecl("m'", "ASD", (0.0, 1.0), "n"), SpinorDecl("n'", "ASD", (1.0, 0.0), "n")),
        plebanski=_pke_pleb, killing=ks, in_table=False, einstein=True,
        master=lambda inst, pt: pke_master_residuals(inst, pt, "q^2", "p^2"),
    )


def _pke_ii_k1():
    return MetricFamily(
        "pkE-II-K1", "para-Kaehler Einstein type II with K = d_q", QPXY,
        (Slot("Sigma", ("p",), "exp(p)"), Slot("Omega", QP, "0")),
        {"Lambda": 1.0}, "[II]^{n} ⊗ [D]^{nn}", "1 function of 1 variable, 1 constant",
        _PKE_SPINORS, plebanski=_pke_pleb, in_table=False, einstein=True,
        killing=(VectorFieldSpec("K1", ("1", "0", "0", "0")),),
        master=lambda inst, pt: pke_master_residuals(inst, pt, "1", "0"),
    )


def _k2_components(gamma0, xi0, zeta0):
    # K2 = q d_q - y d_y + zeta0 d_p + xi0 (p d_p - x d_x) + gamma0 (p^2 d_p - 2 (p x + 1/Lambda) d_x)
    return (
        "q",
        f"{zeta0} + {xi0}*p + {gamma0}*p^2",
        f"-{xi0}*x - 2*{gamma0}*(p*x + 1/Lambda)",
        "-y",
    )


def _pke_ii_k2(variant):
    sigma, (g0, x0, z0) = {
        "gamma": ("exp(2/p)", (1, 0, 0)),
        "xi": ("p^(-2)", (0, 1, 0)),
        "zeta": ("exp(-2*p)", (0, 0, 1)),
    }[variant]
    d2 = f"{z0} + {x0}*p + {g0}*p^2"
    return MetricFamily(
        f"pkE-II-K2-{variant}", "para-Kaehler Einstein type II with two Killing vectors", QPXY,
        (Slot("Sigma", ("p",), sigma), Slot("Omega", QP, "0")),
        {"Lambda": 1.0}, "[II]^{n} ⊗ [D]^{nn}", "1 constant",
        _PKE_SPINORS, plebanski=_pke_pleb, in_table=False, einstein=True,
        killing=(VectorFieldSpec("K1", ("1", "0", "0", "0")),
                 VectorFieldSpec("K2", _k2_components(g0, x0, z0))),
        loci=(("p", lambda s: s.coord("p")),) if variant != "zeta" else (),
        conditions=(("Sigma_p", lambda s: s.d(s.f["Sigma"], "p")),),
        master=lambda inst, pt: pke_master_residuals(inst, pt, "q", d2),
    )


def _homothety():
    return MetricFamily(
        "heavenly-III-homothety", "Einstein SD type III with a null proper homothety", QPXY,
        (Slot("Phi", QP, "exp(q + p)"), Slot("Omega", QP, "0")),
        {"chi0": 0.5}, "[III]^{n} ⊗ [O]^{n}", "1 function of 2 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n")),
        plebanski=_heavenly_pleb, in_table=False, einstein=True, self_dual=True,
        killing=(VectorFieldSpec("K", ("0", "0", "2*chi0*x", "2*chi0*y"), "chi0"),),
        master=lambda inst, pt: null_master_residuals(inst, pt, "0"),
    )


def _null_killing():
    def h(s):
        return 2 * s.coord("p") + s.f["H"]

    def coframe(s):
        c = _const
        hh = h(s)
        return [
            [c(-1.0), c(0.0), c(0.0), c(0.0)],
            [c(0.0), c(0.0), c(0.0), -hh],
            [c(0.0), c(1.0), c(0.0), c(0.0)],
            [c(0.0), s.f["Omega"] - s.coord("x") / hh, c(-1.0), c(0.0)],
        ]

    def line(s):
        hh = h(s)
        return {(1, 2): _const(-1.0), (0, 3): hh, (1, 1): s.f["Omega"] - s.coord("x") / hh}

    return MetricFamily(
        "heavenly-III-null-killing", "Einstein SD type III with a null Killing vector", QPXY,
        (Slot("H", ("q",), "q"), Slot("Omega", QP, "q^3")),
        {}, "[III]^{n} ⊗ [O]^{n}", "1 function of 1 variable, 1 function of 2 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n")),
        line_element=line, coframe=coframe, in_table=False, einstein=True, self_dual=True,
        loci=(("2p + H", h),),
        killing=(VectorFieldSpec("K", ("0", "0", "0", "1")),),
    )


def _nxo_null():
    return MetricFamily(
        "heavenly-N-null-killing", "Einstein SD type N with three null Killing vectors", QPXY,
        (Slot("Omega", QP, "q^4"),),
        {}, "[N]^{n} ⊗ [O]^{n}", "1 function of 2 variables",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("m'", "ASD", (0.0, 1.0), "n")),
        plebanski=lambda s: (s.f["Omega"], _const(0.0), _const(0.0)),
        in_table=False, einstein=True, self_dual=True,
        loci=(("q", lambda s: s.coord("q")),),
        killing=(VectorFieldSpec("K1", ("0", "0", "1", "0"), asd_flag="n"),
                 VectorFieldSpec("K2", ("0", "0", "0", "1"), asd_flag="n"),
                 VectorFieldSpec("K3", ("0", "0", "q", "p"), asd_flag="e")),
    )


def _type3_special(variant):
    slots = {
        "i": (("N", "0"), ("P", "4/(4*p - q)"), ("Omega", "4*p/(4*p - q) - 1 - M0*p^2")),
        "ii": (("N", "0"), ("P", "4/(4*p - q) + p^2"), ("Omega", "0")),
        "iii": (("N", "1/(p - q)"), ("P", "0"), ("Omega", "0")),
    }[variant]
    m0 = {"i": 1.0, "ii": 0.0, "iii": 1.0}[variant]

    def pleb(s):
        x, y = s.coord("x"), s.coord("y")
        M0 = s.k["M0"]
        return (M0 * x * x + s.f["P"] * x + s.f["Omega"], _const(0.0),
                -M0 * y * y + s.f["N"] * y)

    def n_field(s):
        return type3_n(s.k["M0"], s.f["N"], s.f["P"], s.f["Omega"], s.point)

    locus = {"i": ("4p - q", lambda s: 4 * s.coord("p") - s.coord("q")),
             "ii": ("4p - q", lambda s: 4 * s.coord("p") - s.coord("q")),
             "iii": ("p - q", lambda s: s.coord("p") - s.coord("q"))}[variant]
    return MetricFamily(
        f"sd-III-ne-{variant}", "self-dual type III with a second expanding SD congruence", QPXY,
        tuple(Slot(n, QP, d) for n, d in slots),
        {"M0": m0}, "[III]^{ne} ⊗ [O]^{n}", "special solution",
        (SpinorDecl("m", "SD", (0.0, 1.0), "n"), SpinorDecl("n", "SD", (1.0, n_field), "e"),
         SpinorDecl("m'", "ASD", (0.0, 1.0), "n")),
        plebanski=pleb, in_table=False, self_dual=True, loci=(locus,),
        conditions=(("a = N_p + P_q", lambda s: s.d(s.f["N"], "p") + s.d(s.f["P"], "q")),),
        type3=lambda inst, pt: type3_report(inst, pt),
    )


_TABLE = (
    _weak_hh, _sesqui_pp, _sesqui_mm, _two_sided_walker, _walker_ne_pp, _walker_ne_mm,
    _walker_pk, _type_ii_ne, _type_d_ne, _dxd_recurrent, _sd_iii, _sd_n,
    _pke_ii, _dxd_einstein, _heavenly_iii, _heavenly_n,
)
_AUX = (
    _pke_d, _pke_ii_k1, lambda: _pke_ii_k2("gamma"), lambda: _pke_ii_k2("xi"),
    lambda: _pke_ii_k2("zeta"), _homothety, _null_killing, _nxo_null,
    lambda: _type3_special("i"), lambda: _type3_special("ii"), lambda: _type3_special("iii"),
)

FAMILIES = {f.id: f for f in (make() for make in _TABLE + _AUX)}


def list_families():
    """The sixteen families of the summary table, in table order."""
    return [f for f in FAMILIES.values() if f.in_table]


def auxiliary_families():
    return [f for f in FAMILIES.values() if not f.in_table]


def get_family(family_id):
    try:
        return FAMILIES[family_id]
    except KeyError:
        raise UnboundSlot(f"unknown family {family_id!r}") from None


# instances -------------------------------------------------------------------------

def family_seed(family_id, seed=0):
    """Stable per-family seed."""
    return (zlib.crc32(family_id.encode()) + int(seed)) % 2**32


@dataclass
class MetricInstance:
    family: MetricFamily
    params: dict
    sources: dict
    functions: dict
    mode: str = "real"
    extra_congruences: tuple = ()

    @property
    def id(self):
        return self.family.id

    def context(self, point):
        point = np.asarray(point, dtype=complex if self.mode == "complex" else float)
        f = {k: fn.jet(point) for k, fn in self.functions.items()}
        c = [J.seed(point, v) for v in range(4)]
        index = {name: i for i, name in enumerate(self.family.coordinates)}
        return Ctx(f=f, c=c, k=self.params, index=index, point=point, instance=self)

    # geometry
    def plebanski_jets(self, point):
        if self.family.plebanski is None:
            return None
        return F.PlebanskiJets(*self.family.plebanski(self.context(point)))

    def metric_jets(self, point):
        """Jets of the displayed ds^2/2 tensor."""
        ctx = self.context(point)
        if self.family.plebanski is not None:
            return F.plebanski_metric_from_jets(F.PlebanskiJets(*self.family.plebanski(ctx)))
        coeffs = self.family.line_element(ctx)
        zero = _const(0.0)
        g = [[zero] * 4 for _ in range(4)]
        for (i, j), v in coeffs.items():
            if i == j:
                g[i][i] = g[i][i] + v
            else:
                g[i][j] = g[i][j] + 0.5 * v
                g[j][i] = g[j][i] + 0.5 * v
        return g

    def coframe_jets(self, point):
        ctx = self.context(point)
        if self.family.plebanski is not None:
            return _pleb_coframe(*self.family.plebanski(ctx))
        return self.family.coframe(ctx)

    def curvature(self, point):
        return oracle_curvature(self.metric_jets(point), self.coframe_jets(point))

    def frame(self, point):
        return point_frame(self.metric_jets(point), self.coframe_jets(point), point)

    def coframe_mismatch(self, point):
        """max |displayed metric - coframe metric| (both ds^2/2)."""
        g, _, _ = jet_matrix_derivatives(self.metric_jets(point), need_hessian=False)
        h, _, _ = jet_matrix_derivatives(F.metric_from_coframe(self.coframe_jets(point)), need_hessian=False)
        return float(np.max(np.abs(g - h)))

    # congruences
    def spinor_specs(self):
        out = []
        for decl in self.family.congruences + tuple(self.extra_congruences):
            comps = tuple(self._component(c) for c in decl.components)
            out.append((decl, SpinorFieldSpec(decl.duality, comps, decl.name)))
        return out

    def _component(self, c):
        if callable(c) and not isinstance(c, ScalarField):
            return lambda point: c(self.context(point))
        return c

    # sampling
    def locus_distance(self, point):
        """Smallest first-order distance to a singular or degeneracy locus."""
        dist = math.inf
        for fn in self.functions.values():
            dist = min(dist, fn.singular_distance(point))
        ctx = self.context(point)
        for _, locus in self.family.loci + self.family.conditions:
            j = locus(ctx)
            g = float(np.linalg.norm(j.gradient())) if j.order >= 1 else 0.0
            v = abs(j.value)
            if g == 0.0:
                if v == 0.0:
                    return 0.0
                continue
            dist = min(dist, v / g)
        return dist

    def condition_values(self, point):
        ctx = self.context(point)
        return {label: fn(ctx).value for label, fn in self.family.conditions}

    def sample(self, n=SAMPLE_POINTS, seed=None, max_attempts=MAX_ATTEMPTS):
        """n points of [-1, 1]^4 at distance >= 1e-3 from every locus."""
        rng = np.random.default_rng(family_seed(self.id) if seed is None else seed)
        points = []
        attempts = 0
        while len(points) < n:
            attempts += 1
            if attempts > max_attempts:
                raise SamplingFailure(f"{self.id}: only {len(points)} of {n} usable points")
            pt = rng.uniform(-1.0, 1.0, 4)
            if self.mode == "complex":
                pt = pt + 1j * rng.uniform(-1.0, 1.0, 4)
            try:
                if self.locus_distance(pt) < LOCUS_DISTANCE:
                    continue
                geometry_from_jets(self.metric_jets(pt))
            except (SingularPoint, DegenerateMetric, ArithmeticError):
                continue
            points.append(pt)
        return points


class SamplingFailure(NullStringLabError):
    pass


def _check_arity(family, name, expr, allowed):
    used = set(coordinates_used(expr))
    bad = sorted(used - set(allowed))
    if bad:
        raise ArityViolation(
            f"{family.id}: slot {name} may depend on {', '.join(allowed) or 'nothing'}, "
            f"but uses {', '.join(bad)}"
        )


def instantiate(family_id, bindings=None, params=None, mode="real", congruences=()):
    """Bind slot expressions (DSL strings) and parameters, defaults elsewhere."""
    family = get_family(family_id) if isinstance(family_id, str) else family_id
    bindings = dict(bindings or {})
    values = dict(family.params)
    for k, v in (params or {}).items():
        if k not in values:
            raise UnboundSlot(f"{family.id} has no parameter {k!r}")
        values[k] = v
    unknown = set(bindings) - set(family.slot_names)
    if unknown:
        raise UnboundSlot(f"{family.id} has no slot(s) {', '.join(sorted(unknown))}")
    sources, functions = {}, {}
    for slot in family.slots:
        src = bindings.get(slot.name, slot.default)
        fn = ScalarField(src, values, mode, family.coordinates)
        _check_arity(family, slot.name, fn.expr, slot.arguments)
        sources[slot.name] = src
        functions[slot.name] = fn
    return MetricInstance(family, values, sources, functions, mode, tuple(congruences))


# pipeline ---------------------------------------------------------------------------

@dataclass
class PointAnalysis:
    point: np.ndarray
    curvature: object
    sd: object
    asd: object
    reports: list
    optics: list
    symbol: GeometrySymbol
    flags: list = field(default_factory=list)


def analyze_point(inst, point, tol=ZERO_TOL):
    """Curvature, Petrov types, congruence reports, optics and the symbol at a point."""
    curv = inst.curvature(point)
    sd, asd = classify_curvature(curv, real_mode=inst.mode == "real", tol=tol)
    fr = inst.frame(point)
    reports, flags = [], []
    for decl, spec in inst.spinor_specs():
        rep = verify_null_string(spec, fr, point)
        if not rep.verified:
            flags.append(f"congruence {decl.name} fails the null-string equation ({rep.residual:.3g})")
        if decl.expected and rep.flag != decl.expected:
            flags.append(f"congruence {decl.name} is {rep.flag}, declared {decl.expected}")
        reports.append((decl, rep))
    sd_reps = [r for d, r in reports if d.duality == "SD"]
    asd_reps = [r for d, r in reports if d.duality == "ASD"]
    optics = optics_table(sd_reps, asd_reps) if sd_reps and asd_reps else []
    for label, value in inst.condition_values(point).items():
        if abs(value) <= tol * (1 + curv.scale()):
            flags.append(f"condition {label} vanishes")
    symbol = assemble_symbol(sd, asd, sd_reps, asd_reps, optics)
    return PointAnalysis(np.asarray(point), curv, sd, asd, reports, optics, symbol, flags)


@dataclass
class FamilyClassification:
    """Per-point symbols; ``confidence`` is the share of points realizing the claim.

    ``modal`` is the most frequent symbol with labels reduced to complex form,
    and ``agreement`` the share of points carrying it.
    """

    family: str
    points: list
    symbols: list
    modal: str
    agreement: float
    confidence: float
    flags: list


def classify_instance(inst, n=SAMPLE_POINTS, seed=None, tol=ZERO_TOL, claimed=None):
    """Pointwise classification over n sample points."""
    points = inst.sample(n, seed)
    claimed = inst.family.claimed_symbol if claimed is None else claimed
    symbols, reduced, flags, matches = [], [], [], 0
    for k, pt in enumerate(points):
        try:
            res = analyze_point(inst, pt, tol)
        except (IllConditioned, SingularPoint) as exc:
            symbols.append(None)
            flags.append((k, f"{type(exc).__name__}: {exc}"))
            continue
        symbols.append(res.symbol.render())
        reduced.append(res.symbol.complexified().render())
        matches += res.symbol.matches(claimed)
        flags.extend((k, f) for f in res.flags)
    modal = max(sorted(set(reduced)), key=reduced.count) if reduced else None
    agreement = reduced.count(modal) / len(points) if reduced else 0.0
    return FamilyClassification(inst.id, points, symbols, modal, agreement, matches / len(points), flags)


# symmetries ------------------------------------------------------------------------

def _vector_jets(inst, K, point):
    point = np.asarray(point, dtype=complex if inst.mode == "complex" else float)
    comps = [ScalarField(c, inst.params, inst.mode, inst.family.coordinates).jet(point) for c in K.components]
    chi0 = inst.params[K.chi0] if isinstance(K.chi0, str) else K.chi0
    return comps, chi0


@dataclass
class KillingReport:
    name: str
    residual: float
    scale: float
    chi0: float

    @property
    def passes(self):
        return self.residual <= 1e-10 * self.scale


def killing_residual(inst, K, point):
    """max |nabla_(mu K_nu) - chi0 g_mu nu| for the line element ds^2.

    nabla_(mu K_nu) = 1/2 (K^l d_l g_mn + g_ln d_m K^l + g_ml d_n K^l).
    """
    geo_g, dg, _ = jet_matrix_derivatives(inst.metric_jets(point), need_hessian=False)
    g, dg = 2 * geo_g, 2 * dg
    comps, chi0 = _vector_jets(inst, K, point)
    k = np.array([c.value for c in comps])
    dk = np.array([c.gradient() for c in comps])  # dk[l, m] = d_m K^l
    sym = 0.5 * (np.einsum("l,lmn->mn", k, dg) + np.einsum("ln,lm->mn", g, dk) + np.einsum("ml,ln->mn", g, dk))
    res = float(np.max(np.abs(sym - chi0 * g)))
    scale = 1.0 + float(np.max(np.abs(g))) + float(np.max(np.abs(dg))) * float(np.max(np.abs(k))) \
        + float(np.max(np.abs(g))) * float(np.max(np.abs(dk)))
    return KillingReport(K.name, res, scale, chi0)


def null_vector_spinor(inst, K, point):
    """k_A' of a null vector K from its frame components K^a = e^a(K).

    [[K4, K2], [K1, -K3]] is proportional to k^A k^B'; a nonzero row gives k^B'.
    """
    e, _, _ = F.frame_values(inst.coframe_jets(point))
    comps, _ = _vector_jets(inst, K, point)
    Ka = e @ np.array([c.value for c in comps])
    mat = np.array([[Ka[3], Ka[1]], [Ka[0], -Ka[2]]])
    if abs(np.linalg.det(mat)) > 1e-10 * (1 + np.max(np.abs(mat))) ** 2:
        raise ValueError(f"{K.name} is not null")
    row = mat[0] if np.max(np.abs(mat[0])) >= np.max(np.abs(mat[1])) else mat[1]
    return F.lower(row)


def null_killing_congruence(inst, K, point):
    """Report of the ASD congruence generated by the dotted spinor of a null K."""
    k_dn = null_vector_spinor(inst, K, point)
    # the spinor of K is constant along the check only to first order; use the
    # field obtained from K's components at every point
    def comp(i):
        def jet_at(pt):
            return _null_spinor_jets(inst, K, pt)[i]
        return jet_at

    spec = SpinorFieldSpec("ASD", (comp(0), comp(1)), K.name)
    return verify_null_string(spec, inst.frame(point), point), k_dn


def _null_spinor_jets(inst, K, point):
    # frame components as jets: K^a = e^a_mu K^mu
    e = inst.coframe_jets(point)
    comps, _ = _vector_jets(inst, K, point)
    Ka = [sum((e[a][m] * comps[m] for m in range(4)), _const(0.0)) for a in range(4)]
    mat = [[Ka[3], Ka[1]], [Ka[0], -Ka[2]]]
    r0 = max(abs(mat[0][0].value), abs(mat[0][1].value))
    r1 = max(abs(mat[1][0].value), abs(mat[1][1].value))
    row = mat[0] if r0 >= r1 else mat[1]
    # k_A' = eps_A'B' k^B'
    return [row[1], -1 * row[0]]


def sd_killing_catalog_check(inst, points=None):
    """Killing residuals of the family's vectors and, for null ones, the ASD expansion flag."""
    points = inst.sample(5) if points is None else points
    out = []
    for K in inst.family.killing:
        worst = max((killing_residual(inst, K, pt) for pt in points), key=lambda r: r.residual / r.scale)
        entry = {"name": K.name, "residual": worst.residual, "scale": worst.scale, "passes": worst.passes}
        if K.asd_flag:
            flags = {null_killing_congruence(inst, K, pt)[0].flag for pt in points}
            entry["asd_flag"] = "".join(sorted(flags))
            entry["asd_expected"] = K.asd_flag
        out.append(entry)
    return out


def type3_report(inst, point):
    """(residuals, term scales) of the six-equation system for N, P, Omega."""
    args = (inst.params["M0"], inst.functions["N"], inst.functions["P"], inst.functions["Omega"], point)
    return type3_system_residual(*args), type3_system_scale(*args)


# master equations -------------------------------------------------------------------

def _field(inst, src, point):
    return ScalarField(src, inst.params, inst.mode, inst.family.coordinates).jet(point)


def pke_master_residuals(inst, point, d1, d2):
    """Both equations for Killing vectors of the pKE family, delta^1'(q), delta^2'(p).

    d1 S_q + d2 S_p + 2 S d1' + d1''' / Lambda and the analogue with Omega, d2.
    """
    s = inst.context(point)
    L = inst.params["Lambda"]
    a, b = _field(inst, d1, point), _field(inst, d2, point)
    S, Om = s.f["Sigma"], s.f["Omega"]
    r1 = a * s.d(S, "q") + b * s.d(S, "p") + 2 * S * s.d(a, "q") + s.d(a, "q", "q", "q") / L
    r2 = a * s.d(Om, "q") + b * s.d(Om, "p") + 2 * Om * s.d(b, "p") + s.d(b, "p", "p", "p") / L
    return [r1.value, r2.value]


def homothety_master_residuals(inst, point, d1, d2, e1, e2, chi0, a0, b0, c0):
    """Residuals of the system for homothetic vectors of the Einstein SD type III family."""
    s = inst.context(point)
    A, B, E1, E2 = (_field(inst, src, point) for src in (d1, d2, e1, e2))
    Phi, Om = s.f["Phi"], s.f["Omega"]
    eP = J.exp(Phi)
    r = [
        s.d(A, "p") - a0 * eP,
        s.d(B, "q") - b0 / eP,
        A * s.d(Phi, "q") + B * s.d(Phi, "p") + s.d(B, "p") - s.d(A, "q") - c0,
        E2 * s.d(Phi, "q") + s.d(E2, "q"),
        A * s.d(Om, "q") + B * s.d(Om, "p") - 2 * Om * (chi0 - s.d(B, "p")) + E1 * s.d(Phi, "p") - s.d(E1, "p"),
        2 * Om * s.d(B, "q") - s.d(E1, "q") + s.d(E2, "p"),
    ]
    return [v.value for v in r]


def null_master_residuals(inst, point, eps, chi0=None):
    """eps_q Phi_q + eps_qq and -2 chi0 Omega + eps_p Phi_p - eps_pp."""
    s = inst.context(point)
    chi0 = inst.params.get("chi0", 0.0) if chi0 is None else chi0
    e = _field(inst, eps, point)
    Phi = s.f["Phi"] if "Phi" in s.f else _const(0.0)
    Om = s.f["Omega"]
    r1 = s.d(e, "q") * s.d(Phi, "q") + s.d(e, "q", "q")
    r2 = -2 * chi0 * Om + s.d(e, "p") * s.d(Phi, "p") - s.d(e, "p", "p")
    return [r1.value, r2.value]


def master_residuals(inst, kdata, point):
    """Dispatch on the symmetry data supplied.

    {"delta1", "delta2"}: the pair for the Lambda != 0 family;
    {"eps", "chi0"}: the null-vector pair;
    {"delta1", "delta2", "eps1", "eps2", "chi0", "a0", "b0", "c0"}: the homothety system.
    """
    keys = set(kdata)
    if keys == {"delta1", "delta2"}:
        return pke_master_residuals(inst, point, kdata["delta1"], kdata["delta2"])
    if keys <= {"eps", "chi0"} and "eps" in keys:
        return null_master_residuals(inst, point, kdata["eps"], kdata.get("chi0"))
    need = {"delta1", "delta2", "eps1", "eps2", "chi0", "a0", "b0", "c0"}
    if keys == need:
        k = kdata
        return homothety_master_residuals(inst, point, k["delta1"], k["delta2"], k["eps1"], k["eps2"],
                                          k["chi0"], k["a0"], k["b0"], k["c0"])
    raise UnboundSlot(f"unrecognized symmetry data {sorted(keys)}")


# metric definition files --------------------------------------------------------------

@dataclass
class MetricFile:
    mode: str = "real"
    family: str = ""
    params: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    congruences: dict = field(default_factory=dict)  # name -> (duality, comp0, comp1, flag)

    def instance(self):
        family = self.family or "weak-hh"
        extra = tuple(
            SpinorDecl(name, d, tuple(ScalarField(c, self.params, self.mode, get_family(family).coordinates)
                                      for c in (c0, c1)), flag)
            for name, (d, c0, c1, flag) in self.congruences.items()
        )
        return instantiate(family, self.functions, self.params, self.mode, extra)


def _format_number(v):
    if isinstance(v, complex):
        return repr(v)
    if float(v).is_integer() and abs(v) < 1e16:
        return repr(float(v))
    return repr(float(v))


def _parse_number(text, where):
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise MetricFileError(f"{where}: {text!r} is not a number") from None


def _unquote(text, where):
    text = text.strip()
    if len(text) < 2 or text[0] != '"' or text[-1] != '"':
        raise MetricFileError(f"{where}: expected a double-quoted DSL expression, got {text!r}")
    return text[1:-1]


def parse_metric_file(text):
    """Parse the metric definition format (header, [params], [functions], [congruences])."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#",),
                                   inline_comment_prefixes=None, strict=True, empty_lines_in_values=False)
    cp.optionxform = str
    try:
        cp.read_string("[header]\n" + text)
    except configparser.Error as exc:
        raise MetricFileError(f"malformed metric file: {exc}") from None
    unknown = set(cp.sections()) - {"header", "params", "functions", "congruences"}
    if unknown:
        raise MetricFileError(f"unknown section(s): {', '.join(sorted(unknown))}")
    head = dict(cp["header"])
    extra = set(head) - {"mode", "family"}
    if extra:
        raise MetricFileError(f"unknown header key(s): {', '.join(sorted(extra))}")
    mode = head.get("mode", "real")
    if mode not in ("real", "complex"):
        raise MetricFileError(f"mode must be real or complex, got {mode!r}")
    mf = MetricFile(mode=mode, family=head.get("family", ""))
    if mf.family and mf.family not in FAMILIES:
        raise MetricFileError(f"unknown family {mf.family!r}")
    if cp.has_section("params"):
        for k, v in cp["params"].items():
            mf.params[k] = _parse_number(v, f"params.{k}")
    if cp.has_section("functions"):
        for k, v in cp["functions"].items():
            mf.functions[k] = _unquote(v, f"functions.{k}")
    if cp.has_section("congruences"):
        for k, v in cp["congruences"].items():
            parts = v.split()
            if len(parts) != 4 or parts[0] not in ("SD", "ASD") or parts[3] not in ("n", "e"):
                raise MetricFileError(f"congruences.{k}: expected 'SD|ASD \"c0\" \"c1\" n|e'")
            mf.congruences[k] = (parts[0], _unquote(parts[1], k), _unquote(parts[2], k), parts[3])
    return mf


def serialize_metric_file(mf):
    """Canonical text; parse_metric_file(serialize_metric_file(m)) == m."""
    buf = io.StringIO()
    buf.write(f"mode = {mf.mode}\n")
    if mf.family:
        buf.write(f"family = {mf.family}\n")
    if mf.params:
        buf.write("\n[params]\n")
        for k, v in mf.params.items():
            buf.write(f"{k} = {_format_number(v)}\n")
    if mf.functions:
        buf.write("\n[functions]\n")
        for k, v in mf.functions.items():
            buf.write(f'{k} = "{v}"\n')
    if mf.congruences:
        buf.write("\n[congruences]\n")
        for k, (d, c0, c1, flag) in mf.congruences.items():
            buf.write(f'{k} = {d} "{c0}" "{c1}" {flag}\n')
    return buf.getvalue()


def default_metric_file(family_id, mode="real"):
    fam = get_family(family_id)
    return MetricFile(mode, fam.id, dict(fam.params), {s.name: s.default for s in fam.slots})


def describe(family):
    """One-line description with the default slot bindings."""
    slots = ", ".join(f"{s.name}({','.join(s.arguments)}) = {s.default}" for s in family.slots)
    return f"{family.id}: {family.claimed}  [{family.functions_text}]  {slots}"


__all__ = [
    "FAMILIES", "MetricFamily", "MetricInstance", "MetricFile", "Slot", "SpinorDecl", "VectorFieldSpec",
    "analyze_point", "auxiliary_families", "classify_instance", "get_family", "instantiate",
    "killing_residual", "list_families", "parse_metric_file", "serialize_metric_file",
    "sd_killing_catalog_check", "master_residuals", "pke_master_residuals", "null_master_residuals",
    "homothety_master_residuals", "pretty", "geometry_from_jets",
]
