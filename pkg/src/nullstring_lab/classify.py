"""Petrov-Penrose classification of totally symmetric 4-index spinors.

Two independent routes:

* the condition route, valid when the spinor basis is adapted to a multiple
  Penrose spinor (C^(5) = C^(4) = 0), reads the type off C^(3), C^(2),
  C^(1) and delta = 2 C^(2)^2 - 3 C^(1) C^(3);
* the root route factors P(z) = sum_k binom(4, k) C_k z^(4-k) (C_k has k
  indices equal to 2) and reads the type from the multiplicity pattern of
  its roots on the projective line.

Labels are the bracket names I, II, D, III, N, O (complex) and I_r, I_rc,
I_c, II_r, II_rc, D_r, D_c, III_r, N_r, O_r (neutral signature).
"""

import math
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .errors import IllConditioned, InconsistentOptics

ZERO_TOL = 1e-8
CLUSTER_TOL = 1e-6
# relative accuracy assumed for quartic coefficients computed from curvature
COEFF_EPS = 1e-12

COMPLEX_LABELS = ("I", "II", "D", "III", "N", "O")
REAL_LABELS = ("I_r", "I_rc", "I_c", "II_r", "II_rc", "D_r", "D_c", "III_r", "N_r", "O_r")
OPTICS = ("--", "-+", "+-", "++")
INFINITY = complex("inf")

# how special a (complex) type is; used for the degeneration-order property
SPECIALITY = {"I": 0, "II": 1, "D": 2, "III": 2, "N": 3, "O": 4}


def base_label(label):
    """Complex-case label of a neutral-signature label (II_rc -> II)."""
    return label.split("_")[0]


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int
    real: bool


@dataclass(frozen=True)
class PetrovType:
    label: str
    roots: tuple = ()

    @property
    def base(self):
        return base_label(self.label)

    def __str__(self):
        return self.label


# root structure ------------------------------------------------------------------

def quartic_coefficients(components):
    """P(z) coefficients (z^4 .. z^0) from C_k, k = number of indices equal to 2."""
    c = np.asarray(components)
    return np.array([c[0], 4 * c[1], 6 * c[2], 4 * c[3], c[4]])


def _ambiguous(value, limit):
    return limit / 2 < value <= 2 * limit


def cluster_radius(poly, pts, others=(), tol=CLUSTER_TOL, coeff_eps=COEFF_EPS, unit=None):
    """Merge radius for the candidate multiple root formed by ``pts``.

    A root of multiplicity m at z moves by about (eps S(z) / |a_m|)^(1/m) when
    the coefficients carry relative error eps, with S(z) = sum |c_k| |z|^k
    and a_m = P^(m)(z) / m! = c_0 prod (z - r_j) over the roots ``others``
    outside the cluster.  The radius is ten times that estimate, capped at a
    quarter of the distance to the nearest outside root (beyond that the
    estimate means nothing), and never less than tol * unit, unit = 1 + max|root|.
    """
    pts = np.atleast_1d(pts)
    m = len(pts)
    mid = complex(np.mean(pts))
    if unit is None:
        unit = 1 + float(np.max(np.abs(np.concatenate([pts, np.asarray(others, dtype=complex)]))))
    floor = tol * unit
    if coeff_eps <= 0:
        return floor
    lead = abs(poly[0]) * float(np.prod([abs(mid - r) for r in others]))
    if lead == 0.0:
        return floor
    size = float(np.polyval(np.abs(poly), abs(mid)))
    estimate = 10 * (coeff_eps * size / lead) ** (1 / m)
    if len(others):
        estimate = min(estimate, min(abs(mid - r) for r in others) / 4)
    return max(floor, estimate)


def _cluster(roots, poly, tol, coeff_eps=COEFF_EPS):
    """Group roots into multiple-root clusters; IllConditioned near a threshold.

    Quadruple and triple roots are looked for first, among subsets whose
    spread around their mean is inside the radius of ``cluster_radius``; the
    remaining roots merge pairwise.  A spread or distance within a factor 2 of
    its radius is ambiguous.
    """
    roots = list(roots)
    unit = 1 + max((abs(r) for r in roots), default=0.0)
    groups = []
    for m in (4, 3):
        if len(roots) < m:
            continue
        best = None
        for subset in combinations(range(len(roots)), m):
            pts = np.array([roots[i] for i in subset])
            spread = float(np.max(np.abs(pts - pts.mean())))
            rest = [roots[i] for i in range(len(roots)) if i not in subset]
            radius = cluster_radius(poly, pts, rest, tol, coeff_eps, unit)
            if _ambiguous(spread, radius):
                raise IllConditioned(f"{m}-root spread {spread:.3g} is within a factor 2 of {radius:.3g}")
            if spread <= radius / 2 and (best is None or spread < best[0]):
                best = (spread, subset)
        if best is not None:
            groups.append(np.array([roots[i] for i in best[1]]))
            roots = [r for i, r in enumerate(roots) if i not in best[1]]
    n = len(roots)
    labels = list(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            dist = abs(roots[i] - roots[j])
            rest = [r for k, r in enumerate(roots) if k not in (i, j)] + [r for g in groups for r in g]
            radius = cluster_radius(poly, [roots[i], roots[j]], rest, tol, coeff_eps, unit)
            if _ambiguous(dist, radius):
                raise IllConditioned(f"root separation {dist:.3g} is within a factor 2 of {radius:.3g}")
            if dist <= radius and labels[j] != labels[i]:
                old = labels[j]
                labels = [labels[i] if lab == old else lab for lab in labels]
    pairs = {}
    for lab, r in zip(labels, roots):
        pairs.setdefault(lab, []).append(r)
    return groups + [np.array(g) for g in pairs.values()]


def quartic_root_structure(coeffs, tol=CLUSTER_TOL, zero_tol=ZERO_TOL, coeff_eps=COEFF_EPS):
    """Clustered roots of the quartic with the given coefficients (z^4 first).

    The quartic is normalized to unit largest coefficient.  Leading
    coefficients below ``zero_tol`` count as roots at infinity.  Clusters use
    the multiplicity-dependent radius of ``cluster_radius``.  Returns a
    tuple of Root, sorted by decreasing multiplicity.
    """
    c = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0:
        raise ValueError("all coefficients vanish (type O)")
    c = c / scale
    deficiency = 0
    while deficiency < 4 and abs(c[deficiency]) <= zero_tol:
        deficiency += 1
    finite = np.roots(c[deficiency:]) if deficiency < 4 else np.array([], dtype=complex)
    out = []
    if deficiency:
        out.append(Root(INFINITY, deficiency, True))
    if len(finite):
        poly = c[deficiency:]
        unit = 1 + float(np.max(np.abs(finite)))
        for group in _cluster(list(finite), poly, tol, coeff_eps):
            mean = complex(np.mean(group))
            rest = [r for r in finite if not np.any(np.isclose(r, group, rtol=0, atol=0))]
            real = abs(mean.imag) <= cluster_radius(poly, group, rest, tol, coeff_eps, unit)
            if real:
                mean = complex(mean.real, 0.0)
            out.append(Root(mean, len(group), real))
    out.sort(key=lambda r: (-r.multiplicity, r.value.real if np.isfinite(r.value.real) else np.inf))
    return tuple(out)


def label_from_roots(roots, real_mode=False):
    mult = sorted((r.multiplicity for r in roots), reverse=True)
    n_real = sum(r.multiplicity for r in roots if r.real)
    if not real_mode:
        return {
            (1, 1, 1, 1): "I", (2, 1, 1): "II", (2, 2): "D", (3, 1): "III", (4,): "N",
        }[tuple(mult)]
    pattern = tuple(mult)
    if pattern == (1, 1, 1, 1):
        return {4: "I_r", 2: "I_rc", 0: "I_c"}[n_real]
    if pattern == (2, 1, 1):
        return "II_r" if n_real == 4 else "II_rc"
    if pattern == (2, 2):
        return "D_r" if n_real == 4 else "D_c"
    if pattern == (3, 1):
        return "III_r"
    return "N_r"


# labels from the C^(i) -------------------------------------------------------------

def type_delta(Cup):
    """delta = 2 C^(2) C^(2) - 3 C^(3) C^(1)."""
    c1, c2, c3 = Cup[0], Cup[1], Cup[2]
    return 2 * c2 * c2 - 3 * c3 * c1


def _threshold(Cup, tol, scale):
    s = float(np.max(np.abs(Cup))) if scale is None else float(scale)
    return tol * s, s


def _sd_components(Cup):
    # C_1111 .. C_2222 up to the common factor 1/2
    c1, c2, c3, c4, c5 = Cup
    return np.array([c5, c4, c3, c2, c1])


def petrov_by_conditions(Cup, real_mode=False, tol=ZERO_TOL, scale=None):
    """Adapted-basis conditions; requires C^(5) = C^(4) = 0 within tolerance."""
    Cup = np.asarray(Cup)
    thr, s = _threshold(Cup, tol, scale)
    if s == 0 or np.max(np.abs(Cup)) <= thr:
        return PetrovType("O_r" if real_mode else "O")
    if abs(Cup[4]) > thr or abs(Cup[3]) > thr:
        raise ValueError("basis not adapted: C^(5) or C^(4) is nonzero")
    c1, c2, c3 = Cup[0], Cup[1], Cup[2]
    sfx = "_r" if real_mode else ""
    if abs(c3) > thr:
        delta = type_delta(Cup)
        dthr = tol * s * s
        if abs(delta) <= dthr:
            return PetrovType("D" + sfx)
        if not real_mode:
            return PetrovType("II")
        return PetrovType("II_r" if np.real(delta) > 0 else "II_rc")
    if abs(c2) > thr:
        return PetrovType("III" + sfx)
    return PetrovType("N" + sfx)


def petrov_by_roots(Cup, real_mode=False, tol=ZERO_TOL, scale=None, cluster_tol=CLUSTER_TOL):
    """Root-pattern classification of P(z) built from the C^(i)."""
    Cup = np.asarray(Cup)
    thr, s = _threshold(Cup, tol, scale)
    if s == 0 or np.max(np.abs(Cup)) <= thr:
        return PetrovType("O_r" if real_mode else "O")
    coeffs = quartic_coefficients(_sd_components(Cup))
    # coefficients that are zero on the curvature scale are exact zeros
    coeffs = np.where(np.abs(coeffs) <= thr, 0, coeffs)
    roots = quartic_root_structure(coeffs, cluster_tol, zero_tol=0.0)
    return PetrovType(label_from_roots(roots, real_mode), roots)


def _classify(Cup, real_mode, tol, scale):
    Cup = np.asarray(Cup)
    thr, _ = _threshold(Cup, tol, scale)
    if abs(Cup[4]) <= thr and abs(Cup[3]) <= thr:
        return petrov_by_conditions(Cup, real_mode, tol, scale)
    return petrov_by_roots(Cup, real_mode, tol, scale)


def petrov_complex(Cup, tol=ZERO_TOL, scale=None):
    """Complex-case type from C^(1..5); ``scale`` defaults to max |C^(i)|."""
    return _classify(Cup, False, tol, scale)


def petrov_real(Cup, tol=ZERO_TOL, scale=None):
    """Neutral-signature type from real C^(1..5)."""
    Cup = np.asarray(Cup)
    if np.iscomplexobj(Cup):
        if np.max(np.abs(Cup.imag)) > tol * (1 + np.max(np.abs(Cup))):
            raise ValueError("real classification needs real coefficients")
        Cup = Cup.real
    return _classify(Cup, True, tol, scale)


def cup_from_components(components):
    """C^(1..5)-style coefficients from C_k (k indices equal to 2), e.g. the ASD Weyl spinor."""
    return 2 * np.asarray(components)[::-1]


def classify_curvature(curv, real_mode=False, tol=ZERO_TOL):
    """(SD type, ASD type) of a CurvatureData, zero tests on 1 + its scale."""
    scale = 1.0 + curv.scale()
    fn = petrov_real if real_mode else petrov_complex
    return fn(curv.Cup, tol, scale), fn(cup_from_components(curv.Cdown), tol, scale)


# geometry symbol --------------------------------------------------------------------

def _wildcard(label):
    return label in ("deg", "any")


def label_matches(claimed, actual):
    """Compare a claimed label (possibly 'deg'/'any', complex form) with a computed one."""
    actual = base_label(actual)
    claimed = base_label(claimed)
    if claimed == "any":
        return True
    if claimed == "deg":
        return actual in ("II", "D", "III", "N")
    return claimed == actual


@dataclass(frozen=True)
class GeometrySymbol:
    """{[SD]^{sd supers} (x) [ASD]^{asd supers}, [optics]}.

    ``optics`` lists the intersection classes in the order
    (m, m'), (m, n'), (n, m'), (n, n') restricted to existing congruences.
    """

    sdType: str
    asdType: str
    sdSupers: str = ""
    asdSupers: str = ""
    optics: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for s in self.sdSupers + self.asdSupers:
            if s not in "ne":
                raise ValueError(f"bad expansion flag {s!r}")
        for k in self.optics:
            if k not in OPTICS:
                raise ValueError(f"bad optics class {k!r}")
        expected = len(self.sdSupers) * len(self.asdSupers)
        if self.optics and len(self.optics) != expected:
            raise ValueError(f"{len(self.optics)} optics entries for {expected} intersections")
        for i, a in enumerate(self.sdSupers):
            for j, b in enumerate(self.asdSupers):
                if self.optics and a == "n" and b == "n" and self.optics[i * len(self.asdSupers) + j] != "--":
                    raise InconsistentOptics("an intersection of two nonexpanding congruences must be [--]")

    @property
    def simplified(self):
        """True when the optics block is omitted.

        That happens when every congruence is nonexpanding, or when one side
        is type O (infinitely many congruences, so no finite intersection table).
        """
        if not self.optics or set(self.sdSupers + self.asdSupers) <= {"n"}:
            return True
        return "O" in (base_label(self.sdType), base_label(self.asdType))

    def render(self):
        def part(label, sup):
            return f"[{label}]" + (f"^{{{sup}}}" if sup else "")

        body = f"{part(self.sdType, self.sdSupers)} ⊗ {part(self.asdType, self.asdSupers)}"
        if self.simplified:
            return body
        return "{" + body + ", [" + ",".join(self.optics) + "]}"

    __str__ = render

    def complexified(self):
        """The same symbol with neutral-signature labels reduced to complex ones."""
        return replace(self, sdType=base_label(self.sdType), asdType=base_label(self.asdType))

    def matches(self, claimed):
        """Does this (computed) symbol realize a claimed one?"""
        return (
            label_matches(claimed.sdType, self.sdType)
            and label_matches(claimed.asdType, self.asdType)
            and claimed.sdSupers == self.sdSupers
            and claimed.asdSupers == self.asdSupers
            and (claimed.simplified and self.simplified or tuple(claimed.optics) == tuple(self.optics))
        )


def parse_symbol(text):
    """Inverse of GeometrySymbol.render (accepts 'x' or the tensor sign)."""
    import re

    t = text.strip().replace("⊗", "x").replace(" ", "")
    optics = ()
    if t.startswith("{"):
        m = re.fullmatch(r"\{(.*),\[([-+,]*)\]\}", t)
        if not m:
            raise ValueError(f"cannot parse symbol {text!r}")
        t, optics = m.group(1), tuple(k for k in m.group(2).split(",") if k)
    m = re.fullmatch(r"\[([A-Za-z_]+)\](?:\^\{([ne]*)\})?x\[([A-Za-z_]+)\](?:\^\{([ne]*)\})?", t)
    if not m:
        raise ValueError(f"cannot parse symbol {text!r}")
    return GeometrySymbol(m.group(1), m.group(3), m.group(2) or "", m.group(4) or "", optics)


def optics_class(theta, rho, threshold):
    return ("+" if abs(theta) > threshold else "-") + ("+" if abs(rho) > threshold else "-")


def assemble_symbol(sd, asd, sd_reports=(), asd_reports=(), optics=()):
    """Build the symbol from types, congruence reports (SD m, n; ASD m', n') and optics.

    ``optics`` holds classes (strings or objects with ``.cls``) in the
    canonical order (m, m'), (m, n'), (n, m'), (n, n').
    """
    def label(t):
        return t.label if isinstance(t, PetrovType) else str(t)

    def flags(reports):
        return "".join("n" if r.nonexpanding else "e" for r in reports)

    classes = tuple(getattr(k, "cls", k) for k in optics)
    return GeometrySymbol(label(sd), label(asd), flags(sd_reports), flags(asd_reports), classes)
