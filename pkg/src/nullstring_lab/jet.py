"""Truncated Taylor jets in four variables (q, p, x, y) up to total order 3.

A jet stores the normalized coefficients ``d^alpha f / alpha!`` in a dense
35-slot array, so multiplication is a truncated polynomial product and
``partial`` multiplies the factorial back in.  Jets are real (float64) or
complex (complex128); real inputs always give real outputs.

Differentiating a jet (``derivative``) lowers its trustworthy order by one,
which is tracked in ``Jet.order``.  Coefficients above ``order`` are kept at
zero and never read.
"""

from itertools import combinations_with_replacement, product
from math import factorial

import numpy as np

from .errors import (
    DivisionNearZero,
    LogDomainError,
    LogOfZero,
    NonFiniteValue,
    SingularSampling,
)

NVARS = 4
ORDER = 3
VARS = ("q", "p", "x", "y")
ZERO_GUARD = 1e-300


def _build_indices():
    out = []
    for deg in range(ORDER + 1):
        for combo in combinations_with_replacement(range(NVARS), deg):
            alpha = [0] * NVARS
            for v in combo:
                alpha[v] += 1
            out.append(tuple(alpha))
    return tuple(out)


MULTI_INDICES = _build_indices()
NCOEFFS = len(MULTI_INDICES)
SLOT = {alpha: k for k, alpha in enumerate(MULTI_INDICES)}
DEGREE = np.array([sum(a) for a in MULTI_INDICES])
ALPHA_FACTORIAL = np.array(
    [np.prod([factorial(e) for e in a]) for a in MULTI_INDICES], dtype=float
)


def _product_table():
    # gather[k, j] = slot of (alpha_k - alpha_j), or NCOEFFS when that is not
    # a valid multi-index; slot NCOEFFS of the padded operand holds zero.
    gather = np.full((NCOEFFS, NCOEFFS), NCOEFFS, dtype=np.intp)
    for k, ak in enumerate(MULTI_INDICES):
        for j, aj in enumerate(MULTI_INDICES):
            diff = tuple(a - b for a, b in zip(ak, aj))
            if min(diff) >= 0:
                gather[k, j] = SLOT[diff]
    return gather


_GATHER = _product_table()


def _derivative_table():
    tables = []
    for v in range(NVARS):
        src = np.full(NCOEFFS, -1, dtype=np.intp)
        fac = np.zeros(NCOEFFS)
        for k, beta in enumerate(MULTI_INDICES):
            if sum(beta) == ORDER:
                continue
            up = list(beta)
            up[v] += 1
            src[k] = SLOT[tuple(up)]
            fac[k] = up[v]
        tables.append((src, fac))
    return tables


_DERIV = _derivative_table()


def multi_index(alpha):
    """Validate and normalize a multi-index given as a 4-sequence."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != NVARS or min(alpha) < 0:
        raise ValueError(f"multi-index must have {NVARS} nonnegative entries: {alpha}")
    if sum(alpha) > ORDER:
        raise ValueError(f"|alpha| = {sum(alpha)} exceeds the jet order {ORDER}")
    return alpha


class Jet:
    """Order-3 Taylor jet of a scalar function of (q, p, x, y) at a point."""

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs, order=ORDER):
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (NCOEFFS,):
            raise ValueError(f"a jet needs {NCOEFFS} coefficients, got {coeffs.shape}")
        if not np.iscomplexobj(coeffs):
            coeffs = coeffs.astype(float, copy=False)
        if not np.all(np.isfinite(coeffs)):
            raise NonFiniteValue("jet coefficients overflowed")
        if order < ORDER:
            coeffs = np.where(DEGREE <= order, coeffs, 0)
        self.coeffs = coeffs
        self.order = int(order)

    @property
    def value(self):
        return self.coeffs[0]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.coeffs)

    def gradient(self):
        return np.array([self.coeffs[SLOT[a]] for a in _UNIT])

    def __repr__(self):
        kind = "complex" if self.is_complex else "real"
        return f"Jet({kind}, order={self.order}, value={self.value!r})"

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if isinstance(n, (int, np.integer)):
            return pow_int(self, int(n))
        return NotImplemented


_UNIT = tuple(tuple(1 if i == v else 0 for i in range(NVARS)) for v in range(NVARS))


def constant(value, order=ORDER):
    c = np.zeros(NCOEFFS, dtype=complex if isinstance(value, complex) else float)
    c[0] = value
    return Jet(c, order)


def seed(point, var):
    """Jet of the coordinate function ``point[var]``."""
    if var not in range(NVARS):
        raise ValueError(f"variable index must be in 0..{NVARS - 1}, got {var!r}")
    value = point[var]
    c = np.zeros(NCOEFFS, dtype=complex if np.iscomplexobj(np.asarray(point)) else float)
    c[0] = value
    c[SLOT[_UNIT[var]]] = 1
    return Jet(c)


def as_jet(v):
    if isinstance(v, Jet):
        return v
    if isinstance(v, (complex, np.complexfloating)):
        return constant(complex(v))
    return constant(float(v))


def _binary_order(a, b):
    return min(a.order, b.order)


def add(a, b):
    a, b = as_jet(a), as_jet(b)
    return Jet(a.coeffs + b.coeffs, _binary_order(a, b))


def sub(a, b):
    a, b = as_jet(a), as_jet(b)
    return Jet(a.coeffs - b.coeffs, _binary_order(a, b))


def neg(a):
    a = as_jet(a)
    return Jet(-a.coeffs, a.order)


def _product(ca, cb):
    padded = np.concatenate([ca, np.zeros(1, dtype=ca.dtype)])
    return padded[_GATHER] @ cb


def mul(a, b):
    a, b = as_jet(a), as_jet(b)
    return Jet(_product(a.coeffs, b.coeffs), _binary_order(a, b))


def _compose(a, taylor):
    """Apply f to a jet given f's Taylor coefficients [f, f', f''/2, f'''/6] at a.value."""
    du = a.coeffs.copy()
    du[0] = 0
    du2 = _product(du, du)
    du3 = _product(du2, du)
    out = taylor[1] * du + taylor[2] * du2 + taylor[3] * du3
    out = out.astype(np.result_type(out, np.asarray(taylor[0])))
    out[0] = taylor[0]
    return Jet(out, a.order)


def reciprocal(a):
    a = as_jet(a)
    u = a.value
    if abs(u) <= ZERO_GUARD:
        raise DivisionNearZero(f"division by a value of magnitude {abs(u):.3g}")
    r = 1 / u
    return _compose(a, (r, -r * r, r**3, -(r**4)))


def div(a, b):
    a, b = as_jet(a), as_jet(b)
    return mul(a, reciprocal(b))


def pow_int(a, n):
    a = as_jet(a)
    n = int(n)
    if n < 0:
        return reciprocal(pow_int(a, -n))
    result = constant(1.0, a.order)
    if a.is_complex:
        result = Jet(result.coeffs.astype(complex), a.order)
    base = a
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def exp(a):
    a = as_jet(a)
    e = np.exp(a.value)
    return _compose(a, (e, e, e / 2, e / 6))


def ln(a):
    a = as_jet(a)
    u = a.value
    if abs(u) <= ZERO_GUARD:
        raise LogOfZero("logarithm of zero")
    if not a.is_complex and u < 0:
        raise LogDomainError(f"logarithm of negative value {u!r} in real mode")
    r = 1 / u
    return _compose(a, (np.log(u), r, -r * r / 2, r**3 / 3))


def sin(a):
    a = as_jet(a)
    s, c = np.sin(a.value), np.cos(a.value)
    return _compose(a, (s, c, -s / 2, -c / 6))


def cos(a):
    a = as_jet(a)
    s, c = np.sin(a.value), np.cos(a.value)
    return _compose(a, (c, -s, -c / 2, s / 6))


OPS = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "div": div,
    "neg": neg,
    "pow_int": pow_int,
    "exp": exp,
    "ln": ln,
    "sin": sin,
    "cos": cos,
}


def jet_apply(op, *args):
    """Dispatch one of the ten primitive operations by name."""
    try:
        fn = OPS[op]
    except KeyError:
        raise ValueError(f"unknown jet operation {op!r}") from None
    return fn(*args)


def partial(j, alpha):
    """Raw partial derivative d^alpha f at the expansion point."""
    alpha = multi_index(alpha)
    if sum(alpha) > j.order:
        raise ValueError(f"jet only carries derivatives up to order {j.order}")
    k = SLOT[alpha]
    return j.coeffs[k] * ALPHA_FACTORIAL[k]


def derivative(j, var):
    """Jet of d f / d(var); its order drops by one."""
    if j.order < 1:
        raise ValueError("cannot differentiate an order-0 jet")
    src, fac = _DERIV[var]
    coeffs = np.zeros_like(j.coeffs)
    ok = src >= 0
    coeffs[ok] = j.coeffs[src[ok]] * fac[ok]
    return Jet(coeffs, j.order - 1)


def d(j, *vars_):
    """Repeated derivative, e.g. ``d(j, 2, 2)`` for d^2 f / dx^2."""
    for v in vars_:
        j = derivative(j, v)
    return j


# finite-difference oracle -----------------------------------------------------

_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}

RICHARDSON_BASE_STEP_FACTOR = 100.0
RICHARDSON_LEVELS = 3


def central_difference(func, point, alpha, h):
    """Tensor-product central difference estimate of d^alpha func at point."""
    alpha = multi_index(alpha)
    point = np.asarray(point)
    total = 0.0
    for terms in product(*(_STENCILS[k] for k in alpha)):
        weight = 1.0
        offset = np.zeros(NVARS)
        for v, (o, w) in enumerate(terms):
            weight *= w
            offset[v] = o
        total = total + weight * func(point + h * offset)
    return total / h ** sum(alpha)


def richardson(func, point, alpha, h, levels=RICHARDSON_LEVELS):
    """Richardson-extrapolate central differences with steps h, h/2, h/4, ..."""
    table = []
    for i in range(levels):
        row = [central_difference(func, point, alpha, h / 2**i)]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (4**j - 1))
        table.append(row)
    return table[-1][-1]


def fd_estimate(func, point, alpha, h=1e-4):
    """Finite-difference estimate used as the differentiation oracle.

    Orders up to 2 use a plain central difference at step h.  Third order
    differences at h = 1e-4 are swamped by rounding (eps / h^3 ~ 1e-4), so
    they are Richardson-extrapolated from a base step 100 h.
    """
    alpha = multi_index(alpha)
    if sum(alpha) == 3:
        return richardson(func, point, alpha, h * RICHARDSON_BASE_STEP_FACTOR)
    return central_difference(func, point, alpha, h)


def relative_error(estimate, exact):
    """|estimate - exact| relative to max(|exact|, 1)."""
    return float(abs(estimate - exact) / max(abs(exact), 1.0))


def stencil_radius(alpha, h=1e-4):
    alpha = multi_index(alpha)
    step = h * RICHARDSON_BASE_STEP_FACTOR if sum(alpha) == 3 else h
    return 2 * step if max(alpha) == 3 else step


def finite_diff_check(f, point, alpha, h=1e-4):
    """Relative error between a field's jet partial and a finite-difference estimate.

    ``f`` must provide ``jet(point)`` and ``value(point)``; if it also provides
    ``singular_distance(point)`` the check refuses points whose stencil would
    reach within 10 steps of a pole or log branch point.
    """
    alpha = multi_index(alpha)
    point = np.asarray(point)
    radius = stencil_radius(alpha, h)
    if hasattr(f, "singular_distance"):
        dist = f.singular_distance(point)
        if dist <= 10 * radius:
            raise SingularSampling(
                f"point lies {dist:.3g} from a singular locus; stencil radius {radius:.3g}"
            )
    exact = partial(f.jet(point), alpha)
    estimate = fd_estimate(f.value, point, alpha, h)
    return relative_error(estimate, exact)
