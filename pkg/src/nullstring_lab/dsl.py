"""A small expression language for the free functions of a metric family.

Grammar (whitespace insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' exponent)?
    atom   := number | 'i' | ident | func '(' expr ')' | '(' expr ')'
    exponent := ['-'] integer | '(' expr ')'      # must denote an integer

so ``-x^2`` is ``-(x^2)`` and ``a^2^3`` is rejected.  Functions are exp, ln,
sin and cos.  Identifiers naming one of the four coordinates become
``Coordinate`` nodes, every other identifier is a ``Parameter``.  The
literal ``i`` is only accepted in complex mode.
"""

import cmath
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import jet as J
from .errors import (
    DSLSyntaxError,
    LogDomainError,
    LogOfZero,
    DivisionNearZero,
    NonFiniteValue,
    NonIntegerExponent,
    SingularPoint,
    UnboundSlot,
    UnknownFunction,
)

FUNCTIONS = ("exp", "ln", "sin", "cos")
DEFAULT_COORDINATES = J.VARS
MAX_DEPTH = 200


# AST -------------------------------------------------------------------------

@dataclass(frozen=True)
class Number:
    value: float
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class ImaginaryUnit:
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Parameter:
    name: str
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Coordinate:
    name: str
    slot: int
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    span: tuple = field(default=(0, 0), compare=False, repr=False)


def walk(node):
    """Yield every node of the tree, parents first."""
    yield node
    if isinstance(node, Neg):
        yield from walk(node.operand)
    elif isinstance(node, Binary):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Power):
        yield from walk(node.base)
    elif isinstance(node, Call):
        yield from walk(node.arg)


def parameters(node):
    return sorted({n.name for n in walk(node) if isinstance(n, Parameter)})


def coordinates_used(node):
    return sorted({n.name for n in walk(node) if isinstance(n, Coordinate)})


# lexer -----------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


class _Source:
    def __init__(self, source):
        if isinstance(source, (bytes, bytearray)):
            try:
                text = bytes(source).decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DSLSyntaxError("source is not valid UTF-8", exc.start, exc.end) from None
        elif isinstance(source, str):
            text = source
        else:
            raise TypeError("DSL source must be str or bytes")
        self.text = text
        offsets = [0]
        for ch in text:
            offsets.append(offsets[-1] + len(ch.encode("utf-8", "surrogatepass")))
        self.offsets = offsets

    def byte(self, i):
        return self.offsets[i]


def tokenize(src):
    text = src.text
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", src.byte(pos), src.byte(pos + 1))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), src.byte(m.start()), src.byte(m.end())))
        pos = m.end()
    end = src.byte(len(text))
    tokens.append(Token("end", "", end, end))
    return tokens


# parser ----------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens, coordinates, mode):
        self.tokens = tokens
        self.pos = 0
        self.coordinates = {name: k for k, name in enumerate(coordinates)}
        self.complex = mode == "complex"
        self.depth = 0

    @property
    def tok(self):
        return self.tokens[self.pos]

    def advance(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.text != text or t.kind == "end":
            found = "end of input" if t.kind == "end" else repr(t.text)
            raise DSLSyntaxError(f"expected {text!r}, found {found}", t.start, t.end)
        return self.advance()

    def nest(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise DSLSyntaxError("expression nested too deeply", self.tok.start, self.tok.end)

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            t = self.tok
            if t.text == "^":
                raise DSLSyntaxError("chained '^' is not allowed; add parentheses", t.start, t.end)
            raise DSLSyntaxError(f"unexpected {t.text!r}", t.start, t.end)
        return node

    def expr(self):
        self.nest()
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            right = self.term()
            node = Binary(op, node, right, (node.span[0], right.span[1]))
        self.depth -= 1
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            right = self.unary()
            node = Binary(op, node, right, (node.span[0], right.span[1]))
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            start = self.advance().start
            self.nest()
            operand = self.unary()
            self.depth -= 1
            return Neg(operand, (start, operand.span[1]))
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            exponent, end = self.exponent()
            base = Power(base, exponent, (base.span[0], end))
            if self.tok.kind == "op" and self.tok.text == "^":
                t = self.tok
                raise DSLSyntaxError("chained '^' is not allowed; add parentheses", t.start, t.end)
        return base

    def exponent(self):
        t = self.tok
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.expr()
            close = self.expect(")")
            value = _integer_value(inner)
            if value is None:
                raise NonIntegerExponent("exponent must be an integer literal", t.start, close.end)
            return value, close.end
        sign = 1
        start = t.start
        if t.kind == "op" and t.text == "-":
            self.advance()
            sign = -1
            t = self.tok
        if t.kind == "number":
            self.advance()
            if not t.text.isdigit():
                raise NonIntegerExponent("exponent must be an integer literal", start, t.end)
            return sign * int(t.text), t.end
        if t.kind == "ident":
            raise NonIntegerExponent("exponent must be an integer literal", start, t.end)
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise DSLSyntaxError(f"expected an integer exponent, found {found}", t.start, t.end)

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            value = float(t.text)
            if not math.isfinite(value):
                raise DSLSyntaxError("numeric literal overflows", t.start, t.end)
            return Number(value, (t.start, t.end))
        if t.kind == "ident":
            self.advance()
            name = t.text
            if self.tok.kind == "op" and self.tok.text == "(":
                if name not in FUNCTIONS:
                    raise UnknownFunction(f"unknown function {name!r}", t.start, t.end)
                self.advance()
                arg = self.expr()
                close = self.expect(")")
                return Call(name, arg, (t.start, close.end))
            if name in FUNCTIONS:
                raise DSLSyntaxError(f"function {name!r} needs an argument", t.start, t.end)
            if name == "i":
                if not self.complex:
                    raise DSLSyntaxError("'i' is only available in complex mode", t.start, t.end)
                return ImaginaryUnit((t.start, t.end))
            if name in self.coordinates:
                return Coordinate(name, self.coordinates[name], (t.start, t.end))
            return Parameter(name, (t.start, t.end))
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise DSLSyntaxError(f"expected a number, name or '(', found {found}", t.start, t.end)


def _integer_value(node):
    if isinstance(node, Number) and float(node.value).is_integer():
        return int(node.value)
    if isinstance(node, Neg):
        inner = _integer_value(node.operand)
        return None if inner is None else -inner
    return None


def parse(source, coordinates=DEFAULT_COORDINATES, mode="real", auxiliary=()):
    """Parse DSL text (str or UTF-8 bytes) into an expression tree.

    ``auxiliary`` names extra slots after the four coordinates (slot 4, 5, ...),
    e.g. the unknown of an implicit equation.
    """
    if mode not in ("real", "complex"):
        raise ValueError(f"mode must be 'real' or 'complex', got {mode!r}")
    if len(coordinates) != J.NVARS or len(set(coordinates)) != J.NVARS:
        raise ValueError("exactly four distinct coordinate names are required")
    names = tuple(coordinates) + tuple(auxiliary)
    if len(set(names)) != len(names):
        raise ValueError("auxiliary names must differ from the coordinates")
    for name in names:
        if name in FUNCTIONS or name == "i":
            raise ValueError(f"{name!r} cannot be used as a coordinate name")
    src = _Source(source)
    return _Parser(tokenize(src), names, mode).parse()


# printer ---------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_UNARY_PREC = 3
_POWER_PREC = 4
_ATOM_PREC = 5


def _prec(node):
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY_PREC
    if isinstance(node, Power):
        return _POWER_PREC
    return _ATOM_PREC


def _format_number(v):
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def pretty(node):
    """Render a tree as DSL text that parses back to an equal tree."""
    if isinstance(node, Number):
        return _format_number(node.value)
    if isinstance(node, ImaginaryUnit):
        return "i"
    if isinstance(node, (Parameter, Coordinate)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({pretty(node.arg)})"
    if isinstance(node, Neg):
        inner = pretty(node.operand)
        if _prec(node.operand) < _UNARY_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Power):
        base = pretty(node.base)
        if _prec(node.base) < _ATOM_PREC:
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, Binary):
        p = _PREC[node.op]
        left = pretty(node.left)
        if _prec(node.left) < p:
            left = f"({left})"
        right = pretty(node.right)
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


# evaluation ------------------------------------------------------------------

def _tag(exc, node):
    if getattr(exc, "span", None) is None:
        exc.span = node.span
    return exc


def eval_jet_expr(node, coords, params, record=None):
    """Evaluate a tree to a Jet.

    ``coords`` maps coordinate slot -> Jet (seed jets for plain evaluation, or
    arbitrary jets to substitute one field into another); ``params`` maps
    parameter name -> number.  When ``record`` is a list, the jets of every
    denominator and logarithm argument are appended to it.
    """
    if isinstance(node, Number):
        return J.constant(node.value)
    if isinstance(node, ImaginaryUnit):
        return J.constant(1j)
    if isinstance(node, Coordinate):
        return coords[node.slot]
    if isinstance(node, Parameter):
        try:
            return J.as_jet(params[node.name])
        except KeyError:
            raise UnboundSlot(f"parameter {node.name!r} is not bound") from None
    try:
        if isinstance(node, Neg):
            return J.neg(eval_jet_expr(node.operand, coords, params, record))
        if isinstance(node, Power):
            base = eval_jet_expr(node.base, coords, params, record)
            if node.exponent < 0 and record is not None:
                record.append(base)
            return J.pow_int(base, node.exponent)
        if isinstance(node, Call):
            arg = eval_jet_expr(node.arg, coords, params, record)
            if node.func == "ln" and record is not None:
                record.append(arg)
            return J.OPS[node.func](arg)
        if isinstance(node, Binary):
            left = eval_jet_expr(node.left, coords, params, record)
            right = eval_jet_expr(node.right, coords, params, record)
            if node.op == "/" and record is not None:
                record.append(right)
            return {"+": J.add, "-": J.sub, "*": J.mul, "/": J.div}[node.op](left, right)
    except SingularPoint as exc:
        raise _tag(exc, node)
    raise TypeError(f"not an expression node: {node!r}")


_REAL_FUNCS = {"exp": math.exp, "ln": math.log, "sin": math.sin, "cos": math.cos}
_COMPLEX_FUNCS = {"exp": cmath.exp, "ln": cmath.log, "sin": cmath.sin, "cos": cmath.cos}


def eval_value_expr(node, point, params, complex_mode=False):
    """Plain scalar evaluation with the math/cmath library (no jets)."""
    funcs = _COMPLEX_FUNCS if complex_mode else _REAL_FUNCS

    def ev(n):
        if isinstance(n, Number):
            return n.value
        if isinstance(n, ImaginaryUnit):
            return 1j
        if isinstance(n, Coordinate):
            return point[n.slot]
        if isinstance(n, Parameter):
            try:
                return params[n.name]
            except KeyError:
                raise UnboundSlot(f"parameter {n.name!r} is not bound") from None
        if isinstance(n, Neg):
            return -ev(n.operand)
        if isinstance(n, Power):
            base = ev(n.base)
            if n.exponent < 0 and base == 0:
                raise DivisionNearZero("zero to a negative power", n.span)
            return base**n.exponent
        if isinstance(n, Call):
            arg = ev(n.arg)
            if n.func == "ln":
                if arg == 0:
                    raise LogOfZero("logarithm of zero", n.span)
                if not complex_mode and arg < 0:
                    raise LogDomainError("logarithm of a negative value", n.span)
            try:
                return funcs[n.func](arg)
            except OverflowError:
                raise NonFiniteValue("overflow", n.span) from None
        if isinstance(n, Binary):
            a, b = ev(n.left), ev(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            if b == 0:
                raise DivisionNearZero("division by zero", n.span)
            return a / b
        raise TypeError(f"not an expression node: {n!r}")

    return ev(node)


class ScalarField:
    """A parsed expression bound to parameter values and a number mode."""

    def __init__(self, expr, params=None, mode="real", coordinates=DEFAULT_COORDINATES, source=None):
        if isinstance(expr, (str, bytes)):
            source = expr if source is None else source
            expr = parse(expr, coordinates=coordinates, mode=mode)
        self.expr = expr
        self.params = dict(params or {})
        self.mode = mode
        self.coordinates = tuple(coordinates)
        self.source = source
        missing = [name for name in parameters(expr) if name not in self.params]
        if missing:
            raise UnboundSlot(f"unbound parameters: {', '.join(missing)}")
        if mode == "real":
            for name in parameters(expr):
                if isinstance(self.params[name], complex):
                    raise ValueError(f"parameter {name!r} is complex in real mode")

    def __repr__(self):
        return f"ScalarField({pretty(self.expr)!r}, mode={self.mode!r})"

    def _point(self, point):
        point = np.asarray(point, dtype=complex if self.mode == "complex" else float)
        if point.shape != (J.NVARS,):
            raise ValueError("a point has four coordinates")
        return point

    def jet(self, point, coords=None):
        """Order-3 jet at ``point``; ``coords`` optionally overrides slot jets."""
        point = self._point(point)
        if coords is None:
            coords = [J.seed(point, v) for v in range(J.NVARS)]
        out = eval_jet_expr(self.expr, coords, self.params)
        if self.mode == "complex" and not out.is_complex:
            out = J.Jet(out.coeffs.astype(complex), out.order)
        return out

    def value(self, point):
        point = self._point(point)
        return eval_value_expr(self.expr, point, self.params, self.mode == "complex")

    def singular_distance(self, point):
        """First-order estimate of the distance to the nearest pole or log branch point."""
        point = self._point(point)
        record = []
        coords = [J.seed(point, v) for v in range(J.NVARS)]
        try:
            eval_jet_expr(self.expr, coords, self.params, record)
        except SingularPoint:
            return 0.0
        dist = math.inf
        for j in record:
            g = float(np.linalg.norm(j.gradient()))
            v = abs(j.value)
            if g == 0.0:
                if v == 0.0:
                    return 0.0
                continue
            dist = min(dist, v / g)
        return dist


def eval_jet(f, point):
    """Order-3 jet of a ScalarField at a point."""
    return f.jet(point)


def scalar_field(source, params=None, mode="real", coordinates=DEFAULT_COORDINATES):
    return ScalarField(source, params, mode, coordinates)
