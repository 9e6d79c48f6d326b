import numpy as np
import pytest

from nullstring_lab import frame as F

LEAVES = ("q", "p", "x", "y", "q*p", "x*y", "q*x", "p*y", "0.5", "1.3", "2")
UNARY = ("exp", "sin", "cos")


def random_expression(rng, depth=3):
    """A random DSL expression that stays finite and smooth on [-1, 1]^4."""
    if depth == 0 or rng.random() < 0.25:
        return str(rng.choice(LEAVES))
    kind = rng.integers(0, 6)
    a = random_expression(rng, depth - 1)
    if kind == 0:
        return f"({a}) + ({random_expression(rng, depth - 1)})"
    if kind == 1:
        return f"({a}) - ({random_expression(rng, depth - 1)})"
    if kind == 2:
        return f"({a}) * ({random_expression(rng, depth - 1)})"
    if kind == 3:
        return f"({a}) / (2 + sin({random_expression(rng, depth - 1)}))"
    if kind == 4:
        return f"({a})^{int(rng.integers(2, 4))}"
    fn = str(rng.choice(UNARY))
    if fn == "exp":
        return f"exp(sin({a}))"
    return f"{fn}({a})"


def random_polynomial(rng, degree=3, terms=4):
    """Random polynomial in q, p, x, y with small coefficients."""
    out = []
    for _ in range(terms):
        powers = rng.integers(0, degree + 1, size=4)
        while powers.sum() > degree + 1:
            powers[rng.integers(0, 4)] = 0
        mono = "*".join(f"{v}^{k}" for v, k in zip("qpxy", powers) if k)
        coef = round(float(rng.uniform(-2, 2)), 3)
        out.append(f"{coef}" + (f"*{mono}" if mono else ""))
    return " + ".join(out).replace("+ -", "- ")


def random_plebanski(rng, mode="real"):
    return F.plebanski(*(random_polynomial(rng) for _ in range(3)), mode=mode)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for k in sorted(verdicts):
            terminalreporter.write_line(verdicts[k])
