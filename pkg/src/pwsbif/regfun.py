"""Smooth monotone switch functions with algebraic tails.

A switch function ``phi`` rises from 0 at -inf to 1 at +inf, with strictly
positive derivative everywhere and an algebraic tail

    1 - phi(s) = beta * s**(-k) * (1 + o(1)),   s -> +inf,

for a positive integer ``k`` (the transition coefficient) and ``beta > 0``
(the tail coefficient).  Flat-tailed switches such as tanh decay faster
than any power and are rejected by :func:`validate_regularization`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, ExpressionParseError

__all__ = [
    "RegularizationFunction",
    "ValidationReport",
    "make_builtin",
    "make_from_expression",
    "validate_regularization",
    "BUILTIN_NAMES",
]


@dataclass(frozen=True)
class RegularizationFunction:
    """A switch function with its derivative and declared tail data.

    Instances are immutable and safe to share across parallel workers.

    Attributes
    ----------
    eval : callable
        phi(s) for scalar s.
    deriv : callable
        phi'(s) for scalar s.
    k : int
        Declared tail exponent (positive integer).
    beta : float
        Declared tail coefficient, beta > 0.
    name : str
        Identifier used in reports and configs.
    odd_symmetric : bool
        True when phi - 1/2 is odd, i.e. phi(s) + phi(-s) = 1.  Required
        by the friction-oscillator model.
    """

    eval: Callable[[float], float]
    deriv: Callable[[float], float]
    k: int
    beta: float
    name: str
    odd_symmetric: bool = False
    tail: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.k < 1 or self.k != int(self.k):
            raise ConfigurationError(f"transition coefficient k must be a positive integer, got {self.k}")
        if not self.beta > 0:
            raise ConfigurationError(f"tail coefficient beta must be positive, got {self.beta}")

    def tail_at(self, s: float) -> float:
        """1 - phi(s), using the cancellation-free form when available.

        The plain difference loses all precision once 1 - phi drops below
        machine epsilon; the blow-up charts evaluate the tail far out where
        that matters.
        """
        if self.tail is not None:
            return self.tail(s)
        return 1.0 - self.eval(s)


def _sqrt_sigmoid(s: float) -> float:
    return 0.5 * (1.0 + s / math.sqrt(s * s + 1.0))


def _sqrt_sigmoid_deriv(s: float) -> float:
    return 0.5 * (s * s + 1.0) ** -1.5


def _sqrt_sigmoid_tail(s: float) -> float:
    # 1 - phi(s) = 1 / (2 (s^2 + 1 + s sqrt(s^2 + 1))), exact for s >= 0
    if s <= 0.0:
        return 1.0 - _sqrt_sigmoid(s)
    if s > 1e150:  # s*s would overflow inside the sqrt
        return 0.25 / (s * s)
    q = s * s + 1.0
    return 0.5 / (q + s * math.sqrt(q))


def _arctan_sigmoid(s: float) -> float:
    return 0.5 + math.atan(s) / math.pi


def _arctan_sigmoid_deriv(s: float) -> float:
    return 1.0 / (math.pi * (1.0 + s * s))


def _arctan_sigmoid_tail(s: float) -> float:
    # 1 - phi(s) = atan(1/s)/pi for s > 0
    if s <= 0.0:
        return 1.0 - _arctan_sigmoid(s)
    return math.atan(1.0 / s) / math.pi


BUILTIN_NAMES = ("sqrt_sigmoid", "arctan_sigmoid")


def make_builtin(name: str) -> RegularizationFunction:
    """Return one of the built-in switch functions.

    ``sqrt_sigmoid``  : phi(s) = (1 + s/sqrt(s^2+1))/2, k = 2, beta = 1/4.
    ``arctan_sigmoid``: phi(s) = 1/2 + atan(s)/pi,      k = 1, beta = 1/pi.
    """
    if name == "sqrt_sigmoid":
        return RegularizationFunction(
            eval=_sqrt_sigmoid, deriv=_sqrt_sigmoid_deriv,
            k=2, beta=0.25, name=name, odd_symmetric=True, tail=_sqrt_sigmoid_tail,
        )
    if name == "arctan_sigmoid":
        return RegularizationFunction(
            eval=_arctan_sigmoid, deriv=_arctan_sigmoid_deriv,
            k=1, beta=1.0 / math.pi, name=name, odd_symmetric=True, tail=_arctan_sigmoid_tail,
        )
    raise ConfigurationError(
        f"unknown regularization {name!r}; built-ins are {', '.join(BUILTIN_NAMES)}"
    )


# ---------------------------------------------------------------------------
# Expression mini-grammar for user switch functions
#
#   expr   := term (('+'|'-') term)*
#   term   := factor (('*'|'/') factor)*
#   factor := '-' factor | power
#   power  := atom ('^' factor)?          (right associative)
#   atom   := number | 's' | func '(' expr ')' | '(' expr ')'
#
# Functions: sqrt, atan, exp, abs; tanh is also accepted so that
# flat-tailed candidates can be written directly and rejected by
# validation rather than by the parser.
# ---------------------------------------------------------------------------

_FUNCTIONS = {
    "sqrt": math.sqrt,
    "atan": math.atan,
    "exp": math.exp,
    "abs": abs,
    "tanh": math.tanh,
}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip_ws()
        if self.pos >= len(self.text):
            return None, self.pos
        ch = self.text[self.pos]
        start = self.pos
        if ch.isdigit() or ch == ".":
            j = self.pos
            seen_e = False
            while j < len(self.text):
                c = self.text[j]
                if c.isdigit() or c == ".":
                    j += 1
                elif c in "eE" and not seen_e and j + 1 < len(self.text) and (
                    self.text[j + 1].isdigit() or self.text[j + 1] in "+-"
                ):
                    seen_e = True
                    j += 2 if self.text[j + 1] in "+-" else 1
                else:
                    break
            return ("num", self.text[start:j]), start
        if ch.isalpha():
            j = self.pos
            while j < len(self.text) and self.text[j].isalnum():
                j += 1
            return ("ident", self.text[start:j]), start
        if ch in "+-*/^()":
            return ("op", ch), start
        raise ExpressionParseError(f"unexpected character {ch!r}", start)

    def next(self):
        tok, start = self.peek()
        if tok is not None:
            self.pos = start + len(tok[1])
        return tok, start


# AST nodes: ("num", v) ("var",) ("neg", a) ("add"/"sub"/"mul"/"div"/"pow", a, b)
# ("call", name, a)

def _parse(text: str):
    tz = _Tokenizer(text)

    def expr():
        node = term()
        while True:
            tok, _ = tz.peek()
            if tok == ("op", "+") or tok == ("op", "-"):
                tz.next()
                rhs = term()
                node = ("add" if tok[1] == "+" else "sub", node, rhs)
            else:
                return node

    def term():
        node = factor()
        while True:
            tok, _ = tz.peek()
            if tok == ("op", "*") or tok == ("op", "/"):
                tz.next()
                rhs = factor()
                node = ("mul" if tok[1] == "*" else "div", node, rhs)
            else:
                return node

    def factor():
        tok, _ = tz.peek()
        if tok == ("op", "-"):
            tz.next()
            return ("neg", factor())
        return power()

    def power():
        base = atom()
        tok, _ = tz.peek()
        if tok == ("op", "^"):
            tz.next()
            return ("pow", base, factor())
        return base

    def atom():
        tok, start = tz.next()
        if tok is None:
            raise ExpressionParseError("unexpected end of expression", len(text))
        kind, val = tok
        if kind == "num":
            try:
                return ("num", float(val))
            except ValueError:
                raise ExpressionParseError(f"bad number literal {val!r}", start) from None
        if kind == "ident":
            if val == "s":
                return ("var",)
            if val in _FUNCTIONS:
                tok2, start2 = tz.next()
                if tok2 != ("op", "("):
                    raise ExpressionParseError(f"expected '(' after {val}", start2)
                arg = expr()
                tok3, start3 = tz.next()
                if tok3 != ("op", ")"):
                    raise ExpressionParseError("expected ')'", start3)
                return ("call", val, arg)
            raise ExpressionParseError(f"unknown identifier {val!r}", start)
        if tok == ("op", "("):
            node = expr()
            tok2, start2 = tz.next()
            if tok2 != ("op", ")"):
                raise ExpressionParseError("expected ')'", start2)
            return node
        raise ExpressionParseError(f"unexpected token {val!r}", start)

    node = expr()
    tok, start = tz.peek()
    if tok is not None:
        raise ExpressionParseError(f"trailing input {tok[1]!r}", start)
    return node


def _eval_ast(node, s: float) -> float:
    op = node[0]
    if op == "num":
        return node[1]
    if op == "var":
        return s
    if op == "neg":
        return -_eval_ast(node[1], s)
    if op == "add":
        return _eval_ast(node[1], s) + _eval_ast(node[2], s)
    if op == "sub":
        return _eval_ast(node[1], s) - _eval_ast(node[2], s)
    if op == "mul":
        return _eval_ast(node[1], s) * _eval_ast(node[2], s)
    if op == "div":
        return _eval_ast(node[1], s) / _eval_ast(node[2], s)
    if op == "pow":
        return _eval_ast(node[1], s) ** _eval_ast(node[2], s)
    if op == "call":
        return _FUNCTIONS[node[1]](_eval_ast(node[2], s))
    raise AssertionError(op)


def _diff_ast(node):
    """Symbolic derivative of an AST with respect to s."""
    op = node[0]
    if op == "num":
        return ("num", 0.0)
    if op == "var":
        return ("num", 1.0)
    if op == "neg":
        return ("neg", _diff_ast(node[1]))
    if op in ("add", "sub"):
        return (op, _diff_ast(node[1]), _diff_ast(node[2]))
    if op == "mul":
        a, b = node[1], node[2]
        return ("add", ("mul", _diff_ast(a), b), ("mul", a, _diff_ast(b)))
    if op == "div":
        a, b = node[1], node[2]
        num = ("sub", ("mul", _diff_ast(a), b), ("mul", a, _diff_ast(b)))
        return ("div", num, ("mul", b, b))
    if op == "pow":
        a, b = node[1], node[2]
        if b[0] == "num":  # a^c -> c a^(c-1) a'
            c = b[1]
            return ("mul", ("mul", ("num", c), ("pow", a, ("num", c - 1.0))), _diff_ast(a))
        # general a^b = exp(b ln a); not needed for switch functions in practice
        ln_a = ("call", "_log", a)
        return ("mul", ("pow", a, b), ("add", ("mul", _diff_ast(b), ln_a), ("div", ("mul", b, _diff_ast(a)), a)))
    if op == "call":
        name, a = node[1], node[2]
        da = _diff_ast(a)
        if name == "sqrt":
            return ("div", da, ("mul", ("num", 2.0), ("call", "sqrt", a)))
        if name == "atan":
            return ("div", da, ("add", ("num", 1.0), ("mul", a, a)))
        if name == "exp":
            return ("mul", ("call", "exp", a), da)
        if name == "abs":
            return ("mul", ("call", "_sign", a), da)
        if name == "tanh":
            t = ("call", "tanh", a)
            return ("mul", ("sub", ("num", 1.0), ("mul", t, t)), da)
    raise AssertionError(op)


_FUNCTIONS["_log"] = math.log
_FUNCTIONS["_sign"] = lambda v: math.copysign(1.0, v)


def make_from_expression(
    expression: str,
    k: int,
    beta: float,
    name: str = "user",
    odd_symmetric: bool = False,
) -> RegularizationFunction:
    """Build a switch function from a closed-form expression in ``s``.

    The declared (k, beta) are taken on trust here; run
    :func:`validate_regularization` to check them against the actual tail.
    """
    ast = _parse(expression)
    dast = _diff_ast(ast)

    def f(s: float, _ast=ast) -> float:
        return _eval_ast(_ast, s)

    def df(s: float, _ast=dast) -> float:
        return _eval_ast(_ast, s)

    # fail fast on expressions that cannot even be evaluated
    f(0.0)
    df(0.0)
    return RegularizationFunction(eval=f, deriv=df, k=k, beta=beta, name=name,
                                  odd_symmetric=odd_symmetric)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking a switch function against its declared class."""

    name: str
    min_deriv: float
    monotone_ok: bool
    monotone_violations: tuple  # s values where phi'(s) <= 0
    left_residual: float        # |phi(s_min)|
    right_residual: float       # |phi(s_max) - 1|
    limits_ok: bool
    k_fit: float
    beta_fit: float
    k_ok: bool
    beta_ok: bool
    messages: tuple = ()

    @property
    def passed(self) -> bool:
        return self.monotone_ok and self.limits_ok and self.k_ok and self.beta_ok


def default_grid(s_max: float = 1e6, n_log: int = 240, n_core: int = 401) -> np.ndarray:
    """Symmetric sampling grid: log-spaced wings over [10, s_max] plus a
    linear core on [-10, 10]."""
    wing = np.logspace(1.0, math.log10(s_max), n_log)
    core = np.linspace(-10.0, 10.0, n_core)
    return np.unique(np.concatenate([-wing[::-1], core, wing]))


def validate_regularization(
    reg: RegularizationFunction,
    grid: Sequence[float] | None = None,
    *,
    fit_window: tuple[float, float] = (1e2, 1e6),
    n_fit: int = 200,
    k_tol: float = 0.05,
    beta_rel_tol: float = 0.05,
    limit_tol: float = 1e-6,
) -> ValidationReport:
    """Check monotonicity, the boundary limits and the algebraic tail.

    The tail exponent and coefficient are fitted by log-log regression of
    1 - phi(s) against s over ``fit_window``; the fit must reproduce the
    declared (k, beta) to within ``k_tol`` and ``beta_rel_tol``.
    Exponential tails make the fitted exponent diverge and fail the check.
    """
    s = np.asarray(grid, dtype=float) if grid is not None else default_grid()
    phi = np.array([reg.eval(float(v)) for v in s])
    dphi = np.array([reg.deriv(float(v)) for v in s])

    messages = []
    violations = tuple(float(v) for v in s[dphi <= 0.0])
    monotone_ok = len(violations) == 0
    if not monotone_ok:
        shown = ", ".join(f"{v:g}" for v in violations[:5])
        messages.append(f"monotonicity violation: phi'(s) <= 0 at s = {shown}")
    min_deriv = float(dphi.min())

    left = abs(phi[0])
    right = abs(phi[-1] - 1.0)
    limits_ok = left <= limit_tol and right <= limit_tol
    if not limits_ok:
        messages.append(
            f"boundary limits off: |phi({s[0]:g})| = {left:.3g}, |phi({s[-1]:g}) - 1| = {right:.3g}"
        )

    s_fit = np.logspace(math.log10(fit_window[0]), math.log10(fit_window[1]), n_fit)
    tail = np.array([1.0 - reg.eval(float(v)) for v in s_fit])
    mask = tail > 0.0
    if mask.sum() >= 2:
        slope, intercept = np.polyfit(np.log(s_fit[mask]), np.log(tail[mask]), 1)
        k_fit = float(-slope)
        beta_fit = float(math.exp(intercept))
    else:
        k_fit = math.inf
        beta_fit = 0.0
        messages.append("tail underflows to zero inside the fit window (faster than algebraic decay)")

    k_ok = abs(k_fit - reg.k) <= k_tol
    beta_ok = beta_fit > 0 and abs(beta_fit / reg.beta - 1.0) <= beta_rel_tol
    if not k_ok:
        messages.append(f"tail exponent mismatch: fitted k = {k_fit:.4g}, declared k = {reg.k}")
    if not beta_ok:
        messages.append(f"tail coefficient mismatch: fitted beta = {beta_fit:.4g}, declared beta = {reg.beta:.4g}")

    return ValidationReport(
        name=reg.name,
        min_deriv=min_deriv,
        monotone_ok=monotone_ok,
        monotone_violations=violations,
        left_residual=float(left),
        right_residual=float(right),
        limits_ok=limits_ok,
        k_fit=k_fit,
        beta_fit=beta_fit,
        k_ok=k_ok,
        beta_ok=beta_ok,
        messages=tuple(messages),
    )
