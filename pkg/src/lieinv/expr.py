"""Exact symbolic scalar kernel.

Expressions are sympy objects restricted to the tower: rational constants,
named variables, sums, products, integer powers, exp and log.  Everything in
the package funnels scalar work through the functions here so the tower
restriction, the normal form and the zero test stay in one place.

The normal form is ``cancel``-style: a single quotient of expanded,
collected polynomials in the variables and in the formal atoms exp(u),
log(u).  ``log(exp(u)) -> u`` and ``exp(log(u)) -> u`` are applied
unconditionally; results are therefore chart-local (valid where log
arguments are positive), which downstream code records explicitly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import sympy as sp
from sympy.printing.str import StrPrinter

from .errors import (
    DomainEvalError,
    ParseError,
    PivotUndecidableError,
    ResourceLimitError,
    TowerError,
    UnboundVariableError,
)

Expr = sp.Expr

#: Hard ceiling on normalized expression size, in tree nodes.
NODE_LIMIT = 400_000

ZERO = sp.Integer(0)
ONE = sp.Integer(1)


def var(name: str) -> Expr:
    """A named variable."""
    if not name or not (name[0].isalpha() or name[0] == "_"):
        raise ParseError(f"invalid variable name {name!r}")
    return sp.Symbol(name)


def rational(p, q=1) -> Expr:
    """Exact rational constant p/q."""
    return sp.Rational(p, q)


def as_expr(x) -> Expr:
    """Coerce ints, Fractions and sympy objects into the tower."""
    if isinstance(x, Fraction):
        return sp.Rational(x.numerator, x.denominator)
    if isinstance(x, (int, sp.Integer)):
        return sp.Integer(x)
    if isinstance(x, sp.Expr):
        check_tower(x)
        return x
    raise TowerError(f"cannot coerce {type(x).__name__} into an expression")


_ALLOWED_ATOMS = (sp.Symbol, sp.Integer, sp.Rational)


def check_tower(e: sp.Basic) -> None:
    """Raise TowerError if ``e`` uses anything outside the tower."""
    for node in sp.preorder_traversal(e):
        if isinstance(node, (sp.Add, sp.Mul)):
            continue
        if isinstance(node, sp.Pow):
            if not (node.exp.is_Integer or node.base is sp.E):
                raise TowerError(f"non-integer power: {node}")
            continue
        if isinstance(node, (sp.exp, sp.log)):
            continue
        if node is sp.E:
            continue
        if isinstance(node, _ALLOWED_ATOMS):
            if isinstance(node, sp.Float):
                raise TowerError(f"float constant: {node}")
            continue
        if isinstance(node, sp.Float):
            raise TowerError(f"float constant: {node}")
        raise TowerError(f"unsupported node {type(node).__name__}: {node}")


def _strip_log_exp(e: Expr) -> Expr:
    # log(exp(u)) -> u and log(b^n) -> n log(b) for integer n, bottom-up;
    # both are chart-local (log arguments positive).  exp(log(u)) -> u is
    # automatic in sympy.
    def _rewrite(n):
        arg = n.args[0]
        if isinstance(arg, sp.exp):
            return arg.args[0]
        return arg.exp * sp.log(arg.base)

    return e.replace(
        lambda n: isinstance(n, sp.log)
        and (
            isinstance(n.args[0], sp.exp)
            or (isinstance(n.args[0], sp.Pow) and n.args[0].exp.is_Integer)
        ),
        _rewrite,
    )


def node_count(e: Expr) -> int:
    return sum(1 for _ in sp.preorder_traversal(e))


def normalize(e) -> Expr:
    """Deterministic normal form within the tower.

    Idempotent; structural equality of normal forms implies semantic
    equality on the chart where all log arguments are positive.
    """
    e = as_expr(e)
    if node_count(e) > NODE_LIMIT:
        raise ResourceLimitError(f"expression exceeds {NODE_LIMIT} nodes")
    e = _strip_log_exp(e)
    e = sp.powsimp(e, combine="exp")
    e = sp.cancel(sp.together(e))
    e = _strip_log_exp(e)
    if node_count(e) > NODE_LIMIT:
        raise ResourceLimitError(f"normal form exceeds {NODE_LIMIT} nodes")
    return e


def differentiate(e, v) -> Expr:
    """Partial derivative with respect to variable ``v``."""
    e = as_expr(e)
    sym = sp.Symbol(v) if isinstance(v, str) else v
    return normalize(sp.diff(e, sym))


def substitute(e, bindings: Mapping) -> Expr:
    """Simultaneous substitution of variables, then normalization."""
    e = as_expr(e)
    table = {}
    for k, v in bindings.items():
        sym = sp.Symbol(k) if isinstance(k, str) else k
        table[sym] = as_expr(v)
    return normalize(e.xreplace(table))


def free_variables(e) -> tuple[str, ...]:
    """Sorted names of the variables occurring in ``e``."""
    return tuple(sorted(s.name for s in as_expr(e).free_symbols))


def _to_sympy_value(v):
    if isinstance(v, Fraction):
        return sp.Rational(v.numerator, v.denominator)
    if isinstance(v, (int, sp.Integer, sp.Rational)):
        return sp.sympify(v)
    if isinstance(v, float):
        return sp.Float(v)
    if isinstance(v, sp.Expr):
        return v
    raise UnboundVariableError(f"cannot bind value of type {type(v).__name__}")


def eval_numeric(e, point: Mapping, dps: int = 30) -> float:
    """IEEE double value of ``e`` at ``point`` (all variables bound).

    Exact on rational subtrees; raises DomainEvalError on log of a
    non-positive argument and UnboundVariableError when variables remain.
    """
    e = as_expr(e)
    table = {sp.Symbol(k) if isinstance(k, str) else k: _to_sympy_value(v) for k, v in point.items()}
    missing = e.free_symbols - set(table)
    if missing:
        raise UnboundVariableError(f"unbound variables: {sorted(s.name for s in missing)}")
    value = e.xreplace(table)
    result = value.evalf(dps)
    if result.has(sp.zoo, sp.oo, -sp.oo, sp.nan):
        raise DomainEvalError(f"undefined value at point: {result}")
    if not result.is_real:
        raise DomainEvalError(f"non-real value at point: {result}")
    return float(result)


@dataclass(frozen=True)
class ZeroVerdict:
    """Outcome of a semantic zero test.

    ``probabilistic`` marks verdicts that rest on numeric probing rather
    than on the normal form.
    """

    is_zero: bool
    probabilistic: bool = False
    witness: Mapping | None = None


def random_rational(rng: random.Random, positive: bool = True) -> Fraction:
    """A small random rational, bounded away from zero."""
    num = rng.randint(1, 40)
    den = rng.randint(1, 12)
    value = Fraction(num, den) + Fraction(1, 3)
    if not positive and rng.random() < 0.5:
        value = -value
    return value


def random_point(names: Iterable[str], rng: random.Random, positive: bool = True) -> dict:
    return {name: random_rational(rng, positive=positive) for name in sorted(names)}


def zero_verdict(e, seed: int = 0, probes: int = 8, tol: float = 1e-10) -> ZeroVerdict:
    """Decide whether ``e`` is semantically zero.

    Normal-form zero is conclusive.  Otherwise seeded numeric probing at
    positive rational points decides: any probe above tolerance certifies
    nonzero; agreement with zero at every probe yields a probabilistic
    zero verdict.
    """
    e = normalize(e)
    if e is ZERO or e == 0:
        return ZeroVerdict(True)
    names = free_variables(e)
    if not names:
        # Constant in the tower that is not the zero normal form, e.g. exp(3).
        value = float(sp.Abs(e).evalf(30))
        return ZeroVerdict(value <= tol, probabilistic=value <= tol)
    rng = random.Random(seed)
    evaluated = 0
    for _ in range(max(probes, 1) * 4):
        point = random_point(names, rng)
        try:
            value = eval_numeric(e, point)
        except (DomainEvalError, UnboundVariableError):
            continue
        evaluated += 1
        if abs(value) > tol:
            return ZeroVerdict(False, witness=point)
        if evaluated >= probes:
            break
    if evaluated == 0:
        raise PivotUndecidableError(e, -1, -1)
    return ZeroVerdict(True, probabilistic=True)


def is_zero(e, seed: int = 0, probes: int = 8, tol: float = 1e-10) -> bool:
    return zero_verdict(e, seed=seed, probes=probes, tol=tol).is_zero


# ---------------------------------------------------------------------------
# text syntax: infix with ^ powers, exp(...), log(...), rational literals p/q
# ---------------------------------------------------------------------------


class _Printer(StrPrinter):
    def _print_Pow(self, expr, rational=False):
        text = super()._print_Pow(expr, rational=rational)
        return text.replace("**", "^")

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_ExpBase(self, expr):
        return f"exp({self._print(expr.args[0])})"


_printer = _Printer({"order": "lex"})


def to_text(e) -> str:
    """Render an expression in the package's text syntax."""
    return _printer.doprint(as_expr(e))


_TOKEN_KINDS = {"+", "-", "*", "/", "^", "(", ")"}


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _TOKEN_KINDS:
            tokens.append((c, c, i))
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        token = self.tokens[self.pos]
        if kind is not None and token[0] != kind:
            raise ParseError(f"expected {kind!r}, found {token[1]!r}", token[2])
        self.pos += 1
        return token

    def parse(self) -> Expr:
        e = self.expr()
        tail = self.peek()
        if tail[0] != "end":
            raise ParseError(f"unexpected trailing input {tail[1]!r}", tail[2])
        return e

    def expr(self) -> Expr:
        kind = self.peek()[0]
        negate = False
        if kind in ("+", "-"):
            negate = self.take()[0] == "-"
        value = self.term()
        if negate:
            value = -value
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Expr:
        value = self.power()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            rhs = self.power()
            value = value * rhs if op == "*" else value / rhs
        return value

    def power(self) -> Expr:
        base = self.primary()
        if self.peek()[0] != "^":
            return base
        self.take("^")
        exponent = self.exponent()
        return base**exponent

    def exponent(self) -> sp.Integer:
        sign = 1
        parens = False
        if self.peek()[0] == "(":
            self.take("(")
            parens = True
        if self.peek()[0] == "-":
            self.take("-")
            sign = -1
        token = self.take("int")
        if parens:
            self.take(")")
        return sp.Integer(sign * int(token[1]))

    def primary(self) -> Expr:
        token = self.peek()
        if token[0] == "int":
            self.take()
            return sp.Integer(int(token[1]))
        if token[0] == "name":
            self.take()
            if self.peek()[0] == "(":
                if token[1] not in ("exp", "log"):
                    raise ParseError(f"unknown function {token[1]!r}", token[2])
                self.take("(")
                arg = self.expr()
                self.take(")")
                return sp.exp(arg) if token[1] == "exp" else sp.log(arg)
            return sp.Symbol(token[1])
        if token[0] == "(":
            self.take("(")
            value = self.expr()
            self.take(")")
            return value
        if token[0] == "-":
            self.take()
            return -self.primary()
        raise ParseError(f"unexpected token {token[1]!r}", token[2])


def parse(text: str) -> Expr:
    """Parse the package's text syntax into a normalized expression."""
    e = _Parser(text).parse()
    check_tower(e)
    return normalize(e)
