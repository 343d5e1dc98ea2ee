"""Triangular equation solving over the expression tower.

Only two invertible atoms are used: linear occurrences, and a single
exp-atom with the target inside a linear argument (inverted by log on the
chart where the right-hand side is positive).  This is deliberately
restricted; callers degrade gracefully when an equation resists.
"""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from . import expr as ex


@dataclass(frozen=True)
class Solution:
    value: sp.Expr
    chart: tuple  # expressions required positive


def _chart_factor(e) -> sp.Expr:
    """Positivity of e reduced to a simpler factor when safe (odd integer
    powers stripped, positive rational factors dropped)."""
    e = ex.normalize(e)
    factors = e.args if isinstance(e, sp.Mul) else (e,)
    kept = []
    for f in factors:
        if f.is_Rational:
            if f > 0:
                continue
            return e  # a negative constant flips the sign; keep as-is
        if isinstance(f, sp.Pow) and f.exp.is_Integer:
            if f.exp % 2 == 1:
                kept.append(f.base)
            continue
        kept.append(f)
    if not kept:
        return ex.ONE
    return ex.normalize(sp.Mul(*kept))


def solve_for(equation, target: str, seed: int = 0) -> Solution | None:
    """Solve ``equation == 0`` for ``target`` if a linear or single-exp-atom
    inversion applies; otherwise None."""
    eq = ex.normalize(equation)
    t = sp.Symbol(target)
    if t not in eq.free_symbols:
        return None
    num, _den = sp.fraction(sp.together(eq))
    num = ex.normalize(sp.expand(num))

    exp_atoms = [a for a in num.atoms(sp.exp) if t in a.free_symbols]
    log_atoms = [a for a in num.atoms(sp.log) if t in a.free_symbols]

    if not exp_atoms and not log_atoms:
        try:
            poly = sp.Poly(num, t)
        except sp.PolynomialError:
            return None
        if poly.degree() != 1:
            return None
        a = poly.coeff_monomial(t)
        b = poly.coeff_monomial(1)
        if ex.is_zero(a, seed=seed):
            return None
        return Solution(ex.normalize(-b / a), ())

    if len(exp_atoms) == 1 and not log_atoms:
        g = exp_atoms[0]
        u = g.args[0]
        marker = sp.Dummy("g")
        replaced = num.xreplace({g: marker})
        if t in replaced.free_symbols:
            return None
        try:
            upoly = sp.Poly(u, t)
            gpoly = sp.Poly(replaced, marker)
        except sp.PolynomialError:
            return None
        if upoly.degree() != 1 or gpoly.degree() != 1:
            return None
        c = upoly.coeff_monomial(t)
        d = upoly.coeff_monomial(1)
        a = gpoly.coeff_monomial(marker)
        b = gpoly.coeff_monomial(1)
        if ex.is_zero(a, seed=seed) or ex.is_zero(c, seed=seed):
            return None
        rhs = ex.normalize(-b / a)
        if ex.is_zero(rhs, seed=seed):
            return None
        value = ex.normalize((sp.log(rhs) - d) / c)
        return Solution(value, (_chart_factor(rhs),))
    return None


def solve_triangular(equations, targets, seed: int = 0):
    """Solve a system by repeated single-unknown elimination.

    Returns (solutions: dict target -> Expr, chart: tuple, unsolved_equations).
    Targets are eliminated in the deterministic order equations allow.
    """
    eqs = [ex.normalize(e) for e in equations]
    remaining = set(targets)
    solutions: dict[str, sp.Expr] = {}
    chart: list = []
    progress = True
    while remaining and progress:
        progress = False
        for idx, eq in enumerate(eqs):
            if eq == 0:
                continue
            present = [t for t in targets if t in remaining and sp.Symbol(t) in eq.free_symbols]
            if len(present) != 1:
                continue
            sol = solve_for(eq, present[0], seed=seed)
            if sol is None:
                continue
            name = present[0]
            solutions[name] = sol.value
            chart.extend(sol.chart)
            remaining.discard(name)
            binding = {name: sol.value}
            eqs = [ex.substitute(e, binding) if e != 0 else e for e in eqs]
            eqs[idx] = ex.ZERO
            for k, v in list(solutions.items()):
                solutions[k] = ex.substitute(v, binding) if k != name else solutions[k]
            progress = True
            break
    unsolved = [e for e in eqs if e != 0]
    return solutions, tuple(chart), unsolved
