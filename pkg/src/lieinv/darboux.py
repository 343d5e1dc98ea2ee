"""Left-invariant vector fields and linear Darboux transition functions.

The group is charted by canonical coordinates of the second kind on the
adapted basis, polarization factors innermost and complement factors
outermost:  g = exp(h^1 v_1) ... exp(h^d v_d) exp(q^1 w_1) ... exp(q^c w_c).
The Maurer-Cartan coefficient matrix is then a product of matrix
exponentials of ad-operators, and the left-invariant fields are the columns
of its inverse.  Because the polarization is a subalgebra, the q-components
of every field depend on q alone, which is what makes the linear transition

    f_i = xi_i^a(q) (Lambda_a - p_a) + xi_i^A(0, q) Lambda_A

well defined.  The construction is accepted only after the Lie-Poisson
contract {f_i, f_j} = C_ij^k f_k is verified symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import sympy as sp

from . import expr as ex
from . import linalg as la
from .algebra import LieAlgebra, VectorField, restrict_algebra, structure_matrix
from .errors import ConstructionError, UnsupportedFieldError
from .polarize import AdaptedBasis, ParamCovector, _eigenvalues, _restrict_operator


def matrix_exp(A: la.ExprMatrix, scalar, seed: int = 0) -> la.ExprMatrix:
    """exp(scalar · A) for a square matrix over the rational function field.

    Splits into generalized eigenspaces; each block contributes
    exp(scalar·mu) times a finite nilpotent series.  Raises
    UnsupportedFieldError when an eigenvalue leaves the field.
    """
    n = A.rows
    scalar = ex.as_expr(scalar)
    if A.is_zero_matrix(seed=seed):
        return la.ExprMatrix.identity(n)
    eigs = _eigenvalues(A, seed=seed)
    basis_vectors = []
    blocks = []
    for mu, mult in eigs:
        shifted = A.add(la.ExprMatrix.identity(n).scale(-mu))
        power = shifted
        for _ in range(mult - 1):
            power = power.mul(shifted)
        space = la.nullspace(power, seed=seed)
        if len(space) != mult:
            raise ConstructionError("generalized eigenspace has unexpected dimension")
        R = _restrict_operator(A, space, seed=seed)
        k = len(space)
        N = R.add(la.ExprMatrix.identity(k).scale(-mu))
        term = la.ExprMatrix.identity(k)
        total = term
        for l in range(1, k):
            term = term.mul(N).scale(scalar * sp.Rational(1, l))
            if term.is_zero_matrix(seed=seed):
                break
            total = total.add(term)
        factor = ex.normalize(sp.exp(scalar * mu))
        blocks.append(total.scale(factor))
        basis_vectors.extend(space)
    if len(basis_vectors) != n:
        raise ConstructionError("eigenspaces do not fill the space")
    S = la.ExprMatrix.build([[basis_vectors[j][i] for j in range(n)] for i in range(n)])
    big = [[ex.ZERO] * n for _ in range(n)]
    offset = 0
    for block in blocks:
        k = block.rows
        for i in range(k):
            for j in range(k):
                big[offset + i][offset + j] = block.entries[i][j]
        offset += k
    E = la.ExprMatrix.build(big)
    return S.mul(E).mul(la.inverse(S, seed=seed))


@dataclass(frozen=True)
class LeftInvariantFrame:
    """Left-invariant fields on second-kind coordinates of an adapted basis."""

    algebra: LieAlgebra
    basis: AdaptedBasis
    adapted: LieAlgebra
    fields: tuple
    h_names: tuple[str, ...]
    q_names: tuple[str, ...]


def _exp_hardness(adapted: LieAlgebra, idx: int, seed: int = 0) -> bool:
    """True when exp of this ad-operator stays inside the tower."""
    try:
        _eigenvalues(adapted.ad_matrix(adapted.basis_vector(idx)), seed=seed)
        return True
    except UnsupportedFieldError:
        return False


def left_invariant_fields(L: LieAlgebra, basis: AdaptedBasis, seed: int = 0) -> LeftInvariantFrame:
    """Left-invariant fields for the ordered adapted basis.

    Polarization vectors whose ad-operator cannot be exponentiated in the
    tower are moved innermost (the innermost factor is never exponentiated);
    more than one such vector, or one in the complement, is unsupported.
    """
    d = len(basis.polar)
    c = len(basis.complement)
    n = d + c
    adapted = restrict_algebra(L, basis.ordered)
    hard = [i for i in range(n) if not _exp_hardness(adapted, i, seed=seed)]
    if any(i >= d for i in hard):
        bad = adapted.ad_matrix(adapted.basis_vector(hard[0]))
        _eigenvalues(bad, seed=seed)  # raises with the minimal polynomial
    if len(hard) > 1:
        raise UnsupportedFieldError(
            "more than one basis vector has non-rational ad-spectrum; "
            "second-kind coordinates leave the exp/log tower"
        )
    if hard:
        order = [hard[0]] + [i for i in range(d) if i != hard[0]]
        basis = basis.reorder_polar(order)
        adapted = restrict_algebra(L, basis.ordered)

    h_names = tuple(f"h{i + 1}" for i in range(d))
    q_names = tuple(f"q{i + 1}" for i in range(c))
    coords = h_names + q_names
    syms = [sp.Symbol(name) for name in coords]

    exps = {}
    for j in range(1, n):
        ad = adapted.ad_matrix(adapted.basis_vector(j))
        exps[j] = matrix_exp(ad, -syms[j], seed=seed)

    M_cols = []
    T = la.ExprMatrix.identity(n)
    # T_k = E_n ... E_{k+1}; build columns right to left.
    cols = [None] * n
    cols[n - 1] = tuple(T.entries[i][n - 1] for i in range(n))
    for k in range(n - 2, -1, -1):
        T = T.mul(exps[k + 1])
        cols[k] = tuple(T.entries[i][k] for i in range(n))
    M = la.ExprMatrix.build([[cols[k][i] for k in range(n)] for i in range(n)])
    Xi = la.inverse(M, seed=seed)
    fields = tuple(
        VectorField(coords, tuple(Xi.entries[k][i] for k in range(n))) for i in range(n)
    )
    return LeftInvariantFrame(L, basis, adapted, fields, h_names, q_names)


@dataclass(frozen=True)
class TransitionSet:
    """Darboux transition functions f_i(q, p, j) on a nondegenerate orbit."""

    algebra: LieAlgebra
    functions: tuple
    q_names: tuple[str, ...]
    p_names: tuple[str, ...]
    covector: ParamCovector
    frame: LeftInvariantFrame

    @property
    def params(self) -> tuple[str, ...]:
        return self.covector.params

    def poisson(self, f, g) -> sp.Expr:
        total = ex.ZERO
        for qn, pn in zip(self.q_names, self.p_names):
            qs, ps = sp.Symbol(qn), sp.Symbol(pn)
            total = total + sp.diff(f, qs) * sp.diff(g, ps) - sp.diff(f, ps) * sp.diff(g, qs)
        return ex.normalize(total)

    def p_coefficients(self) -> la.ExprMatrix:
        data = [
            [ex.differentiate(f, pn) for pn in self.p_names]
            for f in self.functions
        ]
        return la.ExprMatrix.build(data)


def canonical_poisson(f, g, q_names, p_names) -> sp.Expr:
    total = ex.ZERO
    for qn, pn in zip(q_names, p_names):
        qs, ps = sp.Symbol(qn), sp.Symbol(pn)
        total = total + sp.diff(f, qs) * sp.diff(g, ps) - sp.diff(f, ps) * sp.diff(g, qs)
    return ex.normalize(total)


def transition_functions(
    L: LieAlgebra,
    basis: AdaptedBasis,
    cov: ParamCovector,
    seed: int = 0,
    verify: bool = True,
) -> TransitionSet:
    """Linear-in-p Darboux transition functions in the original basis.

    The Lie-Poisson identity, base-point condition and p-rank condition are
    verified before returning; a failed identity raises ConstructionError.
    """
    frame = left_invariant_fields(L, basis, seed=seed)
    basis = frame.basis
    d, c = len(frame.h_names), len(frame.q_names)
    n = d + c
    p_names = tuple(f"p{i + 1}" for i in range(c))
    p_syms = [sp.Symbol(name) for name in p_names]
    h_zero = {name: ex.ZERO for name in frame.h_names}

    lambdas = [cov.pair(basis.ordered[A]) for A in range(n)]
    F = []
    for i in range(n):
        field = frame.fields[i]
        total = ex.ZERO
        for a in range(c):
            coeff = field.components[d + a]
            if coeff != 0:
                total = total + coeff * (lambdas[d + a] - p_syms[a])
        for A in range(d):
            coeff = field.components[A]
            if coeff != 0:
                total = total + ex.substitute(coeff, h_zero) * lambdas[A]
        F.append(ex.normalize(total))

    # F_i are components along the adapted basis: F = change · f.
    change = basis.change_matrix()
    f = la.inverse(change, seed=seed).mul_vector(F)
    functions = tuple(ex.normalize(v) for v in f)

    ts = TransitionSet(L, functions, frame.q_names, p_names, cov, frame)
    if verify:
        verify_transition(ts, seed=seed)
    return ts


def verify_transition(ts: TransitionSet, seed: int = 0) -> None:
    """Symbolic checks of the TransitionSet contract."""
    L = ts.algebra
    n = L.dim
    for i in range(n):
        for j in range(i + 1, n):
            lhs = ts.poisson(ts.functions[i], ts.functions[j])
            rhs = ex.ZERO
            for k in range(n):
                coeff = L.c[i][j][k]
                if coeff != 0:
                    rhs = rhs + coeff * ts.functions[k]
            if not ex.is_zero(lhs - rhs, seed=seed):
                raise ConstructionError(
                    f"Lie-Poisson identity fails for pair ({i + 1}, {j + 1}): "
                    f"{{f_i, f_j}} - C_ij^k f_k = {ex.normalize(lhs - rhs)}"
                )
    origin = {name: ex.ZERO for name in ts.q_names + ts.p_names}
    for i in range(n):
        base = ex.substitute(ts.functions[i], origin)
        if not ex.is_zero(base - ts.covector.entries[i], seed=seed):
            raise ConstructionError(f"base point condition fails at f_{i + 1}")
    if ts.q_names:
        if la.rank(ts.p_coefficients(), seed=seed) != len(ts.q_names):
            raise ConstructionError("p-coefficient matrix does not have full rank")
