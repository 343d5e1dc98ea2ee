"""Exact linear algebra over the expression field.

Elimination is division-based with every pivot decision routed through the
semantic zero test, so rank, nullspace and solving work uniformly for
matrices whose entries are rational functions of parameters (and formal
exp/log atoms).  A pivot the zero test cannot decide raises
PivotUndecidableError naming the offending entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from . import expr as ex
from .errors import PivotUndecidableError


@dataclass(frozen=True)
class ExprMatrix:
    """Immutable matrix with expression entries."""

    rows: int
    cols: int
    entries: tuple

    @classmethod
    def build(cls, data) -> "ExprMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        norm = tuple(tuple(ex.normalize(v) for v in row) for row in data)
        for row in norm:
            if len(row) != cols:
                raise ValueError("ragged matrix data")
        return cls(rows, cols, norm)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExprMatrix":
        return cls(rows, cols, tuple(tuple(ex.ZERO for _ in range(cols)) for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "ExprMatrix":
        return cls(n, n, tuple(tuple(ex.ONE if i == j else ex.ZERO for j in range(n)) for i in range(n)))

    def __getitem__(self, key):
        i, j = key
        return self.entries[i][j]

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def col(self, j: int) -> tuple:
        return tuple(self.entries[i][j] for i in range(self.rows))

    def transpose(self) -> "ExprMatrix":
        return ExprMatrix(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else ())

    def mul(self, other: "ExprMatrix") -> "ExprMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        data = [
            [
                ex.normalize(sp.Add(*[self.entries[i][k] * other.entries[k][j] for k in range(self.cols)]))
                for j in range(other.cols)
            ]
            for i in range(self.rows)
        ]
        return ExprMatrix(self.rows, other.cols, tuple(tuple(r) for r in data))

    def mul_vector(self, v) -> tuple:
        if self.cols != len(v):
            raise ValueError("dimension mismatch")
        return tuple(
            ex.normalize(sp.Add(*[self.entries[i][k] * v[k] for k in range(self.cols)]))
            for i in range(self.rows)
        )

    def add(self, other: "ExprMatrix") -> "ExprMatrix":
        data = [
            [ex.normalize(self.entries[i][j] + other.entries[i][j]) for j in range(self.cols)]
            for i in range(self.rows)
        ]
        return ExprMatrix(self.rows, self.cols, tuple(tuple(r) for r in data))

    def scale(self, c) -> "ExprMatrix":
        c = ex.as_expr(c)
        data = [[ex.normalize(c * v) for v in row] for row in self.entries]
        return ExprMatrix(self.rows, self.cols, tuple(tuple(r) for r in data))

    def to_sympy(self) -> sp.Matrix:
        return sp.Matrix(self.rows, self.cols, lambda i, j: self.entries[i][j])

    def subs(self, bindings) -> "ExprMatrix":
        return ExprMatrix.build([[ex.substitute(v, bindings) for v in row] for row in self.entries])

    def is_zero_matrix(self, seed: int = 0) -> bool:
        return all(ex.is_zero(v, seed=seed) for row in self.entries for v in row)


def _select_pivot(work, row0: int, col: int, seed: int):
    """Index of a certified-nonzero entry in column ``col`` below ``row0``.

    Prefers the structurally smallest nonzero entry; raises
    PivotUndecidableError if a candidate cannot be decided.
    """
    candidates = []
    for i in range(row0, len(work)):
        entry = work[i][col]
        if entry == 0:
            continue
        try:
            verdict = ex.zero_verdict(entry, seed=seed)
        except PivotUndecidableError:
            raise PivotUndecidableError(entry, i, col)
        if not verdict.is_zero:
            candidates.append((ex.node_count(entry), i))
        elif not verdict.probabilistic:
            continue
    if not candidates:
        return None
    return min(candidates)[1]


def rref(M: ExprMatrix, seed: int = 0):
    """Reduced row echelon form with exact pivoting.

    Returns ``(R, pivot_columns)``.
    """
    work = [list(row) for row in M.entries]
    pivots = []
    r = 0
    for c in range(M.cols):
        if r >= M.rows:
            break
        i = _select_pivot(work, r, c, seed)
        if i is None:
            for k in range(r, M.rows):
                work[k][c] = ex.ZERO
            continue
        work[r], work[i] = work[i], work[r]
        inv = ex.normalize(1 / work[r][c])
        work[r] = [ex.normalize(v * inv) for v in work[r]]
        for k in range(M.rows):
            if k == r:
                continue
            factor = work[k][c]
            if factor == 0:
                continue
            work[k] = [ex.normalize(work[k][j] - factor * work[r][j]) for j in range(M.cols)]
        pivots.append(c)
        r += 1
    return ExprMatrix(M.rows, M.cols, tuple(tuple(row) for row in work)), tuple(pivots)


def rank(M: ExprMatrix, seed: int = 0) -> int:
    _, pivots = rref(M, seed=seed)
    return len(pivots)


def nullspace(M: ExprMatrix, seed: int = 0) -> list[tuple]:
    """Basis of the right nullspace; vectors satisfy M·v = 0 exactly."""
    R, pivots = rref(M, seed=seed)
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [ex.ZERO] * M.cols
        v[f] = ex.ONE
        for r, c in enumerate(pivots):
            v[c] = ex.normalize(-R.entries[r][f])
        basis.append(tuple(v))
    return basis


def solve(M: ExprMatrix, rhs, seed: int = 0):
    """One exact solution of M·x = rhs, or None if inconsistent."""
    aug = ExprMatrix.build([list(M.row(i)) + [rhs[i]] for i in range(M.rows)])
    R, pivots = rref(aug, seed=seed)
    if M.cols in pivots:
        return None
    x = [ex.ZERO] * M.cols
    for r, c in enumerate(pivots):
        x[c] = R.entries[r][M.cols]
    return tuple(x)


def inverse(M: ExprMatrix, seed: int = 0) -> ExprMatrix:
    if M.rows != M.cols:
        raise ValueError("inverse of a non-square matrix")
    aug = ExprMatrix.build([list(M.row(i)) + list(ExprMatrix.identity(M.rows).row(i)) for i in range(M.rows)])
    R, pivots = rref(aug, seed=seed)
    if tuple(pivots) != tuple(range(M.rows)):
        raise ValueError("matrix is singular")
    data = tuple(tuple(R.entries[i][M.cols + j] for j in range(M.cols)) for i in range(M.rows))
    return ExprMatrix(M.rows, M.cols, data)


def det(M: ExprMatrix) -> sp.Expr:
    """Exact determinant (Berkowitz, division-free)."""
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    return ex.normalize(M.to_sympy().det(method="berkowitz"))


def row_space_rref(vectors, ambient: int, seed: int = 0):
    """Canonical (rref) basis of the span of coordinate ``vectors``."""
    if not vectors:
        return ()
    M = ExprMatrix.build([list(v) for v in vectors])
    if M.cols != ambient:
        raise ValueError("vector length mismatch")
    R, pivots = rref(M, seed=seed)
    return tuple(R.row(i) for i in range(len(pivots)))


def in_span(vectors, v, seed: int = 0) -> bool:
    """Whether ``v`` lies in the span of ``vectors``."""
    if not vectors:
        return all(ex.is_zero(c, seed=seed) for c in v)
    base = row_space_rref(vectors, len(v), seed=seed)
    extended = row_space_rref(list(base) + [tuple(v)], len(v), seed=seed)
    return len(extended) == len(base)


def span_equal(a, b, ambient: int, seed: int = 0) -> bool:
    """Subspace equality via comparison of canonical rref bases."""
    ra = row_space_rref(a, ambient, seed=seed)
    rb = row_space_rref(b, ambient, seed=seed)
    if len(ra) != len(rb):
        return False
    return all(ex.is_zero(x - y, seed=seed) for va, vb in zip(ra, rb) for x, y in zip(va, vb))
