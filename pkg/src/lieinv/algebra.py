"""Lie algebras, representations, infinitesimal generators and the
invariance-PDE verification oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import sympy as sp

from . import expr as ex
from . import linalg as la
from .errors import LieInvError

#: Homomorphism convention: 'plus' checks [T(a), T(b)] = +C_ab^c T(c)
#: (published tables sometimes need 'minus').
CONVENTIONS = ("plus", "minus")


def coordinate_names(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i + 1}" for i in range(n))


@dataclass(frozen=True)
class LieAlgebra:
    """Finite-dimensional Lie algebra given by structure constants.

    ``c[a][b][k]`` is the coefficient of e_k in [e_a, e_b] (0-based).
    Entries are exact rationals or expressions in parameters.
    """

    dim: int
    c: tuple
    labels: tuple[str, ...] = ()

    @classmethod
    def from_brackets(cls, dim: int, brackets: Mapping, labels: Sequence[str] = ()) -> "LieAlgebra":
        """Build from a sparse map {(a, b): {k: coeff}} with a < b (0-based);
        antisymmetric counterparts are filled in."""
        c = [[[ex.ZERO] * dim for _ in range(dim)] for _ in range(dim)]
        for (a, b), comps in brackets.items():
            if not (0 <= a < dim and 0 <= b < dim):
                raise LieInvError(f"bracket index out of range: {(a + 1, b + 1)}")
            if a == b:
                raise LieInvError(f"bracket of a vector with itself: e{a + 1}")
            for k, coeff in comps.items():
                if not 0 <= k < dim:
                    raise LieInvError(f"bracket target out of range: e{k + 1}")
                value = ex.normalize(ex.as_expr(coeff))
                c[a][b][k] = ex.normalize(c[a][b][k] + value)
                c[b][a][k] = ex.normalize(c[b][a][k] - value)
        frozen = tuple(tuple(tuple(row) for row in plane) for plane in c)
        if not labels:
            labels = coordinate_names("e", dim)
        return cls(dim, frozen, tuple(labels))

    def bracket(self, u: Sequence, v: Sequence) -> tuple:
        """Coordinates of [u, v] for coordinate vectors u, v."""
        out = [ex.ZERO] * self.dim
        for a in range(self.dim):
            if u[a] == 0:
                continue
            for b in range(self.dim):
                if v[b] == 0:
                    continue
                for k in range(self.dim):
                    coeff = self.c[a][b][k]
                    if coeff != 0:
                        out[k] = out[k] + u[a] * v[b] * coeff
        return tuple(ex.normalize(t) for t in out)

    def basis_vector(self, i: int) -> tuple:
        return tuple(ex.ONE if j == i else ex.ZERO for j in range(self.dim))

    def ad_matrix(self, v: Sequence) -> la.ExprMatrix:
        """Matrix of ad_v in the defining basis: columns are [v, e_b]."""
        cols = [self.bracket(v, self.basis_vector(b)) for b in range(self.dim)]
        return la.ExprMatrix.build([[cols[b][a] for b in range(self.dim)] for a in range(self.dim)])


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple = ()

    def __str__(self):
        if self.valid:
            return "valid"
        lines = [f"{len(self.violations)} violation(s):"]
        lines += [f"  {v}" for v in self.violations[:20]]
        return "\n".join(lines)


def check_lie_algebra(L: LieAlgebra, seed: int = 0) -> ValidationReport:
    """Antisymmetry and Jacobi identity, reported per violating triple."""
    bad = []
    n = L.dim
    for a in range(n):
        for b in range(n):
            for k in range(n):
                s = ex.normalize(L.c[a][b][k] + L.c[b][a][k])
                if not ex.is_zero(s, seed=seed):
                    bad.append(f"antisymmetry fails at C[{a + 1}][{b + 1}]^{k + 1}")
    for a in range(n):
        for b in range(a + 1, n):
            for d in range(b + 1, n):
                lhs = [ex.ZERO] * n
                for x, y, z in ((a, b, d), (b, d, a), (d, a, b)):
                    inner = L.bracket(L.basis_vector(x), L.basis_vector(y))
                    term = L.bracket(inner, L.basis_vector(z))
                    lhs = [lhs[k] + term[k] for k in range(n)]
                for k in range(n):
                    if not ex.is_zero(lhs[k], seed=seed):
                        bad.append(f"Jacobi fails for (e{a + 1}, e{b + 1}, e{d + 1}) on e{k + 1}")
                        break
    return ValidationReport(not bad, tuple(bad))


@dataclass(frozen=True)
class Representation:
    """Matrices t_A acting on a dimV-dimensional space.

    ``matrices[A][a][b]`` is the (row a, col b) entry of T(e_A); the induced
    generator on functions is -t_A{}^a_b x^b d/dx^a.
    """

    algebra: LieAlgebra
    dimV: int
    matrices: tuple
    convention: str = "plus"

    @classmethod
    def build(cls, algebra: LieAlgebra, matrices, convention: str = "plus") -> "Representation":
        if convention not in CONVENTIONS:
            raise LieInvError(f"unknown convention {convention!r}")
        if len(matrices) != algebra.dim:
            raise LieInvError("one matrix per basis vector required")
        dimV = len(matrices[0])
        mats = []
        for m in matrices:
            if len(m) != dimV or any(len(row) != dimV for row in m):
                raise LieInvError("representation matrices must be square of equal size")
            mats.append(tuple(tuple(ex.normalize(ex.as_expr(v)) for v in row) for row in m))
        return cls(algebra, dimV, tuple(mats), convention)

    def matrix(self, A: int) -> la.ExprMatrix:
        return la.ExprMatrix(self.dimV, self.dimV, self.matrices[A])


def check_representation(T: Representation, seed: int = 0) -> ValidationReport:
    """Homomorphism property [T(e_a), T(e_b)] = ±C_ab^k T(e_k)."""
    sign = 1 if T.convention == "plus" else -1
    bad = []
    n = T.algebra.dim
    for a in range(n):
        Ma = T.matrix(a)
        for b in range(a + 1, n):
            Mb = T.matrix(b)
            comm = Ma.mul(Mb).add(Mb.mul(Ma).scale(-1))
            expected = la.ExprMatrix.zeros(T.dimV, T.dimV)
            for k in range(n):
                coeff = T.algebra.c[a][b][k]
                if coeff != 0:
                    expected = expected.add(T.matrix(k).scale(sign * coeff))
            if not comm.add(expected.scale(-1)).is_zero_matrix(seed=seed):
                bad.append(f"homomorphism fails for pair (e{a + 1}, e{b + 1})")
    return ValidationReport(not bad, tuple(bad))


@dataclass(frozen=True)
class VectorField:
    """First-order differential operator sum_i components[i] d/d coords[i]."""

    coords: tuple[str, ...]
    components: tuple

    def apply(self, J) -> sp.Expr:
        J = ex.as_expr(J)
        total = ex.ZERO
        for name, comp in zip(self.coords, self.components):
            if comp == 0:
                continue
            total = total + comp * sp.diff(J, sp.Symbol(name))
        return ex.normalize(total)

    def commutator(self, other: "VectorField") -> "VectorField":
        if self.coords != other.coords:
            raise LieInvError("vector fields on different coordinates")
        comps = []
        for k, name in enumerate(self.coords):
            comps.append(ex.normalize(self.apply(other.components[k]) - other.apply(self.components[k])))
        return VectorField(self.coords, tuple(comps))

    def is_zero(self, seed: int = 0) -> bool:
        return all(ex.is_zero(c, seed=seed) for c in self.components)


def generators(T: Representation, prefix: str = "x") -> list[VectorField]:
    """Infinitesimal generators -t_A{}^a_b x^b d/dx^a on V."""
    coords = coordinate_names(prefix, T.dimV)
    syms = [sp.Symbol(n) for n in coords]
    fields = []
    for A in range(T.algebra.dim):
        comps = []
        for a in range(T.dimV):
            total = ex.ZERO
            for b in range(T.dimV):
                entry = T.matrices[A][a][b]
                if entry != 0:
                    total = total - entry * syms[b]
            comps.append(ex.normalize(total))
        fields.append(VectorField(coords, tuple(comps)))
    return fields


def generator_matrix(T: Representation, prefix: str = "x") -> la.ExprMatrix:
    """dimG × dimV matrix of generator components t^a_A(x) = -t_A{}^a_b x^b."""
    fields = generators(T, prefix=prefix)
    return la.ExprMatrix.build([list(f.components) for f in fields])


def generic_rank(M: la.ExprMatrix, seed: int = 0, samples: int = 3) -> int:
    """Generic rank of a matrix of expressions in its free variables.

    Samples exact rational points, takes the maximal exact rank, then
    certifies it by exhibiting a symbolically nonzero minor.
    """
    names = sorted({s for row in M.entries for v in row for s in ex.free_variables(v)})
    rng = random.Random(seed)
    best_rank, best_point = 0, None
    for _ in range(max(samples, 1)):
        point = ex.random_point(names, rng, positive=False)
        sampled = M.subs(point)
        r = la.rank(sampled)
        if r > best_rank:
            best_rank, best_point = r, point
    if best_rank == 0:
        return 0
    # Certify via a nonzero minor located by pivoting at the best sample.
    sampled = M.subs(best_point)
    _, piv_cols = la.rref(sampled, seed=seed)
    _, piv_rows = la.rref(sampled.transpose(), seed=seed)
    rows = list(piv_rows[:best_rank])
    cols = list(piv_cols[:best_rank])
    sub = la.ExprMatrix.build([[M.entries[i][j] for j in cols] for i in rows])
    minor = la.det(sub)
    if ex.is_zero(minor, seed=seed):
        raise LieInvError("generic rank certification failed: sampled minor is symbolically zero")
    return best_rank


def invariant_count(T: Representation, seed: int = 0) -> int:
    """dimV minus the generic rank of the generator component matrix."""
    return T.dimV - generic_rank(generator_matrix(T), seed=seed)


def adjoint(L: LieAlgebra) -> Representation:
    mats = [L.ad_matrix(L.basis_vector(a)).entries for a in range(L.dim)]
    return Representation.build(L, mats)


def coadjoint(L: LieAlgebra) -> Representation:
    """Coadjoint representation: matrices -(ad_A)^T, generators
    C_ij^k X_k d/dX_j."""
    mats = []
    for A in range(L.dim):
        ad = L.ad_matrix(L.basis_vector(A))
        mats.append(ad.transpose().scale(-1).entries)
    return Representation.build(L, mats)


def dual_representation(T: Representation) -> Representation:
    mats = [T.matrix(A).transpose().scale(-1).entries for A in range(T.algebra.dim)]
    return Representation.build(T.algebra, mats, convention=T.convention)


def trivial_representation(L: LieAlgebra, dimV: int) -> Representation:
    zero = [[0] * dimV for _ in range(dimV)]
    return Representation.build(L, [zero for _ in range(L.dim)])


def index(L: LieAlgebra, seed: int = 0) -> int:
    """dim g minus the generic rank of C_ij(X) = C_ij^k X_k."""
    names = coordinate_names("X", L.dim)
    syms = [sp.Symbol(n) for n in names]
    data = [
        [ex.normalize(sp.Add(*[L.c[i][j][k] * syms[k] for k in range(L.dim)])) for j in range(L.dim)]
        for i in range(L.dim)
    ]
    return L.dim - generic_rank(la.ExprMatrix.build(data), seed=seed)


def structure_matrix(L: LieAlgebra, covector: Sequence) -> la.ExprMatrix:
    """C_ij(λ) = C_ij^k λ_k for a concrete covector."""
    data = [
        [
            ex.normalize(sp.Add(*[L.c[i][j][k] * ex.as_expr(covector[k]) for k in range(L.dim)]))
            for j in range(L.dim)
        ]
        for i in range(L.dim)
    ]
    return la.ExprMatrix.build(data)


# -- structural queries -----------------------------------------------------


def subspace_bracket(L: LieAlgebra, basis_a, basis_b):
    """Spanning vectors of [span(basis_a), span(basis_b)]."""
    products = []
    for u in basis_a:
        for v in basis_b:
            w = L.bracket(u, v)
            if any(c != 0 for c in w):
                products.append(w)
    return la.row_space_rref(products, L.dim)


def derived_series(L: LieAlgebra):
    """g ⊇ [g,g] ⊇ [[g,g],[g,g]] ⊇ ... down to the zero term."""
    series = [tuple(L.basis_vector(i) for i in range(L.dim))]
    while series[-1]:
        nxt = subspace_bracket(L, series[-1], series[-1])
        if len(nxt) == len(series[-1]):
            break
        series.append(nxt)
    return series


def is_solvable(L: LieAlgebra) -> bool:
    return not derived_series(L)[-1]


def center(L: LieAlgebra):
    """Basis of the center as rref rows."""
    rows = []
    for b in range(L.dim):
        block = [[L.c[a][b][k] for a in range(L.dim)] for k in range(L.dim)]
        rows.extend(block)
    M = la.ExprMatrix.build(rows) if rows else la.ExprMatrix.zeros(0, L.dim)
    return la.row_space_rref(la.nullspace(M), L.dim)


def killing_form(L: LieAlgebra) -> la.ExprMatrix:
    ads = [L.ad_matrix(L.basis_vector(i)) for i in range(L.dim)]
    data = []
    for i in range(L.dim):
        row = []
        for j in range(L.dim):
            prod = ads[i].mul(ads[j])
            row.append(ex.normalize(sp.Add(*[prod.entries[k][k] for k in range(L.dim)])))
        data.append(row)
    return la.ExprMatrix.build(data)


def radical(L: LieAlgebra, seed: int = 0):
    """Radical via Cartan's criterion: {X : Killing(X, [g,g]) = 0}."""
    derived = subspace_bracket(
        L,
        [L.basis_vector(i) for i in range(L.dim)],
        [L.basis_vector(i) for i in range(L.dim)],
    )
    K = killing_form(L)
    rows = []
    for w in derived:
        Kw = K.mul_vector(w)
        rows.append(list(Kw))
    if not rows:
        return tuple(L.basis_vector(i) for i in range(L.dim))
    M = la.ExprMatrix.build(rows)
    return la.row_space_rref(la.nullspace(M), L.dim)


def is_semisimple(L: LieAlgebra, seed: int = 0) -> bool:
    return not radical(L, seed=seed) if L.dim else False


def restrict_algebra(L: LieAlgebra, basis):
    """Structure constants of a subalgebra in the given basis.

    Raises if the span is not closed under the bracket.
    """
    basis = [tuple(v) for v in basis]
    m = len(basis)
    B = la.ExprMatrix.build([list(v) for v in basis])
    c = [[[ex.ZERO] * m for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            w = L.bracket(basis[i], basis[j])
            coeffs = la.solve(B.transpose(), list(w))
            if coeffs is None:
                raise LieInvError("span is not closed under the bracket")
            for k in range(m):
                c[i][j][k] = coeffs[k]
    frozen = tuple(tuple(tuple(row) for row in plane) for plane in c)
    return LieAlgebra(m, frozen, coordinate_names("s", m))


# -- invariance oracle -------------------------------------------------------


@dataclass(frozen=True)
class InvarianceVerdict:
    """Outcome of verify_invariant: 'symbolic', 'numeric' or 'refuted'."""

    status: str
    residuals: tuple = ()
    witness: dict | None = None
    max_abs_residual: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status in ("symbolic", "numeric")


def verify_invariant(
    T: Representation,
    J,
    seed: int = 0,
    probes: int = 100,
    tol: float = 1e-9,
    prefix: str = "x",
) -> InvarianceVerdict:
    """Check t_A J = 0 for every generator of ``T``.

    Symbolic pass when every residual normalizes to zero; otherwise seeded
    numeric probing at ``probes`` points decides numeric pass or refutation
    (with a witness point).
    """
    J = ex.normalize(J)
    fields = generators(T, prefix=prefix)
    residuals = tuple(f.apply(J) for f in fields)
    if all(r == 0 for r in residuals):
        return InvarianceVerdict("symbolic", residuals)
    names = set(ex.free_variables(J))
    for r in residuals:
        names.update(ex.free_variables(r))
    rng = random.Random(seed)
    worst = 0.0
    checked = 0
    attempts = 0
    while checked < probes and attempts < probes * 5:
        attempts += 1
        point = ex.random_point(names, rng)
        try:
            values = [ex.eval_numeric(r, point) for r in residuals]
        except Exception:
            continue
        checked += 1
        peak = max((abs(v) for v in values), default=0.0)
        worst = max(worst, peak)
        if peak > tol:
            return InvarianceVerdict("refuted", residuals, witness=point, max_abs_residual=peak)
    if checked == 0:
        return InvarianceVerdict("refuted", residuals, witness=None, max_abs_residual=float("inf"))
    return InvarianceVerdict("numeric", residuals, max_abs_residual=worst)
