"""Annihilators, chains of ideals and polarization construction.

A polarization of g relative to a covector λ is a subalgebra isotropic for
B_λ(X, Y) = <λ, [X, Y]> of dimension (dim g + dim g^λ)/2.  Solvable algebras
use the chain-of-ideals construction; semisimple ones the positive
eigenspaces of ad_K for the Killing-dual element K of λ; mixed algebras
split over the radical.  When the chain construction needs eigenvalues
outside the rational function field, a greedy isotropic-subalgebra growth
is attempted before giving up.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import sympy as sp

from . import expr as ex
from . import linalg as la
from .algebra import (
    LieAlgebra,
    center,
    derived_series,
    generic_rank,
    index,
    is_solvable,
    killing_form,
    radical,
    restrict_algebra,
    structure_matrix,
    subspace_bracket,
)
from .errors import (
    ConstructionError,
    DegenerateCovectorError,
    LieInvError,
    PolarizationNotFoundError,
    UnsupportedFieldError,
)


@dataclass(frozen=True)
class Subspace:
    """Subspace of coordinate space, held as canonical rref basis rows."""

    ambient: int
    basis: tuple

    @classmethod
    def from_vectors(cls, vectors, ambient: int, seed: int = 0) -> "Subspace":
        return cls(ambient, la.row_space_rref([tuple(v) for v in vectors], ambient, seed=seed))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v, seed: int = 0) -> bool:
        return la.in_span(list(self.basis), tuple(v), seed=seed)

    def equals(self, other: "Subspace", seed: int = 0) -> bool:
        return self.ambient == other.ambient and la.span_equal(
            list(self.basis), list(other.basis), self.ambient, seed=seed
        )

    def union(self, vectors, seed: int = 0) -> "Subspace":
        return Subspace.from_vectors(list(self.basis) + [tuple(v) for v in vectors], self.ambient, seed=seed)


@dataclass(frozen=True)
class ParamCovector:
    """Covector λ(j) with entries linear in orbit parameters j_1..j_r."""

    entries: tuple
    params: tuple[str, ...]

    @classmethod
    def build(cls, entries, params: Sequence[str]) -> "ParamCovector":
        entries = tuple(ex.normalize(ex.as_expr(v)) for v in entries)
        params = tuple(params)
        psyms = [sp.Symbol(p) for p in params]
        for v in entries:
            poly = sp.Poly(v, *psyms) if psyms else None
            if poly is not None and poly.total_degree() > 1:
                raise LieInvError(f"covector entry not linear in parameters: {v}")
            extra = set(ex.free_variables(v)) - set(params)
            if extra:
                raise LieInvError(f"covector entry uses undeclared symbols {sorted(extra)}: {v}")
        return cls(entries, params)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def coefficient_matrix(self) -> la.ExprMatrix:
        """a with a[i][α] = dλ_i/dj_α."""
        data = [
            [ex.differentiate(self.entries[i], p) for p in self.params]
            for i in range(self.dim)
        ]
        return la.ExprMatrix.build(data)

    def pair(self, vector) -> sp.Expr:
        """<λ, v> for a coordinate vector."""
        return ex.normalize(sp.Add(*[self.entries[i] * vector[i] for i in range(self.dim)]))

    def sample(self, rng: random.Random) -> tuple:
        point = ex.random_point(self.params, rng, positive=True)
        return tuple(ex.substitute(v, point) for v in self.entries)


def annihilator(L: LieAlgebra, cov: ParamCovector, seed: int = 0) -> Subspace:
    """Kernel of B_λ(X, ·), the stabilizer g^λ."""
    B = structure_matrix(L, cov.entries)
    vectors = la.nullspace(B.transpose(), seed=seed)
    return Subspace.from_vectors(vectors, L.dim, seed=seed)


def generic_coadjoint_rank(L: LieAlgebra, seed: int = 0) -> int:
    names = [f"X{i + 1}" for i in range(L.dim)]
    syms = [sp.Symbol(n) for n in names]
    M = structure_matrix(L, syms)
    return generic_rank(M, seed=seed)


def is_nondegenerate(L: LieAlgebra, cov: ParamCovector, seed: int = 0) -> bool:
    """Whether rank C(λ(j)) attains the generic maximum over the j-field."""
    target = generic_coadjoint_rank(L, seed=seed)
    return la.rank(structure_matrix(L, cov.entries), seed=seed) == target


def form_on_subspace(L: LieAlgebra, cov: ParamCovector, basis) -> la.ExprMatrix:
    """Matrix of B_λ restricted to the span of ``basis``."""
    B = structure_matrix(L, cov.entries)
    G = la.ExprMatrix.build([list(v) for v in basis])
    return G.mul(B).mul(G.transpose())


def is_isotropic(L: LieAlgebra, cov: ParamCovector, S: Subspace, seed: int = 0) -> bool:
    if S.dim == 0:
        return True
    return form_on_subspace(L, cov, S.basis).is_zero_matrix(seed=seed)


def is_subalgebra(L: LieAlgebra, S: Subspace, seed: int = 0) -> bool:
    for i in range(S.dim):
        for j in range(i + 1, S.dim):
            w = L.bracket(S.basis[i], S.basis[j])
            if not S.contains(w, seed=seed):
                return False
    return True


def is_ideal(L: LieAlgebra, S: Subspace, seed: int = 0) -> bool:
    for r in range(L.dim):
        e = L.basis_vector(r)
        for v in S.basis:
            if not S.contains(L.bracket(e, v), seed=seed):
                return False
    return True


def check_polarization(L: LieAlgebra, cov: ParamCovector, S: Subspace, seed: int = 0) -> None:
    """Raise unless S is isotropic, a subalgebra and of maximal dimension."""
    ann = annihilator(L, cov, seed=seed)
    target = sp.Rational(L.dim + ann.dim, 2)
    if not target.is_Integer:
        raise DegenerateCovectorError(
            f"dim g + dim g^λ = {L.dim + ann.dim} is odd; covector annihilator has wrong parity"
        )
    if S.dim != int(target):
        raise PolarizationNotFoundError(
            f"candidate has dimension {S.dim}, required {int(target)}"
        )
    if not is_isotropic(L, cov, S, seed=seed):
        raise ConstructionError("candidate polarization is not isotropic")
    if not is_subalgebra(L, S, seed=seed):
        raise ConstructionError("candidate polarization is not a subalgebra")


# -- chains of ideals ---------------------------------------------------------


@dataclass(frozen=True)
class IdealChain:
    """Full flag of ideals g_1 ⊂ ... ⊂ g_n with dim g_i = i."""

    algebra: LieAlgebra
    subspaces: tuple


def _matrix_flat(M: la.ExprMatrix) -> tuple:
    return tuple(v for row in M.entries for v in row)


def _independent_matrices(mats, d: int, seed: int = 0):
    """Reduce a list of d×d matrices to an rref basis of their span."""
    flats = [_matrix_flat(M) for M in mats if not M.is_zero_matrix(seed=seed)]
    rows = la.row_space_rref(flats, d * d, seed=seed)
    out = []
    for row in rows:
        out.append(la.ExprMatrix(d, d, tuple(tuple(row[i * d + j] for j in range(d)) for i in range(d))))
    return out


def _eigenvalues(A: la.ExprMatrix, seed: int = 0):
    """Eigenvalues inside the rational function field, sorted; raises
    UnsupportedFieldError for an irreducible factor of degree > 1."""
    poly = A.to_sympy().charpoly()
    t = poly.gens[0]
    chi = poly.as_expr()
    num, _ = sp.fraction(sp.together(chi))
    _, factors = sp.factor_list(num, t)
    eigs = {}
    blockers = []
    for base, mult in factors:
        poly = sp.Poly(base, t)
        if poly.degree() == 0:
            continue
        if poly.degree() == 1:
            a1, a0 = poly.all_coeffs()
            mu = ex.normalize(-a0 / a1)
            eigs[mu] = eigs.get(mu, 0) + mult
        else:
            blockers.append(base)
    if blockers:
        raise UnsupportedFieldError(
            "eigenvalue outside the rational function field",
            minimal_polynomial=str(blockers[0]),
        )
    return sorted(eigs.items(), key=lambda kv: sp.default_sort_key(kv[0]))


def _restrict_operator(A: la.ExprMatrix, basis, seed: int = 0) -> la.ExprMatrix:
    """Matrix of A on the span of ``basis`` in those coordinates."""
    Bm = la.ExprMatrix.build([list(v) for v in basis]).transpose()
    cols = []
    for v in basis:
        image = A.mul_vector(v)
        coeffs = la.solve(Bm, list(image), seed=seed)
        if coeffs is None:
            raise ConstructionError("operator does not preserve the expected subspace")
        cols.append(coeffs)
    k = len(basis)
    return la.ExprMatrix.build([[cols[j][i] for j in range(k)] for i in range(k)])


def _common_eigenspace_candidates(mats, d: int, seed: int = 0):
    """Yield bases of subspaces on which every matrix acts as a scalar.

    Depth-first over eigenvalue choices; deterministic order.  Raises
    UnsupportedFieldError when every branch needs an irrational eigenvalue.
    """
    span = _independent_matrices(mats, d, seed=seed)
    whole = [tuple(ex.ONE if i == j else ex.ZERO for j in range(d)) for i in range(d)]
    if not span:
        yield whole
        return

    comms = []
    for i in range(len(span)):
        for j in range(i + 1, len(span)):
            comms.append(span[i].mul(span[j]).add(span[j].mul(span[i]).scale(-1)))
    derived = _independent_matrices(comms, d, seed=seed)
    if len(derived) >= len(span):
        raise LieInvError("matrix algebra is not solvable; no common eigenvector")

    # Codimension-one ideal containing the derived span, plus one element z.
    ideal_flats = [_matrix_flat(M) for M in derived]
    ideal_mats = list(derived)
    z = None
    for A in span:
        flat = _matrix_flat(A)
        if la.in_span(ideal_flats, flat, seed=seed):
            continue
        if len(ideal_mats) < len(span) - 1:
            ideal_mats.append(A)
            ideal_flats = [tuple(r) for r in la.row_space_rref(ideal_flats + [flat], d * d, seed=seed)]
        else:
            z = A
            break
    if z is None:
        raise ConstructionError("failed to split off a complementary direction")

    blocked = None
    produced = False
    for W in _common_eigenspace_candidates(ideal_mats, d, seed=seed):
        try:
            R = _restrict_operator(z, W, seed=seed)
            eigs = _eigenvalues(R, seed=seed)
        except UnsupportedFieldError as err:
            blocked = err
            continue
        k = len(W)
        for mu, _ in eigs:
            shifted = R.add(la.ExprMatrix.identity(k).scale(-mu))
            kernel = la.nullspace(shifted, seed=seed)
            if not kernel:
                continue
            lifted = []
            for kv in kernel:
                vec = [ex.ZERO] * d
                for t_idx, c in enumerate(kv):
                    if c != 0:
                        vec = [ex.normalize(vec[p] + c * W[t_idx][p]) for p in range(d)]
                lifted.append(tuple(vec))
            basis = la.row_space_rref(lifted, d, seed=seed)
            if basis:
                produced = True
                yield list(basis)
    if not produced and blocked is not None:
        raise blocked


def ideal_chain(L: LieAlgebra, seed: int = 0) -> IdealChain:
    """Full flag of ideals built by refining the derived series with common
    eigenvectors of the quotient actions."""
    if not is_solvable(L):
        raise LieInvError("algebra is not solvable; no chain of ideals")
    series = derived_series(L)
    increasing = [s for s in reversed(series)]  # from 0 up to g
    chain = []
    lower: tuple = ()
    for upper in increasing[1:]:
        while len(lower) < len(upper):
            comp = []
            current = list(lower)
            for v in upper:
                if not la.in_span(current, v, seed=seed):
                    comp.append(tuple(v))
                    current = list(la.row_space_rref(current + [tuple(v)], L.dim, seed=seed))
            d = len(comp)
            stacked = la.ExprMatrix.build([list(c) for c in comp] + [list(v) for v in lower]).transpose()
            mats = []
            for r in range(L.dim):
                e = L.basis_vector(r)
                cols = []
                for c in comp:
                    w = L.bracket(e, c)
                    coeffs = la.solve(stacked, list(w), seed=seed)
                    if coeffs is None:
                        raise ConstructionError("bracket left the expected ideal")
                    cols.append(coeffs[:d])
                mats.append(la.ExprMatrix.build([[cols[j][i] for j in range(d)] for i in range(d)]))
            gen = _common_eigenspace_candidates(mats, d, seed=seed)
            basis = next(gen)
            lead = la.row_space_rref(basis, d, seed=seed)[0]
            vec = [ex.ZERO] * L.dim
            for t_idx, c in enumerate(lead):
                if c != 0:
                    vec = [ex.normalize(vec[p] + c * comp[t_idx][p]) for p in range(L.dim)]
            lower = la.row_space_rref(list(lower) + [tuple(vec)], L.dim, seed=seed)
            chain.append(Subspace(L.dim, tuple(lower)))
    return IdealChain(L, tuple(chain))


# -- polarization constructions ----------------------------------------------


def polarization_solvable(
    L: LieAlgebra, cov: ParamCovector, seed: int = 0, chain: IdealChain | None = None
) -> Subspace:
    """Sum over a full flag of ideals of the kernels of the restricted form."""
    if chain is None:
        chain = ideal_chain(L, seed=seed)
    vectors = []
    for sub in chain.subspaces:
        Bi = form_on_subspace(L, cov, sub.basis)
        for kv in la.nullspace(Bi, seed=seed):
            vec = [ex.ZERO] * L.dim
            for t_idx, c in enumerate(kv):
                if c != 0:
                    vec = [ex.normalize(vec[p] + c * sub.basis[t_idx][p]) for p in range(L.dim)]
            vectors.append(tuple(vec))
    P = Subspace.from_vectors(vectors, L.dim, seed=seed)
    check_polarization(L, cov, P, seed=seed)
    return P


def _positive_sign(value, params: Sequence[str], seed: int = 0) -> bool:
    """Sign of an eigenvalue on the chart where all parameters are positive."""
    names = ex.free_variables(value)
    if not names:
        return ex.as_expr(value) > 0
    rng = random.Random(seed)
    point = ex.random_point(names, rng, positive=True)
    return ex.eval_numeric(value, point) > 0


def polarization_semisimple(
    L: LieAlgebra, cov: ParamCovector, cartan: Subspace, seed: int = 0
) -> Subspace:
    """Cartan subalgebra plus the span of positive ad_K eigenvectors, where
    K is Killing-dual to the covector on the Cartan subalgebra."""
    K = killing_form(L)
    k = cartan.dim
    gram = la.ExprMatrix.build(
        [
            [
                ex.normalize(
                    sp.Add(
                        *[
                            cartan.basis[i][a] * K.entries[a][b] * cartan.basis[j][b]
                            for a in range(L.dim)
                            for b in range(L.dim)
                        ]
                    )
                )
                for j in range(k)
            ]
            for i in range(k)
        ]
    )
    rhs = [cov.pair(cartan.basis[i]) for i in range(k)]
    coeffs = la.solve(gram, rhs, seed=seed)
    if coeffs is None or la.rank(gram, seed=seed) < k:
        raise DegenerateCovectorError("Killing form is degenerate on the Cartan subalgebra")
    Kvec = [ex.ZERO] * L.dim
    for t_idx, c in enumerate(coeffs):
        if c != 0:
            Kvec = [ex.normalize(Kvec[p] + c * cartan.basis[t_idx][p]) for p in range(L.dim)]
    if all(v == 0 for v in Kvec):
        raise DegenerateCovectorError("covector pairs to the zero element of the Cartan subalgebra")
    adK = L.ad_matrix(tuple(Kvec))
    eigs = _eigenvalues(adK, seed=seed)
    vectors = [tuple(v) for v in cartan.basis]
    for mu, mult in eigs:
        if ex.is_zero(mu, seed=seed) or not _positive_sign(mu, cov.params, seed=seed):
            continue
        shifted = adK.add(la.ExprMatrix.identity(L.dim).scale(-mu))
        power = shifted
        for _ in range(mult - 1):
            power = power.mul(shifted)
        vectors.extend(la.nullspace(power, seed=seed))
    P = Subspace.from_vectors(vectors, L.dim, seed=seed)
    check_polarization(L, cov, P, seed=seed)
    return P


def span_intersection(a: Subspace, b: Subspace, seed: int = 0) -> Subspace:
    """Intersection of two subspaces."""
    if not a.basis or not b.basis:
        return Subspace(a.ambient, ())
    rows = []
    for i in range(a.ambient):
        rows.append([v[i] for v in a.basis] + [ex.normalize(-v[i]) for v in b.basis])
    M = la.ExprMatrix.build(rows)
    vectors = []
    for kv in la.nullspace(M, seed=seed):
        vec = [ex.ZERO] * a.ambient
        for t_idx in range(a.dim):
            if kv[t_idx] != 0:
                vec = [ex.normalize(vec[p] + kv[t_idx] * a.basis[t_idx][p]) for p in range(a.ambient)]
        vectors.append(tuple(vec))
    return Subspace.from_vectors(vectors, a.ambient, seed=seed)


def _isotropic_candidates(L: LieAlgebra, cov: ParamCovector, S: Subspace, seed: int = 0):
    """Vectors orthogonal to S under B_λ, as rref rows."""
    B = structure_matrix(L, cov.entries)
    rows = [list(B.mul_vector(v)) for v in S.basis]
    if not rows:
        return [tuple(L.basis_vector(i)) for i in range(L.dim)]
    M = la.ExprMatrix.build(rows)
    return la.nullspace(M, seed=seed)


def polarization_greedy(
    L: LieAlgebra,
    cov: ParamCovector,
    seed: int = 0,
    abelian_ideals: Iterable = (),
) -> Subspace:
    """Grow an isotropic subalgebra from the annihilator.

    Tries single normalizing vectors first, then whole abelian-ideal slices.
    Heuristic: completeness is not guaranteed; failure raises
    PolarizationNotFoundError.
    """
    ann = annihilator(L, cov, seed=seed)
    target2 = L.dim + ann.dim
    if target2 % 2:
        raise DegenerateCovectorError("odd dim g + dim g^λ")
    target = target2 // 2
    S = ann
    ideals = [Subspace.from_vectors(list(v), L.dim, seed=seed) for v in abelian_ideals]
    ideals.append(Subspace(L.dim, center(L)))
    series = derived_series(L)
    if len(series) >= 2:
        ideals.append(Subspace(L.dim, series[-2]))
    while S.dim < target:
        grown = False
        ortho = _isotropic_candidates(L, cov, S, seed=seed)
        for v in ortho:
            if S.contains(v, seed=seed):
                continue
            span_with = list(S.basis) + [tuple(v)]
            ok = True
            for u in S.basis:
                if not la.in_span(span_with, L.bracket(v, u), seed=seed):
                    ok = False
                    break
            if ok:
                S = S.union([v], seed=seed)
                grown = True
                break
        if not grown:
            ortho_space = Subspace.from_vectors(ortho, L.dim, seed=seed)
            for A in ideals:
                if A.dim == 0:
                    continue
                slice_ = span_intersection(A, ortho_space, seed=seed)
                if slice_.dim == 0:
                    continue
                S2 = S.union(slice_.basis, seed=seed)
                if S2.dim <= S.dim or S2.dim > target:
                    continue
                if is_subalgebra(L, S2, seed=seed) and is_isotropic(L, cov, S2, seed=seed):
                    S = S2
                    grown = True
                    break
        if not grown:
            raise PolarizationNotFoundError(
                f"greedy isotropic growth stalled at dimension {S.dim} (target {target})"
            )
    check_polarization(L, cov, S, seed=seed)
    return S


def _lift_vectors(vectors, basis, ambient: int):
    out = []
    for v in vectors:
        vec = [ex.ZERO] * ambient
        for t_idx, c in enumerate(v):
            if c != 0:
                vec = [ex.normalize(vec[p] + c * basis[t_idx][p]) for p in range(ambient)]
        out.append(tuple(vec))
    return out


def _restrict_covector(cov: ParamCovector, basis) -> ParamCovector:
    return ParamCovector.build([cov.pair(v) for v in basis], cov.params)


def _restrict_subspace_to(basis, S: Subspace, seed: int = 0):
    """Coordinates of S ∩ span(basis) in terms of ``basis`` rows."""
    Bm = la.ExprMatrix.build([list(v) for v in basis]).transpose()
    out = []
    for v in S.basis:
        coeffs = la.solve(Bm, list(v), seed=seed)
        if coeffs is not None:
            residual = Bm.mul_vector(coeffs)
            if all(ex.is_zero(residual[i] - v[i], seed=seed) for i in range(len(v))):
                out.append(tuple(coeffs))
    return out


def polarization(
    L: LieAlgebra,
    cov: ParamCovector,
    hints: dict | None = None,
    seed: int = 0,
    abelian_ideals: Iterable = (),
) -> Subspace:
    """Polarization dispatcher: solvable, semisimple, reductive or mixed.

    The solvable route falls back to greedy isotropic growth when the chain
    construction is blocked by irrational eigenvalues or does not reach the
    required dimension.
    """
    hints = hints or {}
    if L.dim == 0:
        return Subspace(0, ())
    if is_solvable(L):
        try:
            return polarization_solvable(L, cov, seed=seed)
        except (UnsupportedFieldError, PolarizationNotFoundError):
            return polarization_greedy(L, cov, seed=seed, abelian_ideals=abelian_ideals)
    rad = Subspace(L.dim, radical(L, seed=seed))
    if rad.dim == 0:
        cartan = hints.get("cartan")
        if cartan is None:
            raise LieInvError("semisimple polarization requires a 'cartan' hint")
        if not isinstance(cartan, Subspace):
            cartan = Subspace.from_vectors(cartan, L.dim, seed=seed)
        return polarization_semisimple(L, cov, cartan, seed=seed)
    Z = Subspace(L.dim, center(L))
    if rad.dim and Z.dim == rad.dim and rad.equals(Z, seed=seed):
        # reductive: center ⊕ semisimple derived algebra
        D = subspace_bracket(
            L,
            [L.basis_vector(i) for i in range(L.dim)],
            [L.basis_vector(i) for i in range(L.dim)],
        )
        sub = restrict_algebra(L, D)
        subcov = _restrict_covector(cov, D)
        subhints = dict(hints)
        if "cartan" in hints:
            cart = hints["cartan"]
            if not isinstance(cart, Subspace):
                cart = Subspace.from_vectors(cart, L.dim, seed=seed)
            subhints["cartan"] = Subspace.from_vectors(
                _restrict_subspace_to(D, cart, seed=seed), sub.dim, seed=seed
            )
        Psub = polarization(sub, subcov, hints=subhints, seed=seed)
        vectors = list(Z.basis) + _lift_vectors(Psub.basis, D, L.dim)
        P = Subspace.from_vectors(vectors, L.dim, seed=seed)
        check_polarization(L, cov, P, seed=seed)
        return P
    # mixed: split over the radical and its B_λ-orthogonal complement
    B = structure_matrix(L, cov.entries)
    rows = [list(B.mul_vector(v)) for v in rad.basis]
    perp_vectors = la.nullspace(la.ExprMatrix.build(rows), seed=seed)
    perp = Subspace.from_vectors(perp_vectors, L.dim, seed=seed)
    sub_perp = restrict_algebra(L, perp.basis)
    subhints = dict(hints)
    if "cartan" in hints:
        cart = hints["cartan"]
        if not isinstance(cart, Subspace):
            cart = Subspace.from_vectors(cart, L.dim, seed=seed)
        subhints["cartan"] = Subspace.from_vectors(
            _restrict_subspace_to(perp.basis, cart, seed=seed), sub_perp.dim, seed=seed
        )
    P_perp_sub = polarization(sub_perp, _restrict_covector(cov, perp.basis), hints=subhints, seed=seed)
    P_perp = Subspace.from_vectors(
        _lift_vectors(P_perp_sub.basis, perp.basis, L.dim), L.dim, seed=seed
    )
    sub_rad = restrict_algebra(L, rad.basis)
    P_rad_sub = polarization(sub_rad, _restrict_covector(cov, rad.basis), seed=seed)
    P_rad = Subspace.from_vectors(_lift_vectors(P_rad_sub.basis, rad.basis, L.dim), L.dim, seed=seed)
    for u in P_perp.basis:
        for v in P_rad.basis:
            if not P_rad.contains(L.bracket(u, v), seed=seed):
                raise PolarizationNotFoundError(
                    "radical polarization is not compatible: [P(R^perp), P(R)] leaves P(R)"
                )
    P = Subspace.from_vectors(list(P_perp.basis) + list(P_rad.basis), L.dim, seed=seed)
    check_polarization(L, cov, P, seed=seed)
    return P


# -- adapted basis ------------------------------------------------------------


@dataclass(frozen=True)
class AdaptedBasis:
    """Ordered basis (polarization vectors first, completion after).

    ``change`` rows are the adapted vectors in the original basis.
    """

    algebra: LieAlgebra
    polar: tuple
    complement: tuple

    @property
    def ordered(self) -> tuple:
        return self.polar + self.complement

    @property
    def dim(self) -> int:
        return len(self.polar) + len(self.complement)

    def change_matrix(self) -> la.ExprMatrix:
        return la.ExprMatrix.build([list(v) for v in self.ordered])

    def reorder_polar(self, order: Sequence[int]) -> "AdaptedBasis":
        return AdaptedBasis(self.algebra, tuple(self.polar[i] for i in order), self.complement)


def complete_basis(L: LieAlgebra, P: Subspace, seed: int = 0) -> AdaptedBasis:
    """Complete a polarization to a basis, greedily over the original basis."""
    polar = tuple(tuple(v) for v in P.basis)
    chosen = []
    current = list(polar)
    for i in range(L.dim):
        if len(current) == L.dim:
            break
        v = L.basis_vector(i)
        if not la.in_span(current, v, seed=seed):
            chosen.append(v)
            current = list(la.row_space_rref(current + [v], L.dim, seed=seed))
    basis = AdaptedBasis(L, polar, tuple(chosen))
    if basis.dim != L.dim:
        raise ConstructionError("basis completion failed")
    return basis


# -- covector parametrization --------------------------------------------------


def eq19_certificate(L: LieAlgebra, cov: ParamCovector, seed: int = 0) -> bool:
    """det X_μ^i(λ(j)) a_i^α != 0 — the orbit-parametrization condition."""
    ann = annihilator(L, cov, seed=seed)
    if ann.dim != len(cov.params):
        return False
    X = la.ExprMatrix.build([list(v) for v in ann.basis])
    a = cov.coefficient_matrix()
    product = X.mul(a)
    d = la.det(product)
    return not ex.is_zero(d, seed=seed)


def _pattern_subsets(positions, max_size: int = 2):
    yield ()
    for i, p in enumerate(positions):
        yield (p,)
    if max_size >= 2:
        for i in range(len(positions)):
            for j in range(i + 1, len(positions)):
                yield (positions[i], positions[j])


def _position_subsets(ann: la.ExprMatrix, pivots, n: int, ind: int, seed: int = 0, cap: int = 48):
    """Parameter-position sets: the annihilator pivot set first, then other
    index sets whose annihilator submatrix is invertible at the sample."""
    yield tuple(pivots)
    count = 0
    from itertools import combinations

    for subset in combinations(range(n), ind):
        if subset == tuple(pivots):
            continue
        sub = la.ExprMatrix.build([[ann.entries[r][c] for c in subset] for r in range(ind)])
        if la.rank(sub, seed=seed) == ind:
            yield subset
            count += 1
            if count >= cap:
                return


def covector_candidates(L: LieAlgebra, seed: int = 0, attempts: int = 4):
    """Yield nondegenerate, certificate-passing linear parametrizations λ(j).

    Parameters are placed on annihilator pivot coordinates found at a random
    nondegenerate sample (with a bounded set of 0/1 background patterns),
    then on alternative invertible position sets with zero background.
    """
    target = generic_coadjoint_rank(L, seed=seed)
    ind = L.dim - target
    params = [f"j{i + 1}" for i in range(ind)]
    rng = random.Random(seed)
    seen = set()

    def attempt(entries):
        cov = ParamCovector.build(entries, params)
        try:
            if not is_nondegenerate(L, cov, seed=seed):
                return None
            if not eq19_certificate(L, cov, seed=seed):
                return None
        except LieInvError:
            return None
        return cov

    for round_ in range(max(attempts, 1)):
        sample = None
        for _ in range(20):
            candidate = tuple(
                sp.Rational(ex.random_rational(rng, positive=False)) for _ in range(L.dim)
            )
            if la.rank(structure_matrix(L, candidate), seed=seed) == target:
                sample = candidate
                break
        if sample is None:
            continue
        ann_rows = la.nullspace(structure_matrix(L, sample).transpose(), seed=seed)
        if len(ann_rows) != ind:
            continue
        ann = la.ExprMatrix.build([list(v) for v in ann_rows])
        _, pivots = la.rref(ann, seed=seed)
        positions_iter = _position_subsets(ann, pivots, L.dim, ind, seed=seed)
        for positions in positions_iter:
            rest = [i for i in range(L.dim) if i not in positions]
            patterns = _pattern_subsets(rest) if positions == tuple(pivots) else iter([()])
            for pattern in patterns:
                key = (positions, pattern)
                if key in seen:
                    continue
                seen.add(key)
                entries = []
                for i in range(L.dim):
                    if i in positions:
                        entries.append(sp.Symbol(params[positions.index(i)]))
                    elif i in pattern:
                        entries.append(ex.ONE)
                    else:
                        entries.append(ex.ZERO)
                cov = attempt(entries)
                if cov is not None:
                    yield cov


def parametrize_covector(L: LieAlgebra, seed: int = 0, attempts: int = 10) -> ParamCovector:
    """First valid linear orbit parametrization; raises after exhaustion."""
    for cov in covector_candidates(L, seed=seed, attempts=attempts):
        return cov
    raise LieInvError("could not parametrize a nondegenerate covector after seeded retries")
