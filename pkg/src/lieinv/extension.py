"""Semidirect-sum extension g ⊕ V* whose coadjoint Casimirs encode the
invariants of a representation.

Brackets of the extension: [e_A, e_B] = C_AB^C e_C on the base,
[e_A, E^a] = -t_A{}^a_b E^b on the abelian ideal V*, [E^a, E^b] = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as ex
from .algebra import LieAlgebra, Representation, check_representation, coordinate_names
from .errors import LieInvError


@dataclass(frozen=True)
class ExtendedAlgebra:
    """Extension of ``base`` by the dual of the representation space.

    Coordinates on the dual of the result split as: indices 0..n-1 carry the
    base coalgebra coordinates X_A, indices n..n+m-1 carry the
    representation-space coordinates x^a (``rep_coordinate(a)`` maps between
    them).
    """

    base: LieAlgebra
    rep: Representation
    result: LieAlgebra

    @property
    def base_dim(self) -> int:
        return self.base.dim

    @property
    def rep_dim(self) -> int:
        return self.rep.dimV

    def rep_coordinate(self, a: int) -> int:
        """Index in the extended algebra of the a-th representation direction."""
        return self.base.dim + a

    def coordinate_roles(self) -> tuple[str, ...]:
        """'algebra' or 'space' per extended coordinate."""
        return tuple(
            "algebra" if i < self.base.dim else "space" for i in range(self.result.dim)
        )


def extend(L: LieAlgebra, T: Representation, validate: bool = True) -> ExtendedAlgebra:
    """Build the extended Lie algebra g ⊕ V* for a representation T of g."""
    if T.algebra is not L and T.algebra != L:
        raise LieInvError("representation is not over the given algebra")
    if validate:
        report = check_representation(T)
        if not report.valid:
            raise LieInvError(f"representation invalid: {report}")
    n, m = L.dim, T.dimV
    dim = n + m
    brackets = {}
    for a in range(n):
        for b in range(a + 1, n):
            comps = {k: L.c[a][b][k] for k in range(n) if L.c[a][b][k] != 0}
            if comps:
                brackets[(a, b)] = comps
    sign = 1 if T.convention == "plus" else -1
    for A in range(n):
        for a in range(m):
            comps = {}
            for b in range(m):
                entry = T.matrices[A][a][b]
                if entry != 0:
                    comps[n + b] = ex.normalize(-sign * entry)
            if comps:
                brackets[(A, n + a)] = comps
    labels = coordinate_names("e", dim)
    result = LieAlgebra.from_brackets(dim, brackets, labels)
    return ExtendedAlgebra(L, T, result)
