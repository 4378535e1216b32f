"""Fully-connected storage (one database per pair of messages), K >= 4.

Every database returns a single weighted 2-sum. The K-1 holders of the
desired message each contribute a different desired symbol; every undesired
message contributes the same symbol at all of its holders. That gives
C(K,2) equations in 2K-2 unknowns, rate (K-1)/C(K,2) = 2/K.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..analysis import is_fully_connected
from ..errors import DecodabilityError, DomainError, UnsupportedStructureError
from ..gf import FieldSpec, GfMatrix, mat_rank, next_prime_above
from ..storage import StorageSystem, databases_containing
from .base import (
    UNIFORM_ENSEMBLE,
    Equation,
    QueryPlan,
    apply_permutations,
    identity_permutations,
    sample_permutations,
)


def default_field(system: StorageSystem) -> FieldSpec:
    """Smallest prime field with room for 2*N distinct nonzero coefficients."""
    return FieldSpec(next_prime_above(2 * system.n))


def _logical_indices(system: StorageSystem, desired: int) -> list[tuple[int, int, int, int]]:
    """Per database: (x, index of x, y, index of y) in logical numbering."""
    rank = {db: i for i, db in enumerate(sorted(databases_containing(system, desired)), start=1)}
    out = []
    for db, (x, y) in enumerate(system.databases, start=1):
        out.append((x, rank[db] if x == desired else 1, y, rank[db] if y == desired else 1))
    return out


def _equations(system: StorageSystem, desired: int, alpha: Sequence[int]) -> list[Equation]:
    return [
        Equation(((x, i, int(alpha[2 * n])), (y, j, int(alpha[2 * n + 1]))))
        for n, (x, i, y, j) in enumerate(_logical_indices(system, desired))
    ]


def decoding_matrix(system: StorageSystem, desired: int, alpha: Sequence[int]) -> GfMatrix:
    """Psi: one row per database, columns ordered by (message, logical index)."""
    eqs = _equations(system, desired, alpha)
    unknowns = sorted({(m, s) for eq in eqs for m, s, _ in eq.terms})
    col = {u: i for i, u in enumerate(unknowns)}
    a = np.zeros((len(eqs), len(unknowns)), dtype=np.int64)
    for r, eq in enumerate(eqs):
        for m, s, c in eq.terms:
            a[r, col[(m, s)]] = c
    return GfMatrix(a)


def _full_rank_for_every_message(system: StorageSystem, q: FieldSpec, alpha) -> bool:
    unknowns = 2 * system.k - 2
    return all(mat_rank(q, decoding_matrix(system, k, alpha)) == unknowns for k in range(1, system.k + 1))


def plan_fully_connected(
    system: StorageSystem,
    desired: int,
    seed: int,
    q: Optional[FieldSpec] = None,
    alpha: Optional[Sequence[int]] = None,
    permute: bool = True,
) -> QueryPlan:
    """Weighted-sum plan for a fully-connected system with K >= 4.

    Coefficients are 2N distinct nonzero field elements drawn from the seeded
    RNG and redrawn until the decoding matrix has full column rank for every
    possible desired message, so neither the coefficients nor the number of
    draws depend on which message is wanted. ``alpha`` fixes the coefficients
    instead (ordered database by database, smaller message first) and
    ``permute=False`` uses identity index permutations.
    """
    if not is_fully_connected(system):
        raise UnsupportedStructureError(f"scheme needs a fully-connected system, got {system.params}")
    if system.k < 4:
        raise UnsupportedStructureError(
            f"weighted-sum scheme needs K >= 4 (got K={system.k}); use the cyclic scheme for K=3 "
            "or download-all for K=2"
        )
    if not 1 <= desired <= system.k:
        raise DomainError(f"desired message {desired} outside [1..{system.k}]")
    q = q or default_field(system)
    slots = 2 * system.n
    l = system.k - 1
    rng = np.random.default_rng(seed)
    perms = sample_permutations(rng, system.k, l) if permute else identity_permutations(system.k, l)

    draws = 0
    if alpha is None:
        if q.q <= slots:
            raise DomainError(f"F_{q.q} is too small: need q > 2*N = {slots} for distinct nonzero coefficients")
        while True:
            draws += 1
            alpha = [int(v) for v in rng.choice(np.arange(1, q.q), size=slots, replace=False)]
            if _full_rank_for_every_message(system, q, alpha):
                break
    else:
        alpha = [int(v) for v in alpha]
        if len(alpha) != slots:
            raise DomainError(f"need {slots} coefficients, got {len(alpha)}")
        if not all(0 < v < q.q for v in alpha):
            raise DomainError(f"coefficients must be nonzero elements of F_{q.q}")
        if mat_rank(q, decoding_matrix(system, desired, alpha)) != 2 * system.k - 2:
            raise DecodabilityError("the given coefficients make the decoding matrix rank deficient")

    logical = [[eq] for eq in _equations(system, desired, alpha)]
    return QueryPlan(
        system=system,
        desired=desired,
        q=q,
        l=l,
        per_database=apply_permutations(logical, perms),
        permutations=perms,
        scheme="fully-connected",
        coefficient_mode=UNIFORM_ENSEMBLE,
        coefficient_draws=draws,
    )
