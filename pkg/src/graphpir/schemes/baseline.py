"""Reference schemes: download everything, and the greedy scheme on the triangle."""

from __future__ import annotations

import numpy as np

from ..analysis import is_fully_connected
from ..errors import DomainError, UnsupportedStructureError
from ..gf import FieldSpec
from ..storage import StorageSystem, TRIANGLE, databases_containing
from .base import Equation, QueryPlan, apply_permutations, identity_permutations, sample_permutations

F2 = FieldSpec(2)


def plan_download_all(system: StorageSystem, desired: int, l: int = 1, q: FieldSpec = F2) -> QueryPlan:
    """Fetch every symbol of every message once, each from its lowest-indexed holder."""
    if not 1 <= desired <= system.k:
        raise DomainError(f"desired message {desired} outside [1..{system.k}]")
    per_db: list[list[Equation]] = [[] for _ in range(system.n)]
    for msg in range(1, system.k + 1):
        holder = min(databases_containing(system, msg))
        per_db[holder - 1].extend(Equation.of((msg, s)) for s in range(1, l + 1))
    return QueryPlan(
        system=system,
        desired=desired,
        q=q,
        l=l,
        per_database=tuple(tuple(eqs) for eqs in per_db),
        permutations=identity_permutations(system.k, l),
        scheme="download-all",
    )


def plan_sun_jafar_332(desired: int, seed: int, system: StorageSystem = TRIANGLE) -> QueryPlan:
    """Greedy two-round scheme on the (3,2,2,3) triangle, L=4 over F_2, rate 4/9.

    Each database gets one fresh symbol of each stored message, then one 2-sum.
    Holders of the desired message pair a fresh desired symbol with the
    undesired symbol read from the third database; the third database gets a
    dummy sum so that every database sees the same pattern.
    """
    if system.params != (3, 2, 2, 3) or not is_fully_connected(system):
        raise UnsupportedStructureError(f"scheme needs the (3,2,2,3) triangle, got {system.params}")
    if not 1 <= desired <= 3:
        raise DomainError(f"desired message {desired} outside [1..3]")
    rng = np.random.default_rng(seed)
    perms = sample_permutations(rng, 3, 4)

    holders = sorted(databases_containing(system, desired))
    (third,) = set(range(1, 4)) - set(holders)
    logical: list[list[Equation]] = [[] for _ in range(3)]
    for i, db in enumerate(holders):
        (other,) = system.contents(db) - {desired}
        logical[db - 1] = [
            *sorted([Equation.of((desired, 1 + i)), Equation.of((other, 1))], key=lambda e: e.messages),
            Equation.of((desired, 3 + i), (other, 2)),
        ]
    u, v = sorted(system.contents(third))
    logical[third - 1] = [Equation.of((u, 2)), Equation.of((v, 2)), Equation.of((u, 3), (v, 3))]

    return QueryPlan(
        system=system,
        desired=desired,
        q=F2,
        l=4,
        per_database=apply_permutations(logical, perms),
        permutations=perms,
        scheme="sun-jafar-332",
    )
