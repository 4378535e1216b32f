"""Fixed plan for the (6,2,3,4) system with three messages per database.

Round 1 fetches two singles of every stored message, round 2 fetches 2-sums
over every pair of stored messages, round 3 fetches 3-sums. Side information
for round 3 is "processed": it is assembled by adding 2-sums fetched from
two or three other databases (e.g. b7+c7 at one database plus c7+e7 at
another gives b7+e7). Rate 18/60 = 3/10 over F_2 with L = 18.

The hand-built table retrieves W_1. Other messages are served by renaming
messages with an automorphism of the storage system that sends W_1 to the
desired message.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from ..errors import DomainError, UnsupportedStructureError
from ..gf import FieldSpec
from ..storage import THREE_PER_DATABASE, StorageSystem
from .base import Equation, QueryPlan, apply_permutations, sample_permutations

F2 = FieldSpec(2)
L = 18

_TABLE = (
    (
        "a1 a2 b1 b2 e1 e2",
        "a5+b3 a6+b4 a7+e3 a8+e4 b5+e5 b6+e6",
        "a13+b7+e7 a14+b8+e8 a15+b9+e9",
    ),
    (
        "a3 a4 d1 d2 f1 f2",
        "a9+d3 a10+d4 a11+f3 a12+f4 d5+f5 d6+f6",
        "a16+d7+f7 a17+d8+f8 a18+d9+f9",
    ),
    (
        "b3 b4 c1 c2 f3 f4",
        "b7+c7 b8+c8 b9+f5 b5+f9 c9+f7 c5+f8",
        "b1+c3+f1 b2+c4+f2 b6+c6+f6",
    ),
    (
        "c3 c4 d3 d4 e3 e4",
        "c9+d7 c5+d8 c7+e7 c8+e8 d5+e9 d9+e5",
        "c1+d1+e1 c2+d2+e2 c6+d6+e6",
    ),
)


def _parse(token: str) -> Equation:
    return Equation.of(*((ord(t[0]) - ord("a") + 1, int(t[1:])) for t in token.split("+")))


def base_table() -> list[list[Equation]]:
    """Logical equations retrieving W_1, per database."""
    return [[_parse(tok) for rnd in rounds for tok in rnd.split()] for rounds in _TABLE]


def automorphism_to(system: StorageSystem, target: int) -> tuple[dict[int, int], list[int]]:
    """First message permutation (lexicographic) mapping message 1 to ``target``
    and the database contents onto themselves.

    Returns the message map and ``db_map`` with ``db_map[n-1]`` the database
    that plays database n's role.
    """
    sets = system.content_sets()
    index = {s: i for i, s in enumerate(sets, start=1)}
    for images in permutations(range(1, system.k + 1)):
        if images[0] != target:
            continue
        sigma = dict(zip(range(1, system.k + 1), images))
        mapped = [frozenset(sigma[m] for m in s) for s in sets]
        if all(s in index for s in mapped):
            return sigma, [index[s] for s in mapped]
    raise UnsupportedStructureError(f"no automorphism of the storage system maps W_1 to W_{target}")


def _canonical_order(eqs: list[Equation]) -> list[Equation]:
    # round (arity) first, then by message tuple; stable within ties
    return sorted(eqs, key=lambda e: (e.arity, e.messages))


def plan_m3_example(desired: int, seed: int, system: StorageSystem = THREE_PER_DATABASE) -> QueryPlan:
    if system != THREE_PER_DATABASE:
        raise UnsupportedStructureError(
            f"this plan is fixed to the (6,2,3,4) system {THREE_PER_DATABASE.to_dict()['databases']}"
        )
    if not 1 <= desired <= system.k:
        raise DomainError(f"desired message {desired} outside [1..{system.k}]")
    table = base_table()
    if desired == 1:
        logical = [_canonical_order(eqs) for eqs in table]
    else:
        sigma, db_map = automorphism_to(system, desired)
        logical = [[] for _ in range(system.n)]
        for n, eqs in enumerate(table, start=1):
            logical[db_map[n - 1] - 1] = _canonical_order([eq.relabeled(sigma) for eq in eqs])
    rng = np.random.default_rng(seed)
    perms = sample_permutations(rng, system.k, L)
    return QueryPlan(
        system=system,
        desired=desired,
        q=F2,
        l=L,
        per_database=apply_permutations(logical, perms),
        permutations=perms,
        scheme="m3-example",
    )
