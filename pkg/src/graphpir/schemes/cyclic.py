"""Capacity-achieving scheme for cyclic storage, rate 2/(K+1) over F_2.

One repetition per unordered pair of databases. The pair receives the full
greedy pattern (one fresh single per stored message, then a 2-sum); every
other database receives two 2-sums over its two messages. A repetition
introduces 4 fresh desired symbols and 2 fresh symbols per undesired message,
so it carries 2K+2 equations in 2K+2 unknowns and L = 4*C(K,2).

Within a repetition the undesired messages form a path u_1 .. u_{K-1} around
the ring (u_1 and u_{K-1} are the desired message's neighbours). Each
undesired message has two symbols, "track 1" and "track 2". Compressed
databases on the path pair the tracks straight across, so knowing one track
at one vertex propagates along the whole path; the singles of the full pair
are placed so that the two tracks are seeded from different places.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Optional, Sequence

import numpy as np

from ..analysis import cycle_order, is_cyclic
from ..errors import DecodabilityError, DomainError, UnsupportedStructureError
from ..gf import FieldSpec, GfMatrix, mat_rank
from ..storage import StorageSystem
from .base import Equation, QueryPlan, apply_permutations, sample_permutations

F2 = FieldSpec(2)


@dataclass(frozen=True)
class _Layout:
    desired: int
    path: tuple[int, ...]  # undesired messages u_1 .. u_{K-1}
    path_edges: tuple[int, ...]  # database joining path[j] and path[j+1]
    holder_first: int  # stores desired and u_1
    holder_last: int  # stores desired and u_{K-1}


def _layout(system: StorageSystem, desired: int) -> _Layout:
    order = cycle_order(system, desired)
    path = tuple(order[1:])
    db_of = {frozenset(db): i for i, db in enumerate(system.databases, start=1)}
    return _Layout(
        desired=desired,
        path=path,
        path_edges=tuple(db_of[frozenset((path[j], path[j + 1]))] for j in range(len(path) - 1)),
        holder_first=db_of[frozenset((desired, path[0]))],
        holder_last=db_of[frozenset((desired, path[-1]))],
    )


def _by_message(*eqs: Equation) -> list[Equation]:
    return sorted(eqs, key=lambda e: e.messages)


def _repetition(lay: _Layout, rep: int, full: frozenset[int], choice: dict[int, object]) -> dict[int, list[Equation]]:
    """Logical equations of one repetition, keyed by database.

    ``choice`` holds, per database: for a full holder the track of its
    undesired single; for a full path database the tracks (s, t) of its two
    singles; for a compressed path database 0 (straight) or 1 (crossed).
    """

    def x(j: int, track: int):
        return (lay.path[j], 2 * rep + track)

    def d(i: int):
        return (lay.desired, 4 * rep + i)

    out: dict[int, list[Equation]] = {}
    last = len(lay.path) - 1
    for db, j, (d1, d2) in ((lay.holder_first, 0, (1, 2)), (lay.holder_last, last, (3, 4))):
        if db in full:
            s = choice[db]
            out[db] = _by_message(Equation.of(d(d1)), Equation.of(x(j, s))) + [Equation.of(d(d2), x(j, 3 - s))]
        else:
            out[db] = [Equation.of(d(d1), x(j, 1)), Equation.of(d(d2), x(j, 2))]
    for j, db in enumerate(lay.path_edges):
        if db in full:
            s, t = choice[db]
            out[db] = _by_message(Equation.of(x(j, s)), Equation.of(x(j + 1, t))) + [
                Equation.of(x(j, 3 - s), x(j + 1, 3 - t))
            ]
        elif choice[db] == 0:
            out[db] = [Equation.of(x(j, 1), x(j + 1, 1)), Equation.of(x(j, 2), x(j + 1, 2))]
        else:
            out[db] = [Equation.of(x(j, 1), x(j + 1, 2)), Equation.of(x(j, 2), x(j + 1, 1))]
    return out


def _constructive_choice(lay: _Layout, full: frozenset[int]) -> dict[int, object]:
    choice: dict[int, object] = {db: 0 for db in lay.path_edges if db not in full}
    first, last = lay.holder_first in full, lay.holder_last in full
    edges = [j for j, db in enumerate(lay.path_edges) if db in full]
    e = lay.path_edges
    if first and last:
        # track 1 seeded at u_1, track 2 at u_{K-1}
        choice[lay.holder_first], choice[lay.holder_last] = 1, 2
    elif first:
        # track 1 runs from u_1 to the full path database, which completes it
        choice[lay.holder_first] = 1
        choice[e[edges[0]]] = (2, 1)
    elif last:
        choice[lay.holder_last] = 1
        choice[e[edges[0]]] = (1, 2)
    else:
        p, q = edges
        choice[e[p]] = (1, 1)
        choice[e[q]] = (2, 1)
    return choice


def _choice_space(lay: _Layout, full: frozenset[int]):
    dbs = [lay.holder_first, lay.holder_last, *lay.path_edges]
    domains = []
    for db in dbs:
        if db in (lay.holder_first, lay.holder_last):
            domains.append((1, 2) if db in full else (None,))
        elif db in full:
            domains.append(tuple(product((1, 2), repeat=2)))
        else:
            domains.append((0, 1))
    for combo in product(*domains):
        yield dict(zip(dbs, combo))


def _rank_ok(eqs: dict[int, list[Equation]]) -> bool:
    rows = [eq for lst in eqs.values() for eq in lst]
    unknowns = sorted({(m, s) for eq in rows for m, s, _ in eq.terms})
    if len(unknowns) != len(rows):
        return False
    col = {u: i for i, u in enumerate(unknowns)}
    a = np.zeros((len(rows), len(unknowns)), dtype=np.int64)
    for i, eq in enumerate(rows):
        for m, s, c in eq.terms:
            a[i, col[(m, s)]] = c
    return mat_rank(F2, GfMatrix(a)) == len(unknowns)


def repetition_equations(lay: _Layout, rep: int, pair: Sequence[int]) -> dict[int, list[Equation]]:
    full = frozenset(pair)
    eqs = _repetition(lay, rep, full, _constructive_choice(lay, full))
    if _rank_ok(eqs):
        return eqs
    for choice in _choice_space(lay, full):
        eqs = _repetition(lay, rep, full, choice)
        if _rank_ok(eqs):
            return eqs
    raise DecodabilityError(f"no index assignment makes repetition {rep + 1} (full pair {tuple(pair)}) decodable")


def plan_cyclic(
    system: StorageSystem,
    desired: int,
    seed: int,
    pairs: Optional[Sequence[tuple[int, int]]] = None,
) -> QueryPlan:
    """Build the cyclic-ring plan.

    ``pairs`` restricts the repetitions to the given full-query database pairs
    (L shrinks to 4 per pair); the default, all pairs in lexicographic order,
    is the private scheme.
    """
    if not is_cyclic(system):
        raise UnsupportedStructureError(f"cyclic scheme needs a cyclic (K,2,2,K) system, got {system.params}")
    if not 1 <= desired <= system.k:
        raise DomainError(f"desired message {desired} outside [1..{system.k}]")
    if pairs is None:
        pairs = list(combinations(range(1, system.n + 1), 2))
    lay = _layout(system, desired)
    logical: list[list[Equation]] = [[] for _ in range(system.n)]
    for rep, pair in enumerate(pairs):
        if len(set(pair)) != 2 or not all(1 <= p <= system.n for p in pair):
            raise DomainError(f"invalid full-query pair {pair}")
        for db, eqs in repetition_equations(lay, rep, pair).items():
            logical[db - 1].extend(eqs)
    l = 4 * len(pairs)
    rng = np.random.default_rng(seed)
    perms = sample_permutations(rng, system.k, l)
    return QueryPlan(
        system=system,
        desired=desired,
        q=F2,
        l=l,
        per_database=apply_permutations(logical, perms),
        permutations=perms,
        scheme="cyclic",
    )
