"""Graph reduction, spread, the rate upper bound and closed-form capacities.

Only systems with M == 2 have a graph view (messages are vertices, databases
are edges); everything here except ``recognize_family`` and ``r_over_n``
rejects other systems.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

from .errors import DomainError, UnsupportedStructureError
from .storage import StorageSystem

CYCLIC = "cyclic"
FULLY_CONNECTED = "fully-connected"
OTHER = "other"

# Exhaustive spread search is exponential; above this many databases a greedy
# reduction is returned instead and flagged as not certified.
EXHAUSTIVE_EDGE_LIMIT = 24

Selector = Union[Sequence[int], Callable[[int, int, list[int]], int], None]


@dataclass(frozen=True)
class ReductionTrace:
    start_vertex: int
    kept_chain: tuple[int, ...]
    enumerated_edges: tuple[int, ...]
    per_step_counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.per_step_counts)


@dataclass(frozen=True)
class Spread:
    delta: int
    witness: ReductionTrace
    certified: bool = True

    def __iter__(self):
        # allows ``delta, witness = spread(system)``
        return iter((self.delta, self.witness))


@dataclass(frozen=True)
class FamilyMatch:
    family: str
    also_cyclic: bool = False


@dataclass(frozen=True)
class BoundReport:
    spread: int
    witness: ReductionTrace
    bound_r_over_n: Fraction
    bound_spread: Fraction
    bound: Fraction
    closed_form_capacity: Optional[Fraction]
    baseline_trivial: Fraction
    baseline_prior: Fraction
    family: FamilyMatch = field(default_factory=lambda: FamilyMatch(OTHER))
    certified: bool = True


def _require_graph(system: StorageSystem) -> None:
    if system.m != 2:
        raise UnsupportedStructureError(
            f"graph analysis needs M=2 (each database an edge), got M={system.m}"
        )


def adjacency(system: StorageSystem) -> dict[int, list[tuple[int, int]]]:
    """vertex -> [(database, neighbour), ...] in database order."""
    _require_graph(system)
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(1, system.k + 1)}
    for db, (u, v) in enumerate(system.databases, start=1):
        adj[u].append((db, v))
        adj[v].append((db, u))
    return adj


def is_connected(system: StorageSystem) -> bool:
    adj = adjacency(system)
    seen = {1}
    todo = deque([1])
    while todo:
        v = todo.popleft()
        for _, w in adj[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == system.k


def _require_connected_graph(system: StorageSystem) -> dict[int, list[tuple[int, int]]]:
    adj = adjacency(system)
    if not is_connected(system):
        raise UnsupportedStructureError("graph reduction needs a connected storage graph")
    return adj


def _select(choices: Selector, step: int, current: int, candidates: list[int]) -> int:
    if callable(choices):
        keep = choices(step, current, candidates)
    elif choices is not None and step < len(choices):
        keep = choices[step]
    else:
        keep = candidates[0]
    if keep not in candidates:
        raise DomainError(f"step {step + 1}: vertex {keep} is not a remaining neighbour of {current} {candidates}")
    return keep


def reduce_graph(system: StorageSystem, start: int, choices: Selector = None) -> ReductionTrace:
    """Run one graph reduction from ``start``.

    At each step every edge from the current vertex to a surviving vertex is
    enumerated, then the current vertex and all of its surviving neighbours
    except the kept one are deleted. ``choices`` picks the kept neighbour: a
    sequence consumed one entry per step, or ``f(step, current, candidates)``.
    Once a sequence runs out the smallest candidate is kept.
    """
    adj = _require_connected_graph(system)
    if not 1 <= start <= system.k:
        raise DomainError(f"start vertex {start} outside [1..{system.k}]")
    alive = set(range(1, system.k + 1))
    current = start
    chain = [start]
    edges: list[int] = []
    counts: list[int] = []
    step = 0
    while True:
        incident = [(db, w) for db, w in adj[current] if w in alive]
        if not incident:
            break
        counts.append(len(incident))
        edges.extend(db for db, _ in incident)
        candidates = sorted({w for _, w in incident})
        keep = _select(choices, step, current, candidates)
        alive.discard(current)
        alive.difference_update(w for w in candidates if w != keep)
        chain.append(keep)
        current = keep
        step += 1
    return ReductionTrace(start, tuple(chain), tuple(edges), tuple(counts))


def _exhaustive(system: StorageSystem, adj) -> tuple[int, tuple[int, ...]]:
    @lru_cache(maxsize=None)
    def best(current: int, alive: frozenset) -> tuple[int, tuple[int, ...]]:
        incident = [w for _, w in adj[current] if w in alive]
        if not incident:
            return 0, ()
        candidates = sorted(set(incident))
        result = None
        for w in candidates:
            rest = alive - {current} - {c for c in candidates if c != w}
            sub_total, sub_chain = best(w, rest)
            option = (len(incident) + sub_total, (w,) + sub_chain)
            if result is None or option[0] > result[0] or (option[0] == result[0] and option[1] < result[1]):
                result = option
        return result

    everything = frozenset(range(1, system.k + 1))
    top = None
    for start in range(1, system.k + 1):
        total, chain = best(start, everything)
        option = (total, (start,) + chain)
        if top is None or option[0] > top[0] or (option[0] == top[0] and option[1] < top[1]):
            top = option
    return top


def _greedy_keep(adj):
    def pick(step: int, current: int, candidates: list[int]) -> int:
        # prefer the neighbour that keeps the most edges alive after this step
        removed = {current} | set(candidates)

        def remaining(w):
            return sum(1 for _, x in adj[w] if x not in removed)

        return max(candidates, key=lambda w: (remaining(w), -w))

    return pick


def spread(system: StorageSystem) -> Spread:
    """Largest reduction total over all start vertices and keep choices.

    Ties are broken towards the lexicographically smallest kept chain.
    """
    adj = _require_connected_graph(system)
    if system.n <= EXHAUSTIVE_EDGE_LIMIT:
        total, chain = _exhaustive(system, adj)
        witness = reduce_graph(system, chain[0], chain[1:])
        assert witness.total == total
        return Spread(total, witness, True)
    pick = _greedy_keep(adj)
    traces = [reduce_graph(system, s, pick) for s in range(1, system.k + 1)]
    witness = max(traces, key=lambda t: (t.total, [-v for v in t.kept_chain]))
    return Spread(witness.total, witness, False)


def _distinct_pairs(system: StorageSystem) -> bool:
    return len(set(system.databases)) == system.n


def is_fully_connected(system: StorageSystem) -> bool:
    return system.m == 2 and system.n == system.k * (system.k - 1) // 2 and _distinct_pairs(system)


def is_cyclic(system: StorageSystem) -> bool:
    return (
        system.m == 2
        and system.r == 2
        and system.k >= 3
        and _distinct_pairs(system)
        and is_connected(system)
    )


def recognize_family(system: StorageSystem) -> FamilyMatch:
    fc = is_fully_connected(system)
    cyc = is_cyclic(system)
    if fc:
        return FamilyMatch(FULLY_CONNECTED, also_cyclic=cyc)
    if cyc:
        return FamilyMatch(CYCLIC)
    return FamilyMatch(OTHER)


def cycle_order(system: StorageSystem, start: int) -> list[int]:
    """Messages around a cyclic system, from ``start`` towards its smaller neighbour."""
    if not is_cyclic(system):
        raise UnsupportedStructureError("system is not cyclic")
    adj = adjacency(system)
    order = [start]
    prev, current = start, min(w for _, w in adj[start])
    while current != start:
        order.append(current)
        nxt = [w for _, w in adj[current] if w != prev]
        prev, current = current, nxt[0]
    return order


def closed_form_capacity(system: StorageSystem) -> Optional[Fraction]:
    match = recognize_family(system)
    k = system.k
    if match.family == FULLY_CONNECTED:
        return Fraction(1, 2) if k <= 3 else Fraction(2, k)
    if match.family == CYCLIC:
        return Fraction(2, k + 1)
    return None


def r_over_n(system: StorageSystem) -> Fraction:
    """R/N; a valid rate ceiling for any M (it only uses the per-holder floor)."""
    return Fraction(system.r, system.n)


def upper_bound(system: StorageSystem) -> BoundReport:
    _require_graph(system)
    sp = spread(system)
    by_ratio = r_over_n(system)
    by_spread = Fraction(system.r, system.r + sp.delta)
    return BoundReport(
        spread=sp.delta,
        witness=sp.witness,
        bound_r_over_n=by_ratio,
        bound_spread=by_spread,
        bound=min(by_ratio, by_spread),
        closed_form_capacity=closed_form_capacity(system),
        baseline_trivial=Fraction(1, system.k),
        baseline_prior=Fraction(1, system.n),
        family=recognize_family(system),
        certified=sp.certified,
    )
