"""Independent checks of privacy, reliability and rate.

Privacy is checked structurally: a database's query list is rewritten with
each symbol index replaced by the order in which that message's symbols first
appear at the database. Because schemes draw their index permutations
uniformly, two desired messages are indistinguishable at a database exactly
when these canonical views coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .analysis import BoundReport, r_over_n
from .errors import DecodabilityError, DomainError, OracleScaleError
from .gf import GfMatrix, mat_rank, rowspace_contains
from .schemes import QueryPlan, Transcript, build_plan, linear_system
from .schemes.base import LITERAL, UNIFORM_ENSEMBLE
from .storage import StorageSystem, databases_containing

BELOW_BOUND = "below-bound"
EQUALS_CAPACITY = "equals-capacity"
VIOLATES_BOUND = "violates-bound"
AMBIGUOUS = "ambiguous"
ORACLE_BUDGET = 2**24

PlanFactory = Callable[[StorageSystem, int, int], QueryPlan]


@dataclass(frozen=True)
class CanonicalQueryView:
    database: int
    equations: tuple[tuple[tuple[int, int], ...], ...]
    coefficient_profile: tuple


@dataclass(frozen=True)
class PrivacyResult:
    passed: bool
    database: Optional[int] = None
    pair: Optional[tuple[int, int]] = None
    seed: Optional[int] = None
    equation: Optional[int] = None
    detail: str = ""

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class DecodabilityReport:
    passed: bool
    rank: int
    rank_with_desired: int
    unknowns: int
    equations: int
    undetermined: tuple[int, ...] = ()

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class RateReport:
    l: int
    downloads: int
    rate: Fraction
    bound: Fraction
    capacity: Optional[Fraction]
    verdict: str


def canonicalize(plan: QueryPlan, database: int) -> CanonicalQueryView:
    """Query list of ``database`` with symbol indices relabelled by first appearance.

    Only the equations sent to the database are read.
    """
    if not 1 <= database <= plan.system.n:
        raise DomainError(f"database {database} outside [1..{plan.system.n}]")
    labels: dict[tuple[int, int], int] = {}
    seen: dict[int, int] = {}
    eqs = []
    coeffs = []
    for eq in plan.queries(database):
        row = []
        for m, s, _ in eq.terms:
            if (m, s) not in labels:
                seen[m] = seen.get(m, 0) + 1
                labels[(m, s)] = seen[m]
            row.append((m, labels[(m, s)]))
        eqs.append(tuple(sorted(row)))
        if plan.coefficient_mode == LITERAL:
            coeffs.append(tuple(c for _, _, c in eq.terms))
        else:
            coeffs.append(UNIFORM_ENSEMBLE)
    return CanonicalQueryView(database, tuple(eqs), tuple(coeffs))


def _first_difference(a: CanonicalQueryView, b: CanonicalQueryView) -> tuple[int, str]:
    for i, (x, y) in enumerate(zip(a.equations, b.equations), start=1):
        if x != y:
            return i, f"equation {i}: {list(x)} vs {list(y)}"
    for i, (x, y) in enumerate(zip(a.coefficient_profile, b.coefficient_profile), start=1):
        if x != y:
            return i, f"equation {i} coefficients: {x} vs {y}"
    n = min(len(a.equations), len(b.equations)) + 1
    return n, f"{len(a.equations)} equations vs {len(b.equations)}"


def _factory(scheme: Union[str, PlanFactory]) -> PlanFactory:
    if callable(scheme):
        return scheme
    return lambda system, desired, seed: build_plan(scheme, system, desired, seed)


def check_privacy(
    scheme: Union[str, PlanFactory],
    system: StorageSystem,
    seeds: Sequence[int],
) -> PrivacyResult:
    """Every database must see the same canonical view for every desired
    message and every seed.

    ``scheme`` is a registered scheme name or a ``(system, desired, seed)``
    plan factory. For schemes with drawn coefficients the number of
    coefficient draws must also be the same for every desired message.
    """
    make = _factory(scheme)
    reference: dict[int, CanonicalQueryView] = {}
    for seed in seeds:
        draws: dict[int, int] = {}
        for desired in range(1, system.k + 1):
            plan = make(system, desired, seed)
            draws[desired] = plan.coefficient_draws
            for db in range(1, system.n + 1):
                view = canonicalize(plan, db)
                ref = reference.setdefault(db, view)
                if view != ref:
                    idx, detail = _first_difference(ref, view)
                    return PrivacyResult(
                        False, database=db, pair=(1, desired), seed=seed, equation=idx,
                        detail=f"database {db}, desired 1 vs {desired}, seed {seed}: {detail}",
                    )
        if len(set(draws.values())) > 1:
            return PrivacyResult(False, seed=seed, detail=f"seed {seed}: coefficient draws depend on the desired message {draws}")
    return PrivacyResult(True)


def _unit_rows(transcript: Transcript, unknowns) -> tuple[np.ndarray, list[int]]:
    plan = transcript.plan
    col = {u: i for i, u in enumerate(unknowns)}
    rows = []
    unreferenced = []
    for s in range(1, plan.l + 1):
        c = col.get((plan.desired, s))
        if c is None:
            unreferenced.append(s)
            continue
        e = np.zeros(len(unknowns), dtype=np.int64)
        e[c] = 1
        rows.append(e)
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(unknowns)), unreferenced


def check_decodability(transcript: Transcript) -> DecodabilityReport:
    """Every desired symbol's unit vector must lie in the row space of the
    collected equations. Does not use ``decode``."""
    q = transcript.plan.q
    a, _, unknowns = linear_system(transcript)
    units, unreferenced = _unit_rows(transcript, unknowns)
    rank = mat_rank(q, GfMatrix(a))
    stacked = mat_rank(q, GfMatrix(np.concatenate([a, units]))) if units.size else rank
    passed = not unreferenced and stacked == rank
    undetermined = list(unreferenced)
    if not passed and stacked != rank:
        col = {u: i for i, u in enumerate(unknowns)}
        m = GfMatrix(a)
        for s in range(1, transcript.plan.l + 1):
            c = col.get((transcript.plan.desired, s))
            if c is None:
                continue
            e = [0] * len(unknowns)
            e[c] = 1
            if not rowspace_contains(q, m, e):
                undetermined.append(s)
    return DecodabilityReport(
        passed=passed,
        rank=rank,
        rank_with_desired=stacked,
        unknowns=len(unknowns),
        equations=a.shape[0],
        undetermined=tuple(sorted(undetermined)),
    )


def measure_rate(transcript: Transcript, report: Optional[BoundReport] = None) -> RateReport:
    """Rate L/downloads against the bound.

    Without a bound report (systems with M != 2) the bound is R/N.
    """
    plan = transcript.plan
    rate = Fraction(plan.l, transcript.downloads)
    if report is not None:
        bound, capacity = report.bound, report.closed_form_capacity
    else:
        bound, capacity = r_over_n(plan.system), None
    if rate > bound:
        verdict = VIOLATES_BOUND
    elif capacity is not None and rate == capacity:
        verdict = EQUALS_CAPACITY
    else:
        verdict = BELOW_BOUND
    return RateReport(plan.l, transcript.downloads, rate, bound, capacity, verdict)


def desired_side_ranks(plan: QueryPlan) -> dict[int, int]:
    """For each database holding the desired message: how many desired symbols
    its answers pin down once every undesired message is known.

    Undesired terms become constants, so this is the rank of the database's
    equations restricted to desired-message columns.
    """
    out = {}
    for db in sorted(databases_containing(plan.system, plan.desired)):
        eqs = plan.queries(db)
        cols = sorted({s for eq in eqs for m, s, _ in eq.terms if m == plan.desired})
        if not cols:
            out[db] = 0
            continue
        idx = {s: i for i, s in enumerate(cols)}
        a = np.zeros((len(eqs), len(cols)), dtype=np.int64)
        for r, eq in enumerate(eqs):
            for m, s, c in eq.terms:
                if m == plan.desired:
                    a[r, idx[s]] = c
        out[db] = mat_rank(plan.q, GfMatrix(a))
    return out


def brute_force_recover(transcript: Transcript, system: Optional[StorageSystem] = None):
    """Enumerate every assignment of the referenced symbols consistent with the
    answers. Returns the desired message if it is the same in all of them,
    otherwise ``AMBIGUOUS``.
    """
    plan = transcript.plan
    system = system or plan.system
    if system != plan.system:
        raise DomainError("transcript was produced for a different storage system")
    for db, eq in plan.all_equations():
        stored = system.contents(db)
        if any(m not in stored for m in eq.messages):
            raise DomainError(f"database {db} was asked about a message it does not store")
    q = plan.q.q
    eqs = [eq for _, eq in plan.all_equations()]
    unknowns = sorted({(m, s) for eq in eqs for m, s, _ in eq.terms})
    u = len(unknowns)
    if q**u > ORACLE_BUDGET:
        raise OracleScaleError(f"{q}^{u} assignments exceed the oracle budget of {ORACLE_BUDGET}")
    col = {x: i for i, x in enumerate(unknowns)}
    desired_cols = [col.get((plan.desired, s)) for s in range(1, plan.l + 1)]
    if any(c is None for c in desired_cols):
        return AMBIGUOUS
    coeff = np.zeros((len(eqs), u), dtype=np.int64)
    for i, eq in enumerate(eqs):
        for m, s, c in eq.terms:
            coeff[i, col[(m, s)]] = c
    target = np.array(transcript.flat_answers(), dtype=np.int64)
    radix = q ** np.arange(u, dtype=np.int64)
    found = None
    total = q**u
    step = 1 << 16
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        digits = (idx[:, None] // radix) % q
        ok = np.all((digits @ coeff.T) % q == target, axis=1)
        if not ok.any():
            continue
        cand = digits[ok][:, desired_cols]
        if found is None:
            found = cand[0]
        if (cand != found).any():
            return AMBIGUOUS
    if found is None:
        raise DecodabilityError("no message assignment is consistent with the answers")
    return tuple(int(x) for x in found)


def fraction_json(x: Optional[Fraction]):
    return None if x is None else {"num": x.numerator, "den": x.denominator}


def verification_report(privacy: PrivacyResult, decodability: DecodabilityReport, rate: RateReport) -> dict:
    return {
        "privacy": "pass" if privacy.passed else "fail",
        "decodability": "pass" if decodability.passed else "fail",
        "rate": fraction_json(rate.rate),
        "bound": fraction_json(rate.bound),
        "verdict": rate.verdict,
    }
