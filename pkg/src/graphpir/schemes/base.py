"""Query plans, database answers and decoding shared by every scheme.

A plan stores *physical* symbol indices, i.e. what a database actually sees.
Scheme builders work with logical indices (a_1, a_2, ...) and push them
through per-message private permutations at the end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from ..errors import AnswerabilityError, DecodabilityError, DomainError
from ..gf import FieldSpec, rref
from ..storage import MessageStore, StorageSystem, system_from_dict

LITERAL = "literal"
UNIFORM_ENSEMBLE = "uniform-ensemble"

Term = tuple[int, int, int]


@dataclass(frozen=True)
class Equation:
    """A request for sum(coeff * W_message[symbol]) from one database."""

    terms: tuple[Term, ...]

    def __post_init__(self):
        terms = tuple(sorted((int(m), int(s), int(c)) for m, s, c in self.terms))
        if not terms:
            raise DomainError("an equation needs at least one term")
        if len({(m, s) for m, s, _ in terms}) != len(terms):
            raise DomainError(f"repeated symbol in equation {terms}")
        if any(c == 0 for _, _, c in terms):
            raise DomainError(f"zero coefficient in equation {terms}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, *terms) -> "Equation":
        """Build from ``(message, symbol)`` or ``(message, symbol, coeff)`` tuples."""
        return cls(tuple(t if len(t) == 3 else (t[0], t[1], 1) for t in terms))

    @property
    def messages(self) -> tuple[int, ...]:
        return tuple(m for m, _, _ in self.terms)

    @property
    def arity(self) -> int:
        return len(self.terms)

    def mapped(self, perms: Sequence[Sequence[int]]) -> "Equation":
        return Equation(tuple((m, perms[m - 1][s - 1], c) for m, s, c in self.terms))

    def relabeled(self, message_map: dict[int, int]) -> "Equation":
        return Equation(tuple((message_map[m], s, c) for m, s, c in self.terms))


@dataclass(frozen=True)
class QueryPlan:
    system: StorageSystem
    desired: int
    q: FieldSpec
    l: int
    per_database: tuple[tuple[Equation, ...], ...]
    permutations: tuple[tuple[int, ...], ...]
    scheme: str
    coefficient_mode: str = LITERAL
    coefficient_draws: int = 0

    def __post_init__(self):
        if len(self.per_database) != self.system.n:
            raise DomainError(f"plan has {len(self.per_database)} query lists for {self.system.n} databases")
        if not 1 <= self.desired <= self.system.k:
            raise DomainError(f"desired message {self.desired} outside [1..{self.system.k}]")
        for eqs in self.per_database:
            for eq in eqs:
                for m, s, c in eq.terms:
                    if not 1 <= m <= self.system.k or not 1 <= s <= self.l:
                        raise DomainError(f"term {(m, s, c)} outside K={self.system.k}, L={self.l}")
                    if not 0 < c < self.q.q:
                        raise DomainError(f"coefficient {c} outside F_{self.q.q}")

    @property
    def downloads(self) -> int:
        return sum(len(eqs) for eqs in self.per_database)

    def queries(self, database: int) -> tuple[Equation, ...]:
        return self.per_database[database - 1]

    def all_equations(self) -> list[tuple[int, Equation]]:
        return [(db, eq) for db, eqs in enumerate(self.per_database, start=1) for eq in eqs]

    def unanswerable(self) -> list[tuple[int, int]]:
        """(database, message) pairs where a query reaches outside the database."""
        bad = []
        for db, eq in self.all_equations():
            stored = self.system.contents(db)
            bad.extend((db, m) for m in eq.messages if m not in stored)
        return bad


@dataclass(frozen=True)
class Transcript:
    plan: QueryPlan
    answers: tuple[tuple[int, ...], ...]
    decoded: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if len(self.answers) != len(self.plan.per_database) or any(
            len(a) != len(e) for a, e in zip(self.answers, self.plan.per_database)
        ):
            raise DomainError("answers do not align with the plan's equations")
        if self.decoded is not None and len(self.decoded) != self.plan.l:
            raise DomainError(f"decoded message has length {len(self.decoded)}, expected L={self.plan.l}")

    @property
    def downloads(self) -> int:
        return sum(len(a) for a in self.answers)

    def flat_answers(self) -> list[int]:
        return [x for a in self.answers for x in a]


def sample_permutations(rng: np.random.Generator, k: int, l: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) + 1 for x in rng.permutation(l)) for _ in range(k))


def identity_permutations(k: int, l: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(range(1, l + 1)) for _ in range(k))


def apply_permutations(logical: Iterable[Iterable[Equation]], perms) -> tuple[tuple[Equation, ...], ...]:
    return tuple(tuple(eq.mapped(perms) for eq in eqs) for eqs in logical)


def answer_query(plan: QueryPlan, store: MessageStore) -> Transcript:
    """Let every database evaluate its equations over its own contents."""
    if store.k != plan.system.k or store.l != plan.l or store.q != plan.q:
        raise DomainError(
            f"message store (K={store.k}, L={store.l}, q={store.q.q}) does not match "
            f"plan (K={plan.system.k}, L={plan.l}, q={plan.q.q})"
        )
    q = plan.q.q
    answers = []
    for db, eqs in enumerate(plan.per_database, start=1):
        stored = plan.system.contents(db)
        out = []
        for eq in eqs:
            acc = 0
            for m, s, c in eq.terms:
                if m not in stored:
                    raise AnswerabilityError(db, m)
                acc += c * store.symbol(m, s)
            out.append(acc % q)
        answers.append(tuple(out))
    return Transcript(plan, tuple(answers))


def linear_system(transcript: Transcript) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    """Coefficient matrix, answer vector and column labels (message, symbol)."""
    eqs = [eq for _, eq in transcript.plan.all_equations()]
    unknowns = sorted({(m, s) for eq in eqs for m, s, _ in eq.terms})
    col = {u: i for i, u in enumerate(unknowns)}
    a = np.zeros((len(eqs), len(unknowns)), dtype=np.int64)
    for i, eq in enumerate(eqs):
        for m, s, c in eq.terms:
            a[i, col[(m, s)]] = c
    b = np.array(transcript.flat_answers(), dtype=np.int64)
    return a, b, unknowns


def decode(transcript: Transcript) -> tuple[int, ...]:
    """Recover the desired message from the answers.

    A desired symbol is recovered only when its unit vector lies in the row
    space of the collected equations; otherwise ``DecodabilityError``.
    """
    plan = transcript.plan
    q = plan.q.q
    a, b, unknowns = linear_system(transcript)
    n = len(unknowns)
    if a.shape[0] == 0:
        raise DecodabilityError("no answers were collected")
    red, pivots = rref(q, np.concatenate([a, b.reshape(-1, 1)], axis=1))
    if n in pivots:
        raise DecodabilityError("answers are inconsistent with the queries")
    pivot_row = {c: i for i, c in enumerate(pivots)}
    col = {u: i for i, u in enumerate(unknowns)}
    out = []
    missing = []
    for s in range(1, plan.l + 1):
        c = col.get((plan.desired, s))
        row = pivot_row.get(c) if c is not None else None
        if row is None or np.count_nonzero(red[row, :n]) != 1:
            missing.append(s)
            continue
        out.append(int(red[row, n]))
    if missing:
        raise DecodabilityError(
            f"desired message {plan.desired}: symbols {missing} are not determined by the answers"
        )
    return tuple(out)


def run(plan: QueryPlan, store: MessageStore) -> Transcript:
    """Answer ``plan`` against ``store`` and attach the decoded message."""
    t = answer_query(plan, store)
    return replace(t, decoded=decode(t))


def transcript_to_dict(t: Transcript) -> dict:
    plan = t.plan
    return {
        "scheme": plan.scheme,
        "q": plan.q.q,
        "l": plan.l,
        "coefficient_mode": plan.coefficient_mode,
        "system": plan.system.to_dict(),
        "queries": [[[list(term) for term in eq.terms] for eq in eqs] for eqs in plan.per_database],
        "answers": t.flat_answers(),
        "secrets": {
            "desired": plan.desired,
            "permutations": [list(p) for p in plan.permutations],
            "coefficient_draws": plan.coefficient_draws,
            "decoded": list(t.decoded) if t.decoded is not None else None,
        },
    }


def transcript_from_dict(data: dict) -> Transcript:
    system = system_from_dict(data["system"])
    per_db = tuple(
        tuple(Equation(tuple(tuple(term) for term in eq)) for eq in eqs) for eqs in data["queries"]
    )
    secrets = data.get("secrets") or {}
    l = int(data["l"])
    plan = QueryPlan(
        system=system,
        desired=int(secrets.get("desired", 1)),
        q=FieldSpec(int(data["q"])),
        l=l,
        per_database=per_db,
        permutations=tuple(tuple(p) for p in secrets.get("permutations") or identity_permutations(system.k, l)),
        scheme=data.get("scheme", "unknown"),
        coefficient_mode=data.get("coefficient_mode", LITERAL),
        coefficient_draws=int(secrets.get("coefficient_draws", 0)),
    )
    flat = list(data["answers"])
    answers = []
    pos = 0
    for eqs in per_db:
        answers.append(tuple(flat[pos:pos + len(eqs)]))
        pos += len(eqs)
    if pos != len(flat):
        raise DomainError(f"transcript has {len(flat)} answers for {pos} equations")
    decoded = secrets.get("decoded")
    return Transcript(plan, tuple(answers), tuple(decoded) if decoded is not None else None)


def dumps_transcript(t: Transcript, extra: dict | None = None) -> str:
    data = transcript_to_dict(t)
    if extra:
        data.update(extra)
    return json.dumps(data, indent=2) + "\n"


def load_transcript(path) -> Transcript:
    return transcript_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
