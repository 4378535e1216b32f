"""Non-replicated storage systems: K messages spread over N databases.

Each database stores M whole messages and each message lives on R databases,
so K*R == M*N. With M == 2 a system is an R-regular graph whose vertices are
messages and whose edges are databases. Messages and databases are numbered
from 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Union

import numpy as np

from .errors import DomainError, SpecFormatError, SpecValidationError
from .gf import FieldSpec

PathLike = Union[str, Path]


@dataclass(frozen=True)
class StorageSystem:
    k: int
    r: int
    m: int
    n: int
    databases: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        dbs = tuple(tuple(sorted(int(x) for x in db)) for db in self.databases)
        object.__setattr__(self, "databases", dbs)
        self._validate()

    def _validate(self):
        k, r, m, n = self.k, self.r, self.m, self.n
        for name, value in (("k", k), ("r", r), ("m", m), ("n", n)):
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise SpecValidationError(f"{name} must be a positive integer, got {value!r}")
        if k * r != m * n:
            raise SpecValidationError(f"infeasible system: K*R = {k * r} but M*N = {m * n}")
        if len(self.databases) != n:
            raise SpecValidationError(f"expected N={n} databases, got {len(self.databases)}")
        counts = [0] * (k + 1)
        for idx, db in enumerate(self.databases, start=1):
            if len(db) != m or len(set(db)) != m:
                raise SpecValidationError(f"database {idx} must store exactly M={m} distinct messages, got {list(db)}")
            for msg in db:
                if not 1 <= msg <= k:
                    raise SpecValidationError(f"database {idx} stores message {msg}, outside [1..{k}]")
                counts[msg] += 1
        # over-replicated messages are reported first; they usually point at the typo
        for msg in sorted(range(1, k + 1), key=lambda x: (counts[x] <= r, x)):
            if counts[msg] != r:
                raise SpecValidationError(
                    f"message {msg} appears in {counts[msg]} databases, expected R={r}"
                )

    @property
    def params(self) -> tuple[int, int, int, int]:
        return (self.k, self.r, self.m, self.n)

    def contents(self, database: int) -> frozenset[int]:
        """Message indices stored on ``database`` (the set Z_n)."""
        if not 1 <= database <= self.n:
            raise DomainError(f"database {database} outside [1..{self.n}]")
        return frozenset(self.databases[database - 1])

    def content_sets(self) -> list[frozenset[int]]:
        return [frozenset(db) for db in self.databases]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "r": self.r,
            "m": self.m,
            "n": self.n,
            "databases": [list(db) for db in self.databases],
        }

    def relabeled(self, message_perm: dict[int, int], database_order: list[int] | None = None) -> "StorageSystem":
        """Copy with messages renamed by ``message_perm`` and databases reordered.

        ``database_order[i]`` is the old index of the database placed at
        position ``i + 1``.
        """
        order = database_order or list(range(1, self.n + 1))
        dbs = [tuple(message_perm[x] for x in self.databases[old - 1]) for old in order]
        return StorageSystem(self.k, self.r, self.m, self.n, tuple(dbs))


@dataclass(frozen=True)
class MessageStore:
    q: FieldSpec
    l: int
    symbols: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.l < 1:
            raise DomainError(f"message length must be >= 1, got {self.l}")
        rows = tuple(tuple(int(x) for x in row) for row in self.symbols)
        for i, row in enumerate(rows, start=1):
            if len(row) != self.l:
                raise DomainError(f"message {i} has length {len(row)}, expected L={self.l}")
            for x in row:
                if not 0 <= x < self.q.q:
                    raise DomainError(f"message {i} has symbol {x} outside F_{self.q.q}")
        object.__setattr__(self, "symbols", rows)

    @property
    def k(self) -> int:
        return len(self.symbols)

    def message(self, index: int) -> tuple[int, ...]:
        return self.symbols[index - 1]

    def symbol(self, message: int, index: int) -> int:
        return self.symbols[message - 1][index - 1]


def make_cyclic(k: int) -> StorageSystem:
    """The (K,2,2,K) ring where database i stores messages i and i+1 (mod K)."""
    if k < 3:
        raise DomainError(f"a cyclic system needs K >= 3, got {k}")
    dbs = tuple((i, i % k + 1) for i in range(1, k + 1))
    return StorageSystem(k, 2, 2, k, dbs)


def make_fully_connected(k: int) -> StorageSystem:
    """One database per unordered pair of messages, pairs in lexicographic order."""
    if k < 2:
        raise DomainError(f"a fully-connected system needs K >= 2, got {k}")
    dbs = tuple(combinations(range(1, k + 1), 2))
    return StorageSystem(k, k - 1, 2, len(dbs), dbs)


def databases_containing(system: StorageSystem, message: int) -> frozenset[int]:
    if not 1 <= message <= system.k:
        raise DomainError(f"message {message} outside [1..{system.k}]")
    return frozenset(i for i, db in enumerate(system.databases, start=1) if message in db)


def random_messages(system: StorageSystem, q: FieldSpec, l: int, seed: int) -> MessageStore:
    """K messages of L i.i.d. uniform symbols, reproducible from ``seed``."""
    if l < 1:
        raise DomainError(f"message length must be >= 1, got {l}")
    rng = np.random.default_rng(seed)
    data = rng.integers(0, q.q, size=(system.k, l))
    return MessageStore(q, l, tuple(tuple(int(x) for x in row) for row in data))


def zero_messages(system: StorageSystem, q: FieldSpec, l: int) -> MessageStore:
    return MessageStore(q, l, tuple((0,) * l for _ in range(system.k)))


def system_from_dict(data) -> StorageSystem:
    if not isinstance(data, dict):
        raise SpecFormatError("top level: expected a JSON object")
    values = {}
    for key in ("k", "r", "m", "n"):
        if key not in data:
            raise SpecFormatError(f"field '{key}': missing")
        v = data[key]
        if not isinstance(v, int) or isinstance(v, bool):
            raise SpecFormatError(f"field '{key}': expected an integer, got {v!r}")
        values[key] = v
    if "databases" not in data:
        raise SpecFormatError("field 'databases': missing")
    raw = data["databases"]
    if not isinstance(raw, list):
        raise SpecFormatError("field 'databases': expected an array")
    dbs = []
    for i, db in enumerate(raw):
        if not isinstance(db, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in db):
            raise SpecFormatError(f"field 'databases'[{i}]: expected an array of integers, got {db!r}")
        dbs.append(tuple(db))
    return StorageSystem(values["k"], values["r"], values["m"], values["n"], tuple(dbs))


def load_spec(path: PathLike) -> StorageSystem:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return system_from_dict(data)


def dumps_spec(system: StorageSystem) -> str:
    return json.dumps(system.to_dict()) + "\n"


def save_spec(system: StorageSystem, path: PathLike) -> None:
    Path(path).write_text(dumps_spec(system), encoding="utf-8")


# Reference systems used throughout the tests and the CLI demos.
COMPLETE_BIPARTITE_3_3 = StorageSystem(
    6, 3, 2, 9,
    ((1, 2), (1, 4), (1, 6), (2, 3), (2, 5), (3, 4), (3, 6), (4, 5), (5, 6)),
)
TRIANGLE = StorageSystem(3, 2, 2, 3, ((1, 2), (1, 3), (2, 3)))
THREE_PER_DATABASE = StorageSystem(
    6, 2, 3, 4,
    ((1, 2, 5), (1, 4, 6), (2, 3, 6), (3, 4, 5)),
)
