"""Exact arithmetic and linear algebra over prime fields F_q.

Matrices are held as read-only ``int64`` numpy arrays. Every product of two
reduced entries must fit in 63 bits, so the modulus is capped below 2**31.
Elimination always picks the first nonzero entry of a column as pivot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, NoUniqueSolution

MAX_MODULUS = 2**31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def next_prime_above(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    p = max(n + 1, 2)
    while not is_prime(p):
        p += 1
    return p


@dataclass(frozen=True)
class FieldSpec:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or self.q < 2:
            raise DomainError(f"field modulus must be an integer >= 2, got {self.q!r}")
        if self.q >= MAX_MODULUS:
            raise DomainError(f"field modulus {self.q} exceeds supported maximum {MAX_MODULUS - 1}")
        if not is_prime(int(self.q)):
            raise DomainError(f"field modulus {self.q} is not prime")
        object.__setattr__(self, "q", int(self.q))

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise DomainError(f"{a} is not an element of F_{self.q}")
        return int(a)


def gf_add(spec: FieldSpec, a: int, b: int) -> int:
    return (spec.check(a) + spec.check(b)) % spec.q


def gf_sub(spec: FieldSpec, a: int, b: int) -> int:
    return (spec.check(a) - spec.check(b)) % spec.q


def gf_mul(spec: FieldSpec, a: int, b: int) -> int:
    return (spec.check(a) * spec.check(b)) % spec.q


def gf_inv(spec: FieldSpec, a: int) -> int:
    spec.check(a)
    if a == 0:
        raise DomainError("0 has no multiplicative inverse")
    return pow(int(a), -1, spec.q)


class GfMatrix:
    """Immutable dense matrix with entries in [0, q).

    The modulus is not stored; each operation validates entries against the
    ``FieldSpec`` it is given.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.int64)
        if a.ndim == 1 and a.size == 0:
            a = a.reshape(0, 0)
        if a.ndim != 2:
            raise DomainError(f"matrix entries must be two-dimensional, got shape {a.shape}")
        if a.size and a.min() < 0:
            raise DomainError("matrix entries must be non-negative")
        a.setflags(write=False)
        self._a = a

    @classmethod
    def from_flat(cls, rows: int, cols: int, entries: Sequence[int]) -> "GfMatrix":
        if rows * cols != len(entries):
            raise DomainError(f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}")
        return cls(np.array(entries, dtype=np.int64).reshape(rows, cols))

    @classmethod
    def identity(cls, n: int) -> "GfMatrix":
        return cls(np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def entries(self) -> tuple[int, ...]:
        """Row-major entries."""
        return tuple(int(x) for x in self._a.ravel())

    def array(self) -> np.ndarray:
        """Read-only view of the underlying array."""
        return self._a

    def tolist(self) -> list[list[int]]:
        return self._a.tolist()

    def __eq__(self, other):
        if not isinstance(other, GfMatrix):
            return NotImplemented
        return self._a.shape == other._a.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self):
        return hash((self._a.shape, self._a.tobytes()))

    def __repr__(self):
        return f"GfMatrix({self.tolist()!r})"


def _checked(spec: FieldSpec, m: GfMatrix) -> np.ndarray:
    a = m.array()
    if a.size and a.max() >= spec.q:
        raise DomainError(f"matrix entry {int(a.max())} is not an element of F_{spec.q}")
    return a


def _checked_vector(spec: FieldSpec, v: Iterable[int]) -> np.ndarray:
    arr = np.array(list(v), dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= spec.q):
        raise DomainError(f"vector has entries outside F_{spec.q}")
    return arr


def rref(q: int, a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``a`` over F_q.

    Returns a new array and the list of pivot columns. Pivot rows come first,
    in pivot order, each with a leading 1.
    """
    a = np.array(a, dtype=np.int64) % q
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        inv = pow(int(a[r, c]), -1, q)
        if inv != 1:
            a[r] = (a[r] * inv) % q
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % q
        pivots.append(c)
        r += 1
    return a, pivots


def mat_rank(spec: FieldSpec, m: GfMatrix) -> int:
    a = _checked(spec, m)
    if a.size == 0:
        return 0
    return len(rref(spec.q, a)[1])


def mat_vec(spec: FieldSpec, m: GfMatrix, x: Sequence[int]) -> tuple[int, ...]:
    a = _checked(spec, m)
    xv = _checked_vector(spec, x)
    if a.shape[1] != xv.size:
        raise DomainError(f"cannot multiply {a.shape[0]}x{a.shape[1]} matrix by length-{xv.size} vector")
    return tuple(int(v) for v in (a @ xv) % spec.q)


def solve_system(spec: FieldSpec, a: GfMatrix, b: Sequence[int]) -> tuple[int, ...]:
    """Unique solution of ``a x = b`` over F_q.

    Raises ``NoUniqueSolution`` with ``kind`` set to ``"inconsistent"`` when no
    solution exists and ``"underdetermined"`` when several do.
    """
    arr = _checked(spec, a)
    bv = _checked_vector(spec, b)
    if arr.shape[0] != bv.size:
        raise DomainError(f"matrix has {arr.shape[0]} rows but right-hand side has length {bv.size}")
    n = arr.shape[1]
    aug = np.concatenate([arr, bv.reshape(-1, 1)], axis=1)
    red, pivots = rref(spec.q, aug)
    rank = sum(1 for p in pivots if p < n)
    if n in pivots:
        raise NoUniqueSolution("inconsistent", rank, n)
    if rank < n:
        raise NoUniqueSolution("underdetermined", rank, n)
    return tuple(int(v) for v in red[:n, n])


def rowspace_contains(spec: FieldSpec, a: GfMatrix, v: Sequence[int]) -> bool:
    arr = _checked(spec, a)
    vv = _checked_vector(spec, v)
    if arr.shape[1] != vv.size:
        raise DomainError(f"vector of length {vv.size} does not match {arr.shape[1]} columns")
    if not vv.any():
        return True
    if arr.shape[0] == 0:
        return False
    red, pivots = rref(spec.q, arr)
    residual = vv.copy()
    for i, c in enumerate(pivots):
        if residual[c]:
            residual = (residual - residual[c] * red[i]) % spec.q
    return not residual.any()
