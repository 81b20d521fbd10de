"""Prime-field arithmetic and exact linear algebra over F_q.

Everything here is exact big-integer math: no tolerances exist anywhere.
All values are immutable and every function is pure, so concurrent use
needs no synchronization.
"""

from __future__ import annotations

import random
from typing import Iterable, Optional, Sequence, Union

from .errors import NoSolution, Underdetermined

# Mersenne prime 2^127 - 1: fast reduction, comfortably above any chunk value.
DEFAULT_MODULUS = 2**127 - 1

MILLER_RABIN_ROUNDS = 64

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_probable_prime(n: int, rounds: int = MILLER_RABIN_ROUNDS,
                      rng: Optional[random.Random] = None) -> bool:
    """Miller-Rabin with `rounds` random bases (error < 4^-rounds)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    rng = rng or random.Random(0xC0FFEE ^ n)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def deterministic_rng(seed: int) -> random.Random:
    """Seeded generator for reproducible runs and tests."""
    return random.Random(seed)


def crypto_rng() -> random.SystemRandom:
    """OS-backed source; the default for actual dealing."""
    return random.SystemRandom()


class FieldElement:
    """An element of F_q in canonical representation (0 <= value < q)."""

    __slots__ = ("value", "modulus")

    def __init__(self, value: int, modulus: int):
        object.__setattr__(self, "value", value % modulus)
        object.__setattr__(self, "modulus", modulus)

    def __setattr__(self, name, val):
        raise AttributeError("FieldElement is immutable")

    def _check(self, other: "FieldElement") -> None:
        if self.modulus != other.modulus:
            raise ValueError(
                f"modulus mismatch: {self.modulus} vs {other.modulus}")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.value + other.value, self.modulus)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.value - other.value, self.modulus)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.value * other.value, self.modulus)

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.value, self.modulus)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero")
        return FieldElement(pow(self.value, -1, self.modulus), self.modulus)

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return self * other.inverse()

    def __eq__(self, other) -> bool:
        return (isinstance(other, FieldElement)
                and self.modulus == other.modulus
                and self.value == other.value)

    def __hash__(self) -> int:
        return hash((self.value, self.modulus))

    def __repr__(self) -> str:
        return f"FieldElement({self.value} mod {self.modulus})"

    def is_zero(self) -> bool:
        return self.value == 0

    def to_hex(self) -> str:
        """Lowercase big-endian hex, no leading zeros ('0' for zero)."""
        return format(self.value, "x")

    @classmethod
    def from_hex(cls, text: str, modulus: int) -> "FieldElement":
        value = int(text, 16)
        if value >= modulus or value < 0:
            raise ValueError(f"value {text} out of range for modulus")
        return cls(value, modulus)


def random_element(modulus: int, rng) -> FieldElement:
    """Uniform draw via rejection sampling (no modulo bias)."""
    bits = modulus.bit_length()
    while True:
        v = rng.getrandbits(bits)
        if v < modulus:
            return FieldElement(v, modulus)


def random_nonzero(modulus: int, rng) -> FieldElement:
    while True:
        e = random_element(modulus, rng)
        if not e.is_zero():
            return e


Entry = Union[int, FieldElement]


def _to_int(e: Entry, modulus: int) -> int:
    if isinstance(e, FieldElement):
        if e.modulus != modulus:
            raise ValueError("modulus mismatch in matrix entry")
        return e.value
    return e % modulus


class Matrix:
    """Row-major matrix over F_q. Immutable once built."""

    __slots__ = ("rows", "cols", "modulus", "_rows")

    def __init__(self, entries: Sequence[Sequence[Entry]], modulus: int,
                 cols: Optional[int] = None):
        rows = [[_to_int(e, modulus) for e in row] for row in entries]
        if rows:
            cols = len(rows[0]) if cols is None else cols
            if any(len(r) != cols for r in rows):
                raise ValueError("ragged matrix rows")
        elif cols is None:
            raise ValueError("empty matrix needs an explicit column count")
        self._init("_rows", rows)
        self._init("rows", len(rows))
        self._init("cols", cols)
        self._init("modulus", modulus)

    def _init(self, name, val):
        object.__setattr__(self, name, val)

    def __setattr__(self, name, val):
        raise AttributeError("Matrix is immutable")

    def row(self, i: int) -> list:
        return [FieldElement(v, self.modulus) for v in self._rows[i]]

    def rank(self) -> int:
        return len(_eliminate(self._rows, self.modulus))

    def solve(self, rhs: Sequence[Entry]) -> list:
        """Unique solution of self * x = rhs, as FieldElements.

        Raises NoSolution for an inconsistent system and Underdetermined
        when the solution is not unique.
        """
        if len(rhs) != self.rows:
            raise ValueError("rhs length does not match row count")
        q = self.modulus
        b = [_to_int(e, q) for e in rhs]
        aug = [row + [bv] for row, bv in zip(self._rows, b)]
        pivots = _eliminate(aug, q)
        # A pivot in the rhs column means 0 = nonzero.
        for col, row in pivots:
            if col == self.cols:
                raise NoSolution("inconsistent system")
        if len(pivots) < self.cols:
            raise Underdetermined("rank below column count")
        sol = [0] * self.cols
        for col, row in pivots:
            sol[col] = row[self.cols]
        return [FieldElement(v, q) for v in sol]

    def in_row_span(self, v: Sequence[Entry]) -> bool:
        return self.express_in_row_span(v) is not None

    def express_in_row_span(self, v: Sequence[Entry]) -> Optional[list]:
        """Coefficients c (one per row) with sum(c_i * row_i) = v, or None."""
        if len(v) != self.cols:
            raise ValueError("vector length does not match column count")
        q = self.modulus
        combo = express_over_rows(self._rows,
                                  [_to_int(e, q) for e in v], q)
        if combo is None:
            return None
        return [FieldElement(c, q) for c in combo]


def _eliminate(rows: Iterable[Sequence[int]], q: int) -> list:
    """Forward elimination; returns [(pivot_col, reduced_row), ...].

    Exact arithmetic: the pivot is simply the first nonzero entry.
    """
    pivots = []
    for row in rows:
        row = list(row)
        for col, prow in pivots:
            f = row[col]
            if f:
                row = [(a - f * b) % q for a, b in zip(row, prow)]
        for col, a in enumerate(row):
            if a:
                inv = pow(a, -1, q)
                row = [x * inv % q for x in row]
                # Clear the new pivot column from earlier pivot rows so the
                # result is fully reduced (solve reads it off directly).
                for k, (pcol, prow) in enumerate(pivots):
                    f = prow[col]
                    if f:
                        pivots[k] = (pcol, [(a2 - f * b2) % q
                                            for a2, b2 in zip(prow, row)])
                pivots.append((col, row))
                break
    return pivots


def express_over_rows(rows: Sequence[Sequence[int]], v: Sequence[int],
                      q: int) -> Optional[list]:
    """Int-level core of express_in_row_span (reused by hot paths).

    Tracks each pivot row's expansion over the original rows, then
    reduces v; returns the combination or None when v is outside the span.
    """
    n = len(rows)
    pivots = []  # (pivot_col, row, combo over original rows)
    for i, row in enumerate(rows):
        row = list(row)
        combo = [0] * n
        combo[i] = 1
        for col, prow, pcombo in pivots:
            f = row[col]
            if f:
                row = [(a - f * b) % q for a, b in zip(row, prow)]
                combo = [(a - f * b) % q for a, b in zip(combo, pcombo)]
        for col, a in enumerate(row):
            if a:
                inv = pow(a, -1, q)
                row = [x * inv % q for x in row]
                combo = [x * inv % q for x in combo]
                pivots.append((col, row, combo))
                break
    res = [x % q for x in v]
    out = [0] * n
    for col, prow, pcombo in pivots:
        f = res[col]
        if f:
            res = [(a - f * b) % q for a, b in zip(res, prow)]
            out = [(a + f * b) % q for a, b in zip(out, pcombo)]
    if any(res):
        return None
    return out
