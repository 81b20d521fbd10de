"""Polynomials over F_q.

Covers evaluation, the formal derivative, random generation with a pinned
constant term, Lagrange interpolation at zero, and recovery from mixed
value/derivative constraints via a linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

from .errors import NoSolution, Underdetermined, UnsolvableConstraints
from .field import FieldElement, Matrix, random_element, random_nonzero


def _as_int(x: Union[int, FieldElement], modulus: int) -> int:
    if isinstance(x, FieldElement):
        if x.modulus != modulus:
            raise ValueError("modulus mismatch")
        return x.value
    return x % modulus


class Polynomial:
    """Coefficient vector over F_q; coeffs[i] multiplies X^i.

    Normalized: the trailing coefficient is nonzero unless the polynomial
    is zero, which is stored as the single coefficient (0,).
    """

    __slots__ = ("coeffs", "modulus")

    def __init__(self, coeffs: Sequence[Union[int, FieldElement]],
                 modulus: int):
        vals = [_as_int(c, modulus) for c in coeffs]
        while len(vals) > 1 and vals[-1] == 0:
            vals.pop()
        if not vals:
            vals = [0]
        object.__setattr__(self, "coeffs", tuple(vals))
        object.__setattr__(self, "modulus", modulus)

    def __setattr__(self, name, val):
        raise AttributeError("Polynomial is immutable")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Polynomial)
                and self.modulus == other.modulus
                and self.coeffs == other.coeffs)

    def __hash__(self) -> int:
        return hash((self.coeffs, self.modulus))

    def __repr__(self) -> str:
        return f"Polynomial({list(self.coeffs)} mod {self.modulus})"

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.modulus != other.modulus:
            raise ValueError("modulus mismatch")
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)], self.modulus)

    def scale(self, c: Union[int, FieldElement]) -> "Polynomial":
        cv = _as_int(c, self.modulus)
        return Polynomial([cv * x for x in self.coeffs], self.modulus)

    def evaluate(self, x: Union[int, FieldElement]) -> FieldElement:
        """Horner evaluation mod q."""
        xv = _as_int(x, self.modulus)
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * xv + c) % self.modulus
        return FieldElement(acc, self.modulus)

    def derivative(self) -> "Polynomial":
        """Formal derivative: coefficient i*c_i shifted down one slot."""
        if len(self.coeffs) == 1:
            return Polynomial([0], self.modulus)
        return Polynomial([i * c for i, c in enumerate(self.coeffs)][1:],
                          self.modulus)

    @classmethod
    def random(cls, degree: int, constant: Union[int, FieldElement],
               modulus: int, rng) -> "Polynomial":
        """Random polynomial of exactly `degree` with pinned constant term.

        The leading coefficient is drawn nonzero so declared and actual
        degree always agree (degree 0 is the constant itself).
        """
        if degree < 0:
            raise ValueError("degree must be >= 0")
        c0 = _as_int(constant, modulus)
        if degree == 0:
            return cls([c0], modulus)
        coeffs = [c0]
        coeffs += [random_element(modulus, rng).value
                   for _ in range(degree - 1)]
        coeffs.append(random_nonzero(modulus, rng).value)
        return cls(coeffs, modulus)


def lagrange_at_zero(points: Sequence[Tuple[FieldElement, FieldElement]]
                     ) -> FieldElement:
    """P(0) for the unique polynomial of degree < len(points) through them.

    x values must be distinct and nonzero (a share at 0 would be the
    secret itself).
    """
    return lagrange_eval(points, 0)


def lagrange_eval(points, at: Union[int, FieldElement]) -> FieldElement:
    if not points:
        raise ValueError("need at least one point")
    q = points[0][0].modulus
    at_v = _as_int(at, q)
    xs = [p[0].value for p in points]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate x coordinates")
    if at_v == 0 and 0 in xs:
        raise ValueError("interpolation point x=0 is not allowed")
    acc = 0
    for j, (xj, yj) in enumerate(points):
        num, den = 1, 1
        for m, xm in enumerate(xs):
            if m == j:
                continue
            num = num * (at_v - xm) % q
            den = den * (xj.value - xm) % q
        acc = (acc + yj.value * num * pow(den, -1, q)) % q
    return FieldElement(acc, q)


def lagrange_zero_weights(xs: Sequence[int], q: int) -> list:
    """Weights w_j with P(0) = sum(w_j * y_j); precomputable per x-set."""
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate x coordinates")
    if 0 in xs:
        raise ValueError("interpolation point x=0 is not allowed")
    weights = []
    for j, xj in enumerate(xs):
        num, den = 1, 1
        for m, xm in enumerate(xs):
            if m == j:
                continue
            num = num * (-xm) % q
            den = den * (xj - xm) % q
        weights.append(num * pow(den, -1, q) % q)
    return weights


@dataclass(frozen=True)
class BirkhoffConstraint:
    """One interpolation constraint: the value of P (order 0) or of its
    first derivative (order 1) at a point."""
    point: FieldElement
    order: int
    value: FieldElement

    def __post_init__(self):
        if self.order not in (0, 1):
            raise ValueError("order must be 0 or 1")


def birkhoff_matrix_row(point: int, order: int, degree: int, q: int) -> list:
    """Row of powers (order 0) or derivative-of-powers (order 1) for the
    unknown coefficient vector (a_0 .. a_degree)."""
    if order == 0:
        row, p = [], 1
        for _ in range(degree + 1):
            row.append(p)
            p = p * point % q
        return row
    row, p = [0], 1
    for i in range(1, degree + 1):
        row.append(i * p % q)
        p = p * point % q
    return row


def birkhoff_solve(constraints: Sequence[BirkhoffConstraint],
                   degree: int) -> Polynomial:
    """Recover the degree-`degree` polynomial meeting all constraints.

    Requires exactly degree+1 constraints. The same point may carry one
    order-0 and one order-1 constraint; exact (point, order) duplicates
    are rejected. Raises UnsolvableConstraints when the constraint matrix
    is singular.
    """
    if len(constraints) != degree + 1:
        raise ValueError("need exactly degree+1 constraints")
    q = constraints[0].point.modulus
    seen = set()
    for c in constraints:
        key = (c.point.value, c.order)
        if key in seen:
            raise ValueError(f"duplicate constraint at {key}")
        seen.add(key)
    rows = [birkhoff_matrix_row(c.point.value, c.order, degree, q)
            for c in constraints]
    rhs = [c.value for c in constraints]
    try:
        sol = Matrix(rows, q).solve(rhs)
    except (NoSolution, Underdetermined) as exc:
        raise UnsolvableConstraints("singular constraint matrix") from exc
    return Polynomial(sol, q)
