"""Exact univariate polynomials over the rationals and Sturm root counting.

RationalPoly wraps a sympy Poly over QQ and hands coefficients and values back as
Fractions, which is what certificate witnesses carry.
"""
from fractions import Fraction
from typing import Any, Iterable, Optional, Union

import sympy as sp
from sympy import QQ, Poly

from .exceptions import DegenerateInputError

Number = Union[int, Fraction]

X = sp.Symbol("x")


def _rational(value: Any) -> sp.Rational:
    if isinstance(value, sp.Rational):
        return value
    value = Fraction(value)
    return sp.Rational(value.numerator, value.denominator)


def _fraction(value: sp.Rational) -> Fraction:
    value = sp.Rational(value)
    return Fraction(int(value.p), int(value.q))


class RationalPoly:
    """Coefficients in descending powers; the zero polynomial has no coefficients."""

    __slots__ = ("poly",)

    def __init__(self, coefficients: Iterable[Any] = ()):
        self.poly = Poly([_rational(c) for c in coefficients] or [0], X, domain=QQ)

    @classmethod
    def of(cls, *coefficients: Any) -> "RationalPoly":
        return cls(coefficients)

    @classmethod
    def from_poly(cls, poly: Poly) -> "RationalPoly":
        result = cls.__new__(cls)
        result.poly = poly.set_domain(QQ)
        return result

    @classmethod
    def from_roots(cls, roots: Iterable[Any]) -> "RationalPoly":
        """Get the monic polynomial prod (x - root)."""
        return cls.from_poly(Poly(sp.prod([X - _rational(root) for root in roots]), X, domain=QQ))

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        if self.is_zero:
            return ()
        return tuple(_fraction(c) for c in self.poly.all_coeffs())

    @property
    def degree(self) -> int:
        """Get the degree, -1 for the zero polynomial."""
        return -1 if self.is_zero else int(self.poly.degree())

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero

    @property
    def leading(self) -> Fraction:
        return _fraction(self.poly.LC())

    def __call__(self, x: Number) -> Fraction:
        return _fraction(self.poly.eval(_rational(x)))

    def derivative(self) -> "RationalPoly":
        return self.from_poly(self.poly.diff(X))

    def monic(self) -> "RationalPoly":
        if self.is_zero:
            raise DegenerateInputError("the zero polynomial has no monic form")
        return self.from_poly(self.poly.monic())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalPoly):
            return NotImplemented
        return self.poly == other.poly

    def __hash__(self) -> int:
        return hash(self.poly)

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        return self.from_poly(self.poly + other.poly)

    def __neg__(self) -> "RationalPoly":
        return self.from_poly(-self.poly)

    def __sub__(self, other: "RationalPoly") -> "RationalPoly":
        return self.from_poly(self.poly - other.poly)

    def __mul__(self, other: Union["RationalPoly", Number]) -> "RationalPoly":
        if isinstance(other, RationalPoly):
            return self.from_poly(self.poly * other.poly)
        return self.from_poly(self.poly * Poly(_rational(other), X, domain=QQ))

    __rmul__ = __mul__

    def __divmod__(self, other: "RationalPoly") -> tuple["RationalPoly", "RationalPoly"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        quotient, remainder = self.poly.div(other.poly)
        return self.from_poly(quotient), self.from_poly(remainder)

    def __mod__(self, other: "RationalPoly") -> "RationalPoly":
        return divmod(self, other)[1]

    def gcd(self, other: "RationalPoly") -> "RationalPoly":
        """Get the monic greatest common divisor (zero if both are zero)."""
        return self.from_poly(self.poly.gcd(other.poly))

    def squarefree(self) -> "RationalPoly":
        """Divide out repeated factors, keeping every distinct root once."""
        if self.degree < 1:
            return self
        return self.from_poly(self.poly.sqf_part()).monic()

    def __repr__(self) -> str:
        return f"RationalPoly({self})"

    def __str__(self) -> str:
        return sp.sstr(self.poly.as_expr())


def sturm_chain(p: RationalPoly) -> list[RationalPoly]:
    """Sturm sequence of the square-free part: p, p', then negated remainders."""
    if p.is_zero:
        raise DegenerateInputError("the zero polynomial has no Sturm sequence")
    return [RationalPoly.from_poly(poly) for poly in p.squarefree().poly.sturm()]


def sign_variations(values: Iterable[Fraction]) -> int:
    """Count sign changes, ignoring zeros."""
    signs = [value > 0 for value in values if value != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _variations_at_infinity(chain: list[RationalPoly], positive: bool) -> int:
    return sign_variations(
        poly.leading if positive or poly.degree % 2 == 0 else -poly.leading for poly in chain
    )


def sturm_real_root_count(p: RationalPoly, interval: Optional[tuple[Number, Number]] = None) -> int:
    """Count distinct real roots exactly.

    With an interval (a, b) the count covers the half-open range (a, b];
    otherwise the whole real line.
    """
    if p.is_zero:
        raise DegenerateInputError("the zero polynomial has infinitely many roots")
    chain = sturm_chain(p)
    if interval is None:
        return _variations_at_infinity(chain, False) - _variations_at_infinity(chain, True)

    a, b = (Fraction(bound) for bound in interval)
    if a >= b:
        raise ValueError(f"empty interval ({a}, {b}]")
    return sign_variations(poly(a) for poly in chain) - sign_variations(poly(b) for poly in chain)
