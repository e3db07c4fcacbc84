"""Exact scalar arithmetic: rational parsing/formatting and quadratic surds.

Counting regions in this package are defined by inequalities whose sides live
in Q or in a real quadratic field Q(sqrt(d)).  Keeping every comparison exact
is the whole point of the design (no floating-point boundary misclassification),
so the helpers here decide signs of p + q*sqrt(d) by integer sign analysis and
squaring instead of calling sqrt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError


def parse_rational(value) -> Fraction:
    """Parse a rational from an int, Fraction, or a "p/q" string.

    Floats are rejected: config files must spell rationals exactly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError("cannot parse rational from %r" % (value,)) from exc
    raise InputError("cannot parse rational from %r (floats are not accepted)" % (value,))


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)


def sqrt_exact(q: Fraction):
    """Return sqrt(q) as a Fraction when q is a perfect rational square, else None."""
    q = Fraction(q)
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def _sign_p_plus_q_sqrt_d(p: Fraction, q: Fraction, d: Fraction) -> int:
    """Sign of p + q*sqrt(d) for rationals p, q and d >= 0, computed exactly."""
    if q == 0 or d == 0:
        return -1 if p < 0 else (1 if p > 0 else 0)
    if p == 0:
        return -1 if q < 0 else 1
    if p > 0 and q > 0:
        return 1
    if p < 0 and q < 0:
        return -1
    # Mixed signs: compare p^2 with q^2 d; the larger magnitude wins.
    lhs = p * p
    rhs = q * q * d
    if lhs == rhs:
        return 0
    if lhs > rhs:
        return 1 if p > 0 else -1
    return 1 if q > 0 else -1


@dataclass(frozen=True)
class Surd:
    """The real number p + q*sqrt(d), with p, q, d rational and d >= 0.

    Closed under addition, subtraction and multiplication (for matching d),
    and totally ordered against rationals and other Surds with the same d,
    all exactly.
    """

    p: Fraction
    q: Fraction
    d: Fraction

    @staticmethod
    def rational(p, d=Fraction(0)) -> "Surd":
        return Surd(Fraction(p), Fraction(0), Fraction(d))

    def is_rational(self) -> bool:
        return self.q == 0 or self.d == 0 or sqrt_exact(self.d) is not None

    def as_fraction(self) -> Fraction:
        """Exact rational value; raises if the surd part is irrational."""
        if self.q == 0 or self.d == 0:
            return self.p
        root = sqrt_exact(self.d)
        if root is None:
            raise InputError("value %s is irrational" % (self,))
        return self.p + self.q * root

    def __float__(self) -> float:
        return float(self.p) + float(self.q) * math.sqrt(float(self.d))

    def _coerce(self, other) -> "Surd":
        if isinstance(other, Surd):
            if other.d != self.d and other.q != 0 and self.q != 0:
                raise InputError("cannot mix surds over different radicands")
            return Surd(other.p, other.q, self.d if self.q != 0 else other.d)
        return Surd(Fraction(other), Fraction(0), self.d)

    def __add__(self, other):
        o = self._coerce(other)
        return Surd(self.p + o.p, self.q + o.q, o.d)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.p, -self.q, self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        o = self._coerce(other)
        return Surd(
            self.p * o.p + self.q * o.q * o.d,
            self.p * o.q + self.q * o.p,
            o.d,
        )

    __rmul__ = __mul__

    def sign(self) -> int:
        return _sign_p_plus_q_sqrt_d(self.p, self.q, self.d)

    def _cmp(self, other) -> int:
        return (self - self._coerce(other)).sign()

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except InputError:
            return NotImplemented

    def __hash__(self):
        if self.q == 0:
            return hash(self.p)
        return hash((self.p, self.q, self.d))

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __repr__(self):
        if self.q == 0:
            return "Surd(%s)" % (self.p,)
        return "Surd(%s + %s*sqrt(%s))" % (self.p, self.q, self.d)


def surd_le(a: int, s: int, D: int, c: int) -> bool:
    """Decide a + s*sqrt(D) <= c exactly, for integers with D >= 0.

    This is the hot comparison in the enumeration leaves, so it is pure
    integer sign analysis plus one squaring, no Fraction or float objects.
    """
    r = c - a
    if s == 0 or D == 0:
        return r >= 0
    if s > 0:
        return r >= 0 and s * s * D <= r * r
    if r >= 0:
        return True
    return s * s * D >= r * r
