"""Exact dyadic rationals, rationals, intervals and boxes.

A :class:`Dyadic` is ``mantissa * 2**exponent`` held in canonical form
(odd mantissa, or the pair ``(0, 0)``), so structural equality is numeric
equality.  Rationals are plain :class:`fractions.Fraction` objects; every
dyadic registers as a :class:`numbers.Rational`, so mixed arithmetic and
comparisons with ``Fraction`` go through the exact embedding.
"""

from __future__ import annotations

import math
import numbers
import re
from fractions import Fraction

from .errors import ExponentOverflow, ParseError

ExactRational = Fraction

# exponent range of a signed machine word
EXP_MIN = -(2**63)
EXP_MAX = 2**63 - 1


def _trailing_zeros(m: int) -> int:
    return (m & -m).bit_length() - 1


class Dyadic:
    """An exact number ``mantissa * 2**exponent``."""

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        mantissa = int(mantissa)
        exponent = int(exponent)
        if mantissa == 0:
            exponent = 0
        else:
            tz = _trailing_zeros(mantissa)
            if tz:
                mantissa >>= tz
                exponent += tz
            if not EXP_MIN <= exponent <= EXP_MAX:
                raise ExponentOverflow(f"exponent {exponent} out of range")
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __reduce__(self):
        return (Dyadic, (self.mantissa, self.exponent))

    # -- construction ---------------------------------------------------

    @classmethod
    def coerce(cls, value) -> "Dyadic":
        """Convert ints, dyadic-valued Fractions and text to a Dyadic."""
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, bool):
            return cls(int(value))
        if isinstance(value, int):
            return cls(value)
        if isinstance(value, Fraction):
            return cls.from_fraction(value)
        if isinstance(value, str):
            return parse_dyadic(value)
        raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Dyadic":
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, -(den.bit_length() - 1))

    @classmethod
    def pow2(cls, e: int) -> "Dyadic":
        return cls(1, e)

    # -- Rational protocol ----------------------------------------------

    @property
    def numerator(self) -> int:
        return self.mantissa << self.exponent if self.exponent >= 0 else self.mantissa

    @property
    def denominator(self) -> int:
        return 1 << -self.exponent if self.exponent < 0 else 1

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return math.ldexp(float(self.mantissa), self.exponent) if abs(self.mantissa) < 2**53 \
            else float(self.to_fraction())

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    def scaled_int(self, e: int) -> int:
        """Return the integer k with ``self == k * 2**e``; ``e`` must be fine enough."""
        if self.mantissa == 0:
            return 0
        shift = self.exponent - e
        if shift < 0:
            raise ValueError(f"{self} is not a multiple of 2^{e}")
        return self.mantissa << shift

    def magnitude_bits(self) -> int:
        """Smallest a >= 0 with ``|self| <= 2**a``."""
        if self.mantissa == 0:
            return 0
        m = abs(self.mantissa)
        a = m.bit_length() + self.exponent
        if m == 1:
            a -= 1
        return max(a, 0)

    # -- arithmetic -----------------------------------------------------

    def _align(self, other: "Dyadic"):
        e = min(self.exponent, other.exponent)
        return self.mantissa << (self.exponent - e), other.mantissa << (other.exponent - e), e

    def __add__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        if self.mantissa == 0:
            return other
        if other.mantissa == 0:
            return self
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        if isinstance(other, int):
            return Dyadic(other) - self
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, int):
            other = Dyadic(other)
        elif not isinstance(other, Dyadic):
            return NotImplemented
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # division leaves the dyadics; the exact quotient is a Fraction
        if isinstance(other, (int, Dyadic)):
            return self.to_fraction() / Fraction(other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, int):
            return Fraction(other) / self.to_fraction()
        return NotImplemented

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __pos__(self):
        return self

    def __abs__(self):
        return self if self.mantissa >= 0 else -self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        return Dyadic(self.mantissa**k, self.exponent * k)

    def shift(self, k: int) -> "Dyadic":
        """Multiply by ``2**k`` exactly."""
        return Dyadic(self.mantissa, self.exponent + k) if self.mantissa else self

    # -- comparisons ----------------------------------------------------

    def compare(self, other) -> int:
        """Exact three-way comparison: -1, 0 or 1."""
        if isinstance(other, int):
            other = Dyadic(other)
        if isinstance(other, Dyadic):
            a, b, _ = self._align(other)
            return (a > b) - (a < b)
        q = self.to_fraction()
        return (q > other) - (q < other)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.compare(other) == 0
        return NotImplemented

    def __hash__(self):
        # agree with hash(Fraction) / hash(int) for equal values
        return hash(self.to_fraction()) if self.exponent < 0 else hash(self.numerator)

    def _rich(self, other, test):
        if isinstance(other, (int, Dyadic, Fraction)):
            return test(self.compare(other))
        return NotImplemented

    def __lt__(self, other):
        return self._rich(other, lambda c: c < 0)

    def __le__(self, other):
        return self._rich(other, lambda c: c <= 0)

    def __gt__(self, other):
        return self._rich(other, lambda c: c > 0)

    def __ge__(self, other):
        return self._rich(other, lambda c: c >= 0)

    def __bool__(self):
        return self.mantissa != 0

    # -- rounding -------------------------------------------------------

    def round(self, n: int) -> "Dyadic":
        """Nearest multiple of ``2**-n``, ties to the even multiple."""
        shift = -n - self.exponent
        if shift <= 0:
            return self
        q, r = divmod(self.mantissa, 1 << shift)
        half = 1 << (shift - 1)
        if r > half or (r == half and q & 1):
            q += 1
        return Dyadic(q, -n)

    def floor(self, n: int) -> "Dyadic":
        """Largest multiple of ``2**-n`` not above self."""
        shift = -n - self.exponent
        if shift <= 0:
            return self
        return Dyadic(self.mantissa >> shift, -n)

    def ceil(self, n: int) -> "Dyadic":
        shift = -n - self.exponent
        if shift <= 0:
            return self
        return Dyadic(-((-self.mantissa) >> shift), -n)

    # -- text -----------------------------------------------------------

    def __str__(self):
        return f"{self.mantissa}*2^{self.exponent}"

    def __repr__(self):
        return f"Dyadic({self.mantissa}, {self.exponent})"


numbers.Rational.register(Dyadic)

ZERO = Dyadic(0)
ONE = Dyadic(1)
HALF = Dyadic(1, -1)


def rational_floor(q: Fraction, n: int) -> Dyadic:
    """Largest multiple of ``2**-n`` that is <= q."""
    if n >= 0:
        return Dyadic((q.numerator << n) // q.denominator, -n)
    return Dyadic(q.numerator // (q.denominator << -n), -n)


def rational_ceil(q: Fraction, n: int) -> Dyadic:
    return -rational_floor(-q, n)


def rational_round(q: Fraction, n: int) -> Dyadic:
    """Nearest multiple of ``2**-n`` to q, ties to even."""
    lo = rational_floor(q, n)
    if lo == q:
        return lo
    hi = lo + Dyadic(1, -n)
    dlo = q - lo.to_fraction()
    dhi = hi.to_fraction() - q
    if dlo < dhi:
        return lo
    if dhi < dlo:
        return hi
    return lo if (lo.scaled_int(-n) & 1) == 0 else hi


def to_fraction(x) -> Fraction:
    if isinstance(x, Dyadic):
        return x.to_fraction()
    return Fraction(x)


# -- text forms -------------------------------------------------------------

_DYADIC_RE = re.compile(r"^\s*([+-]?\d+)\s*\*\s*2\s*\^\s*\(?\s*([+-]?\d+)\s*\)?\s*$")
_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse ``m*2^e``, ``p/q`` or an integer into an exact Fraction."""
    m = _DYADIC_RE.match(text)
    if m:
        return Dyadic(int(m.group(1)), int(m.group(2))).to_fraction()
    m = _FRACTION_RE.match(text)
    if m:
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise ParseError(f"zero denominator in {text!r}")
        return Fraction(int(m.group(1)), den)
    raise ParseError(f"not a number: {text!r}")


def parse_dyadic(text: str) -> Dyadic:
    """Parse ``m*2^e`` or ``p/q`` with q a power of two."""
    q = parse_rational(text)
    try:
        return Dyadic.from_fraction(q)
    except ValueError:
        raise ParseError(f"{text!r} is not a dyadic rational") from None


def format_rational(q) -> str:
    """Fraction text ``p/q``; always carries the denominator."""
    q = to_fraction(q)
    return f"{q.numerator}/{q.denominator}"


def format_number(q) -> str:
    """Canonical dyadic text when dyadic, otherwise ``p/q``."""
    if isinstance(q, Dyadic):
        return str(q)
    q = Fraction(q)
    den = q.denominator
    if den & (den - 1) == 0:
        return str(Dyadic.from_fraction(q))
    return format_rational(q)


# -- intervals --------------------------------------------------------------


class DyadicInterval:
    """Closed interval ``[lo, hi]`` with dyadic endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = Dyadic.coerce(lo)
        hi = lo if hi is None else Dyadic.coerce(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def around(cls, center: Dyadic, radius: Dyadic) -> "DyadicInterval":
        return cls(center - radius, center + radius)

    def width(self) -> Dyadic:
        return self.hi - self.lo

    def mid(self) -> Dyadic:
        return (self.lo + self.hi).shift(-1)

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return self.lo.sign() <= 0 <= self.hi.sign()

    def hull(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "DyadicInterval"):
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return DyadicInterval(lo, hi) if lo <= hi else None

    def outward(self, n: int) -> "DyadicInterval":
        """Smallest enclosing interval with endpoints on the ``2**-n`` grid."""
        return DyadicInterval(self.lo.floor(n), self.hi.ceil(n))

    def magnitude(self) -> Dyadic:
        return max(abs(self.lo), abs(self.hi))

    def __add__(self, other):
        return DyadicInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other):
        return DyadicInterval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self):
        return DyadicInterval(-self.hi, -self.lo)

    def __mul__(self, other):
        if self.lo.sign() >= 0 and other.lo.sign() >= 0:
            return DyadicInterval(self.lo * other.lo, self.hi * other.hi)
        ps = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return DyadicInterval(min(ps), max(ps))

    def __abs__(self):
        if self.lo.sign() >= 0:
            return self
        if self.hi.sign() <= 0:
            return -self
        return DyadicInterval(ZERO, max(-self.lo, self.hi))

    def __eq__(self, other):
        return isinstance(other, DyadicInterval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"

    def __repr__(self):
        return f"DyadicInterval({self.lo!r}, {self.hi!r})"


# -- points and boxes -------------------------------------------------------


class Point(tuple):
    """A point with dyadic coordinates (dimension 1 or 2 in practice)."""

    def __new__(cls, *coords):
        if len(coords) == 1 and not isinstance(coords[0], (int, str, Dyadic, Fraction)):
            coords = tuple(coords[0])
        if not coords:
            raise ValueError("a point needs at least one coordinate")
        return super().__new__(cls, (Dyadic.coerce(c) for c in coords))

    @property
    def dim(self) -> int:
        return len(self)

    def __add__(self, other):
        return Point(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        return Point(a - b for a, b in zip(self, other))

    def dist_sq(self, other) -> Dyadic:
        s = ZERO
        for a, b in zip(self, other):
            d = a - b
            s = s + d * d
        return s

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self) + ")"

    def __repr__(self):
        return "Point(" + ", ".join(repr(c) for c in self) + ")"


class Box:
    """Axis-aligned nonempty box: one DyadicInterval per axis."""

    __slots__ = ("axes",)

    def __init__(self, axes):
        axes = tuple(a if isinstance(a, DyadicInterval) else DyadicInterval(*a) for a in axes)
        if not axes:
            raise ValueError("a box needs at least one axis")
        self.axes = axes

    @classmethod
    def from_corners(cls, lo, hi) -> "Box":
        return cls(DyadicInterval(a, b) for a, b in zip(Point(lo), Point(hi)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def lo(self) -> Point:
        return Point(a.lo for a in self.axes)

    @property
    def hi(self) -> Point:
        return Point(a.hi for a in self.axes)

    def center(self) -> Point:
        return Point(a.mid() for a in self.axes)

    def diam_sq(self) -> Dyadic:
        s = ZERO
        for a in self.axes:
            w = a.width()
            s = s + w * w
        return s

    def contains(self, p) -> bool:
        return all(a.contains(c) for a, c in zip(self.axes, p))

    def contains_box(self, other: "Box") -> bool:
        return all(a.lo <= b.lo and b.hi <= a.hi for a, b in zip(self.axes, other.axes))

    def hull(self, other: "Box") -> "Box":
        return Box(a.hull(b) for a, b in zip(self.axes, other.axes))

    def corners(self):
        pts = [()]
        for a in self.axes:
            pts = [p + (c,) for p in pts for c in (a.lo, a.hi)]
        return [Point(p) for p in pts]

    def __eq__(self, other):
        return isinstance(other, Box) and self.axes == other.axes

    def __hash__(self):
        return hash(self.axes)

    def __str__(self):
        return " x ".join(str(a) for a in self.axes)

    def __repr__(self):
        return f"Box({list(self.axes)!r})"


def isqrt_floor(x: Dyadic, n: int) -> Dyadic:
    """Largest multiple of ``2**-n`` whose square is <= x (x >= 0)."""
    if x.sign() < 0:
        raise ValueError("square root of a negative number")
    # floor(sqrt(x) * 2^n) == isqrt(floor(x * 4^n))
    e = x.exponent + 2 * n
    scaled = x.mantissa << e if e >= 0 else x.mantissa >> -e
    return Dyadic(math.isqrt(scaled), -n)


def dyadic_sqrt_upper(x: Dyadic, n: int) -> Dyadic:
    """Smallest multiple of ``2**-n`` whose square is >= x (x >= 0)."""
    r = isqrt_floor(x, n)
    return r if r * r == x else r + Dyadic(1, -n)
