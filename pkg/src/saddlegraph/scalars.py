"""Exact arithmetic over Q(sqrt(d)) and the 2D linear algebra built on it.

Scalars are values a + b*sqrt(d) with rational a, b and a fixed square-free
d >= 1 (d = 1 means plain rationals; the b part is folded into a).  All sign
decisions are made by rational comparisons, never through floats.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import FieldMismatch, ParseError, SingularMatrix

_RAT_RE = re.compile(r"^([+-]?\d+)(?:/(-?\d+))?$")
_PAIR_RE = re.compile(r"^(-?\d+(?:/\d+)?)([+-]\d+(?:/\d+)?)r$")


def is_square_free(d):
    if d < 0:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"rational expected, got {type(x).__name__}")


_F0 = Fraction(0)


def _raw(a, b, d):
    """Internal constructor: operands are normalized Fractions already."""
    s = object.__new__(ExactScalar)
    object.__setattr__(s, "a", a)
    object.__setattr__(s, "b", b)
    object.__setattr__(s, "d", d)
    return s


def _raw_norm(a, b, d):
    if b:
        return _raw(a, b, d)
    return _raw(a, _F0, 1)


class ExactScalar:
    """Element a + b*sqrt(d) of Q(sqrt(d)), immutable and hashable."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d=1):
        a = _frac(a)
        b = _frac(b)
        if d in (0, 1):
            a, b, d = a + b * d, Fraction(0), 1
        elif b == 0:
            d = 1
        elif not is_square_free(d):
            raise ValueError(f"d={d} is not square-free")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, *args):
        raise AttributeError("ExactScalar is immutable")

    # -- field bookkeeping ------------------------------------------------

    @property
    def is_rational(self):
        return self.b == 0

    def _join(self, other):
        """Common field for a binary operation; rationals embed everywhere."""
        other = as_scalar(other)
        if self.d == other.d:
            return other, self.d
        if self.d == 1:
            return other, other.d
        if other.d == 1:
            return other, self.d
        raise FieldMismatch(f"cannot mix sqrt({self.d}) with sqrt({other.d})")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, ExactScalar):
            other = as_scalar(other)
        if self.d == other.d:
            return _raw_norm(self.a + other.a, self.b + other.b, self.d)
        other, d = self._join(other)
        return _raw_norm(self.a + other.a, self.b + other.b, d)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, ExactScalar):
            other = as_scalar(other)
        if self.d == other.d:
            return _raw_norm(self.a - other.a, self.b - other.b, self.d)
        other, d = self._join(other)
        return _raw_norm(self.a - other.a, self.b - other.b, d)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __mul__(self, other):
        if not isinstance(other, ExactScalar):
            other = as_scalar(other)
        sb, ob = self.b, other.b
        if not sb and not ob:
            return _raw(self.a * other.a, _F0, 1)
        other, d = self._join(other)
        if not sb:
            return _raw_norm(self.a * other.a, self.a * ob, d)
        if not ob:
            return _raw_norm(self.a * other.a, sb * other.a, d)
        return _raw_norm(
            self.a * other.a + sb * ob * d, self.a * ob + sb * other.a, d
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other, d = self._join(other)
        norm = other.a * other.a - other.b * other.b * d
        if norm == 0:
            if other.a == 0 and other.b == 0:
                raise ZeroDivisionError("division by zero scalar")
            # a^2 = b^2 d with d square-free > 1 forces a = b = 0
            raise ZeroDivisionError("division by zero scalar")
        inv_a = other.a / norm
        inv_b = -other.b / norm
        return self * ExactScalar(inv_a, inv_b, d)

    def __rtruediv__(self, other):
        return as_scalar(other) / self

    def __neg__(self):
        return ExactScalar(-self.a, -self.b, self.d)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise TypeError("only non-negative integer powers")
        out = ExactScalar(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- order -------------------------------------------------------------

    def sign(self):
        """Exact sign of a + b*sqrt(d); one squaring when a, b disagree."""
        a, b, d = self.a, self.b, self.d
        if not b:
            return (a > 0) - (a < 0)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        lhs = a * a
        rhs = b * b * d
        if a > 0:  # b < 0
            return (lhs > rhs) - (lhs < rhs)
        return (rhs > lhs) - (rhs < lhs)

    def __eq__(self, other):
        try:
            other, d = self._join(other)
        except (FieldMismatch, TypeError):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __bool__(self):
        return self.a != 0 or self.b != 0

    # -- conversion / formatting -------------------------------------------

    def __float__(self):
        # Rendering only; never used for decisions.
        return float(self.a) + float(self.b) * float(self.d) ** 0.5

    def text(self):
        """Canonical text form "p/q" or "p/q+p'/q'r"."""
        a = f"{self.a.numerator}/{self.a.denominator}"
        if self.b == 0:
            return a
        return f"{a}{'+' if self.b > 0 else '-'}{abs(self.b.numerator)}/{self.b.denominator}r"

    def pair(self):
        """Pair form [a, b] with "p/q" strings, as used by the file format."""
        return [
            f"{self.a.numerator}/{self.a.denominator}",
            f"{self.b.numerator}/{self.b.denominator}",
        ]

    def __repr__(self):
        return f"ExactScalar({self.text()}, d={self.d})"


ZERO = ExactScalar(0)
ONE = ExactScalar(1)


def as_scalar(x, d=1):
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactScalar(_frac(x), 0, 1)
    if isinstance(x, str):
        return parse_scalar(x, d)
    raise TypeError(f"cannot interpret {type(x).__name__} as scalar")


def parse_rational(text):
    m = _RAT_RE.match(text.strip())
    if not m:
        raise ParseError(f"bad rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def parse_scalar(text, d=1):
    """Parse "p/q" or "p/q+p'/q'r" (suffix r marks the sqrt(d) coefficient)."""
    text = text.strip()
    m = _PAIR_RE.match(text)
    if m:
        return ExactScalar(parse_rational(m.group(1)), parse_rational(m.group(2)), d)
    return ExactScalar(parse_rational(text), 0, 1)


def scalar_from_pair(pair, d):
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise ParseError(f"coordinate must be a [a, b] pair, got {pair!r}")
    return ExactScalar(parse_rational(str(pair[0])), parse_rational(str(pair[1])), d)


def scalar_sign(s):
    return as_scalar(s).sign()


def _vraw(x, y):
    v = object.__new__(Vec2)
    object.__setattr__(v, "x", x)
    object.__setattr__(v, "y", y)
    return v


class Vec2:
    """Exact plane vector / point."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        object.__setattr__(self, "x", as_scalar(x))
        object.__setattr__(self, "y", as_scalar(y))

    def __setattr__(self, *args):
        raise AttributeError("Vec2 is immutable")

    def __add__(self, other):
        return _vraw(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return _vraw(self.x - other.x, self.y - other.y)

    def __neg__(self):
        return _vraw(-self.x, -self.y)

    def __mul__(self, s):
        s = as_scalar(s)
        return _vraw(self.x * s, self.y * s)

    __rmul__ = __mul__

    def wedge(self, other):
        return self.x * other.y - self.y * other.x

    def dot(self, other):
        return self.x * other.x + self.y * other.y

    def len2(self):
        return self.x * self.x + self.y * self.y

    def rot90(self):
        """Counterclockwise quarter turn; stays in the field."""
        return _vraw(-self.y, self.x)

    def is_zero(self):
        return not self.x and not self.y

    def canonical(self):
        """Representative in R^2/{+-1}: y > 0, or y = 0 and x > 0."""
        sy = self.y.sign()
        if sy < 0 or (sy == 0 and self.x.sign() < 0):
            return -self
        return self

    def key(self):
        return (self.x.a, self.x.b, self.y.a, self.y.b)

    def text(self):
        return f"{self.x.text()},{self.y.text()}"

    def __eq__(self, other):
        if not isinstance(other, Vec2):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        return f"Vec2({self.x.text()}, {self.y.text()})"


def vec(x, y, d=1):
    return Vec2(as_scalar(x, d), as_scalar(y, d))


class Mat2:
    """Exact 2x2 matrix, row-major."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        object.__setattr__(self, "a", as_scalar(a))
        object.__setattr__(self, "b", as_scalar(b))
        object.__setattr__(self, "c", as_scalar(c))
        object.__setattr__(self, "d", as_scalar(d))

    def __setattr__(self, *args):
        raise AttributeError("Mat2 is immutable")

    @staticmethod
    def identity():
        return Mat2(1, 0, 0, 1)

    def apply(self, v):
        return Vec2(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)

    def __mul__(self, other):
        if isinstance(other, Vec2):
            return self.apply(other)
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def det(self):
        return self.a * self.d - self.b * self.c

    def inverse(self):
        dt = self.det()
        if dt.sign() == 0:
            raise SingularMatrix("determinant is zero")
        return Mat2(self.d / dt, -self.b / dt, -self.c / dt, self.a / dt)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def canonical_sign(self):
        """Normalize mod +-1: first nonzero entry positive."""
        for e in self.entries():
            s = e.sign()
            if s < 0:
                return -self
            if s > 0:
                return self
        return self

    def text(self):
        return f"{self.a.text()},{self.b.text()};{self.c.text()},{self.d.text()}"

    def __eq__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return self.entries() == other.entries()

    def __hash__(self):
        return hash(self.entries())

    def __repr__(self):
        return f"Mat2({self.text()})"


def parse_matrix(text, d=1):
    """Parse the "a,b;c,d" flag syntax with field-scalar entries."""
    rows = text.strip().split(";")
    if len(rows) != 2:
        raise ParseError(f"matrix needs two rows: {text!r}")
    ents = []
    for row in rows:
        cols = row.split(",")
        if len(cols) != 2:
            raise ParseError(f"matrix row needs two entries: {row!r}")
        ents.extend(parse_scalar(c, d) for c in cols)
    return Mat2(*ents)


def mat_apply(m, v):
    return m.apply(v)


def mat_inverse(m):
    return m.inverse()
