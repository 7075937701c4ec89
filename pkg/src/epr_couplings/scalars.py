"""Exact arithmetic over the field Q[sqrt(2)], with an approximate float mode.

A :class:`Scalar` is either *exact* -- the value ``a + b*sqrt(2)`` with
rational ``a``, ``b`` -- or *approximate* -- a float compared up to a
tolerance.  Exact scalars form an ordered field: all four arithmetic
operations stay inside Q[sqrt(2)] and the sign of any value is decided
exactly (no floating point is ever consulted).  This is what makes boundary
classifications (values like ``(1+sqrt2)/2`` landing exactly on a face)
deterministic.

Mixing exact and approximate operands is an error; convert explicitly with
:meth:`Scalar.to_approximate` or :meth:`Scalar.to_float`.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

__all__ = [
    "Scalar",
    "ScalarModeError",
    "ScalarParseError",
    "compare",
    "as_scalar",
    "DEFAULT_TOLERANCE",
    "ZERO",
    "ONE",
    "HALF",
    "SQRT2",
]

#: Tolerance used for comparisons between approximate scalars.
DEFAULT_TOLERANCE = 1e-9


class ScalarModeError(TypeError):
    """Raised when exact and approximate scalars are combined implicitly."""


class ScalarParseError(ValueError):
    """Raised when a scalar expression cannot be parsed."""


def _sign_quadratic(a: Fraction, b: Fraction) -> int:
    """Exact sign of a + b*sqrt(2)."""
    if not b:
        return (a > 0) - (a < 0)
    if not a:
        return 1 if b > 0 else -1
    sa = 1 if a > 0 else -1
    sb = 1 if b > 0 else -1
    if sa == sb:
        return sa
    # Opposite signs: |a| vs |b|*sqrt(2) reduces to a^2 vs 2*b^2.
    # a^2 == 2*b^2 is impossible for nonzero rationals (sqrt(2) irrational).
    d = a * a - 2 * b * b
    return sa * (1 if d > 0 else -1)


class Scalar:
    """Immutable number from Q[sqrt(2)] (exact) or a toleranced float."""

    __slots__ = ("_a", "_b", "_value")

    _a: Fraction | None
    _b: Fraction | None
    _value: float | None

    def __init__(self, a: Fraction | int = 0, b: Fraction | int = 0):
        object.__setattr__(self, "_a", Fraction(a))
        object.__setattr__(self, "_b", Fraction(b))
        object.__setattr__(self, "_value", None)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("Scalar is immutable")

    def __reduce__(self):
        if self._value is None:
            return (Scalar, (self._a, self._b))
        return (Scalar.approximate, (self._value,))

    # -- constructors -----------------------------------------------------

    @classmethod
    def rational(cls, num, den=None) -> Scalar:
        """Exact rational scalar, e.g. ``Scalar.rational(1, 4)``."""
        return cls(Fraction(num) if den is None else Fraction(num, den))

    @classmethod
    def quadratic(cls, a, b) -> Scalar:
        """Exact scalar a + b*sqrt(2)."""
        return cls(Fraction(a), Fraction(b))

    @classmethod
    def approximate(cls, value: float) -> Scalar:
        """Approximate (float) scalar, compared up to DEFAULT_TOLERANCE."""
        s = object.__new__(cls)
        object.__setattr__(s, "_a", None)
        object.__setattr__(s, "_b", None)
        object.__setattr__(s, "_value", float(value))
        return s

    # -- mode and accessors ------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self._value is None

    @property
    def is_rational(self) -> bool:
        return self._value is None and not self._b

    @property
    def a(self) -> Fraction:
        """Rational part (exact scalars only)."""
        if self._a is None:
            raise ScalarModeError("approximate scalar has no rational part")
        return self._a

    @property
    def b(self) -> Fraction:
        """Coefficient of sqrt(2) (exact scalars only)."""
        if self._b is None:
            raise ScalarModeError("approximate scalar has no sqrt(2) part")
        return self._b

    def as_fraction(self) -> Fraction:
        """The value as a Fraction; requires an exact rational scalar."""
        if not self.is_exact:
            raise ScalarModeError("approximate scalar is not a fraction")
        if self._b:
            raise ValueError(f"{self} has an irrational part")
        return self._a

    def to_float(self) -> float:
        if self._value is not None:
            return self._value
        return float(self._a) + float(self._b) * math.sqrt(2)

    def to_approximate(self) -> Scalar:
        """Explicit conversion to approximate mode."""
        return Scalar.approximate(self.to_float())

    def __float__(self) -> float:
        return self.to_float()

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "Scalar | None":
        if isinstance(other, Scalar):
            if self.is_exact != other.is_exact:
                raise ScalarModeError(
                    "cannot combine exact and approximate scalars implicitly; "
                    "convert with to_approximate()"
                )
            return other
        if isinstance(other, (int, Fraction)):
            if self.is_exact:
                return Scalar(Fraction(other))
            return Scalar.approximate(float(other))
        if isinstance(other, float):
            if self.is_exact:
                raise ScalarModeError(
                    "cannot combine an exact scalar with a float implicitly; "
                    "convert with to_approximate()"
                )
            return Scalar.approximate(other)
        return None

    def __add__(self, other) -> Scalar:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_exact:
            return Scalar(self._a + o._a, self._b + o._b)
        return Scalar.approximate(self._value + o._value)

    __radd__ = __add__

    def __neg__(self) -> Scalar:
        if self.is_exact:
            return Scalar(-self._a, -self._b)
        return Scalar.approximate(-self._value)

    def __pos__(self) -> Scalar:
        return self

    def __sub__(self, other) -> Scalar:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_exact:
            return Scalar(self._a - o._a, self._b - o._b)
        return Scalar.approximate(self._value - o._value)

    def __rsub__(self, other) -> Scalar:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other) -> Scalar:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_exact:
            return Scalar(
                self._a * o._a + 2 * self._b * o._b,
                self._a * o._b + self._b * o._a,
            )
        return Scalar.approximate(self._value * o._value)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Scalar:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self.is_exact:
            return Scalar.approximate(self._value / o._value)
        norm = o._a * o._a - 2 * o._b * o._b
        if not norm:
            raise ZeroDivisionError("division by zero scalar")
        # 1/(c + d*sqrt2) = (c - d*sqrt2)/(c^2 - 2 d^2)
        inv_a = o._a / norm
        inv_b = -o._b / norm
        return self * Scalar(inv_a, inv_b)

    def __rtruediv__(self, other) -> Scalar:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __abs__(self) -> Scalar:
        return -self if self.sign() < 0 else self

    # -- comparisons ---------------------------------------------------------

    def sign(self) -> int:
        """Exact sign for exact scalars; raw float sign otherwise."""
        if self.is_exact:
            return _sign_quadratic(self._a, self._b)
        return (self._value > 0) - (self._value < 0)

    def compare(self, other, tol: float | None = None) -> int:
        """-1, 0 or +1.  Approximate pairs are equal when |x-y| <= tol."""
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare Scalar with {type(other).__name__}")
        if self.is_exact:
            return (self - o).sign()
        t = DEFAULT_TOLERANCE if tol is None else tol
        d = self._value - o._value
        if abs(d) <= t:
            return 0
        return 1 if d > 0 else -1

    def _cmp_or_notimpl(self, other):
        try:
            return self.compare(other)
        except ScalarModeError:
            raise  # mode mixing must never degrade to identity comparison
        except TypeError:
            return NotImplemented

    def __eq__(self, other):
        c = self._cmp_or_notimpl(other)
        return NotImplemented if c is NotImplemented else c == 0

    def __ne__(self, other):
        c = self._cmp_or_notimpl(other)
        return NotImplemented if c is NotImplemented else c != 0

    def __lt__(self, other):
        c = self._cmp_or_notimpl(other)
        return NotImplemented if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp_or_notimpl(other)
        return NotImplemented if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp_or_notimpl(other)
        return NotImplemented if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp_or_notimpl(other)
        return NotImplemented if c is NotImplemented else c >= 0

    def __hash__(self):
        if not self.is_exact:
            raise TypeError("approximate scalars are unhashable")
        if not self._b:
            return hash(self._a)
        return hash((self._a, self._b))

    def __bool__(self) -> bool:
        if self.is_exact:
            return bool(self._a) or bool(self._b)
        return self._value != 0.0

    # -- text form -----------------------------------------------------------

    def __str__(self) -> str:
        if not self.is_exact:
            return repr(self._value)
        a, b = self._a, self._b
        if not b:
            return str(a)
        den = math.lcm(a.denominator, b.denominator)
        na = a.numerator * (den // a.denominator)
        nb = b.numerator * (den // b.denominator)
        if na == 0:
            body = f"{nb}*sqrt2"
        else:
            sign = "+" if nb > 0 else "-"
            body = f"{na}{sign}{abs(nb)}*sqrt2"
        if den == 1:
            return body
        return f"({body})/{den}"

    def __repr__(self) -> str:
        if self.is_exact:
            return f"Scalar('{self}')"
        return f"Scalar.approximate({self._value!r})"


ZERO = Scalar(0)
ONE = Scalar(1)
HALF = Scalar(Fraction(1, 2))
SQRT2 = Scalar(0, 1)


def compare(x, y, tol: float | None = None) -> int:
    """Three-way comparison of scalars (or ints/Fractions): -1, 0 or +1."""
    sx = as_scalar(x)
    return sx.compare(as_scalar(y) if not isinstance(y, Scalar) else y, tol=tol)


def as_scalar(value) -> Scalar:
    """Coerce ints, Fractions, floats and strings to Scalar.

    Floats and decimal strings become approximate scalars; everything else
    stays exact.
    """
    if isinstance(value, Scalar):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, (int, Fraction)):
        return Scalar(Fraction(value))
    if isinstance(value, float):
        return Scalar.approximate(value)
    if isinstance(value, str):
        return parse(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as Scalar")


# -- parsing ------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<dec>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)"
    r"|(?P<int>\d+)"
    r"|(?P<sqrt2>sqrt2)"
    r"|(?P<op>[-+*/()])"
    r")"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    has_decimal = False
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ScalarParseError(f"bad scalar syntax at {text[pos:]!r}")
        pos = m.end()
        if m.lastgroup == "dec":
            has_decimal = True
            tokens.append(("num", m.group("dec")))
        elif m.lastgroup == "int":
            tokens.append(("num", m.group("int")))
        elif m.lastgroup == "sqrt2":
            tokens.append(("sqrt2", "sqrt2"))
        else:
            tokens.append(("op", m.group("op")))
    if not tokens:
        raise ScalarParseError("empty scalar expression")
    return tokens, has_decimal


class _Parser:
    """Recursive-descent evaluator over either exact Scalars or floats."""

    def __init__(self, tokens, exact: bool):
        self.tokens = tokens
        self.pos = 0
        self.exact = exact

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self):
        value = self.expr()
        if self.pos != len(self.tokens):
            raise ScalarParseError(f"trailing input at token {self.pos}")
        return value

    def expr(self):
        value = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                try:
                    value = value / rhs
                except ZeroDivisionError:
                    raise ScalarParseError("division by zero in scalar expression")
        return value

    def factor(self):
        kind, text = self.take()
        if kind == "op" and text in "+-":
            inner = self.factor()
            return inner if text == "+" else -inner
        if kind == "op" and text == "(":
            value = self.expr()
            if self.take() != ("op", ")"):
                raise ScalarParseError("unbalanced parentheses")
            return value
        if kind == "num":
            return float(text) if not self.exact else Scalar(Fraction(int(text)))
        if kind == "sqrt2":
            return math.sqrt(2) if not self.exact else SQRT2
        raise ScalarParseError(f"unexpected token {text!r}")


def parse(text: str) -> Scalar:
    """Parse a scalar expression.

    Exact forms use integers, ``/``, ``*``, parentheses and the literal
    ``sqrt2``: ``"1/4"``, ``"(3-1*sqrt2)/2"``, ``"sqrt2/2"``.  Any decimal
    literal (``"0.25"``, ``"1e-3"``) switches the whole expression to
    approximate mode.
    """
    tokens, has_decimal = _tokenize(text)
    parser = _Parser(tokens, exact=not has_decimal)
    value = parser.parse()
    if has_decimal:
        return Scalar.approximate(value)
    return value
