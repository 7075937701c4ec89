import math
import random
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epr_couplings.scalars import (
    DEFAULT_TOLERANCE,
    SQRT2,
    Scalar,
    ScalarModeError,
    ScalarParseError,
    as_scalar,
    compare,
    parse,
)

rationals = st.fractions(
    min_value=Fraction(-50), max_value=Fraction(50), max_denominator=97
)
exact_scalars = st.builds(Scalar, rationals, rationals)


def test_compare_one_vs_sqrt2():
    assert compare(Scalar(1), SQRT2) == -1


def test_compare_zero_zero():
    assert compare(Scalar(0), Scalar(0)) == 0


def test_compare_tsirelson_constant_below_one():
    x = parse("(3-1*sqrt2)/2")
    assert compare(x, Scalar(1)) == -1
    assert x < 1


def test_parse_examples():
    assert parse("1/4") == Scalar(Fraction(1, 4))
    assert parse("0") == Scalar(0)
    assert parse("(3-1*sqrt2)/2") == Scalar.quadratic(Fraction(3, 2), Fraction(-1, 2))
    assert parse("sqrt2/2") == Scalar.quadratic(0, Fraction(1, 2))
    assert parse("-1*sqrt2") == Scalar.quadratic(0, -1)
    assert parse("2*(1+1*sqrt2)") == Scalar.quadratic(2, 2)


def test_parse_decimal_is_approximate():
    s = parse("0.25")
    assert not s.is_exact
    assert s.to_float() == 0.25
    assert not parse("1e-3").is_exact
    assert parse("2.5e-1").to_float() == 0.25


def test_parse_errors():
    for bad in ("", "1 +", "sqrt3", "(1", "1//2", "foo"):
        with pytest.raises(ScalarParseError):
            parse(bad)
    with pytest.raises(ScalarParseError):
        parse("1/0")


@given(exact_scalars)
@settings(max_examples=200)
def test_str_round_trip(x):
    assert parse(str(x)) == x


def test_mixing_modes_rejected():
    with pytest.raises(ScalarModeError):
        Scalar(1) + Scalar.approximate(1.0)
    with pytest.raises(ScalarModeError):
        compare(Scalar(1), Scalar.approximate(1.0))
    with pytest.raises(ScalarModeError):
        Scalar(1) * 0.5
    # explicit conversion is the sanctioned route
    assert Scalar(1).to_approximate() + Scalar.approximate(1.0) == 2


def test_mode_mixing_never_degrades_to_identity_equality():
    with pytest.raises(ScalarModeError):
        Scalar(1) == Scalar.approximate(1.0)
    with pytest.raises(ScalarModeError):
        Scalar(1) != Scalar.approximate(1.0)
    with pytest.raises(ScalarModeError):
        Scalar(1) < Scalar.approximate(2.0)
    # foreign types still take the normal equality path
    assert Scalar(1) != "one"
    assert not (Scalar(1) == object())


def test_approximate_tolerance():
    a = Scalar.approximate(0.1)
    b = Scalar.approximate(0.1 + DEFAULT_TOLERANCE / 2)
    c = Scalar.approximate(0.1 + 1e-6)
    assert a == b
    assert a != c
    assert a.compare(c, tol=1e-5) == 0


def test_division():
    x = (Scalar(1) + SQRT2) / (Scalar(3) - SQRT2)
    # (1+sqrt2)(3+sqrt2)/7 = (5+4 sqrt2)/7
    assert x == Scalar.quadratic(Fraction(5, 7), Fraction(4, 7))
    with pytest.raises(ZeroDivisionError):
        Scalar(1) / Scalar(0)


def test_abs_and_sign():
    assert abs(Scalar(1) - SQRT2) == SQRT2 - 1
    assert (Scalar(1) - SQRT2).sign() == -1
    assert Scalar(0).sign() == 0
    assert SQRT2.sign() == 1


def test_hash_exact_only():
    assert hash(Scalar(Fraction(1, 2))) == hash(Fraction(1, 2))
    with pytest.raises(TypeError):
        hash(Scalar.approximate(0.5))


def test_as_scalar_coercions():
    assert as_scalar(3) == Scalar(3)
    assert as_scalar(Fraction(1, 3)) == Scalar(Fraction(1, 3))
    assert not as_scalar(0.5).is_exact
    assert as_scalar("1/2") == Scalar(Fraction(1, 2))
    with pytest.raises(TypeError):
        as_scalar(True)
    with pytest.raises(TypeError):
        as_scalar(object())


@given(exact_scalars, exact_scalars, exact_scalars)
@settings(max_examples=300)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x
    assert x * y == y * x
    if y != 0:
        assert (x / y) * y == x


@given(exact_scalars, exact_scalars)
@settings(max_examples=300)
def test_ordering_consistent_with_arithmetic(x, y):
    d = (x - y).sign()
    assert compare(x, y) == d
    if d < 0:
        assert x < y and not x >= y
    elif d > 0:
        assert x > y
    else:
        assert x == y


def test_compare_agrees_with_high_precision_floats():
    """10^4 random pairs against a 60-digit decimal evaluation."""
    getcontext().prec = 60
    root2 = Decimal(2).sqrt()

    def dec(s):
        return (
            Decimal(s.a.numerator) / Decimal(s.a.denominator)
            + Decimal(s.b.numerator) / Decimal(s.b.denominator) * root2
        )

    rng = random.Random(20240229)
    for _ in range(10_000):
        x = Scalar(
            Fraction(rng.randint(-500, 500), rng.randint(1, 500)),
            Fraction(rng.randint(-500, 500), rng.randint(1, 500)),
        )
        y = Scalar(
            Fraction(rng.randint(-500, 500), rng.randint(1, 500)),
            Fraction(rng.randint(-500, 500), rng.randint(1, 500)),
        )
        dx, dy = dec(x), dec(y)
        want = 0 if dx == dy else (1 if dx > dy else -1)
        assert compare(x, y) == want


def test_float_conversion():
    x = parse("(3-1*sqrt2)/2")
    assert math.isclose(float(x), (3 - math.sqrt(2)) / 2, rel_tol=0, abs_tol=1e-15)
