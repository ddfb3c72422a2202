import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from privcmp.numeric import (
    _below,
    Scalar,
    format_scalar,
    parse_scalar,
    sample_scalar,
    sign,
    to_scalar,
)

rationals = st.builds(
    Scalar,
    st.integers(min_value=-(2 ** 80), max_value=2 ** 80),
    st.integers(min_value=1, max_value=2 ** 80),
)


@pytest.mark.parametrize("x, expected", [
    (Scalar(3, 2), 1),
    (Scalar(0, 1), 0),
    (Scalar(-7, 3), -1),
])
def test_sign(x, expected):
    assert sign(x) == expected


def test_sample_nonzero_bounded():
    x = sample_scalar(random.Random(1), 8, nonzero=True)
    assert x != 0
    assert abs(x.numerator) <= 256


def test_sample_one_bit_grid():
    grid = {Scalar(n, d) for n in range(-2, 3) for d in (1, 2)}
    r = random.Random(5)
    draws = {sample_scalar(r, 1) for _ in range(500)}
    assert draws <= grid
    assert len(draws) == len(grid)


def test_sample_never_zero_when_nonzero():
    r = random.Random(9)
    assert sum(sample_scalar(r, 4, nonzero=True) == 0 for _ in range(10_000)) == 0


def test_sample_zero_appears_without_flag():
    # P(num = 0) = 1/33 with 4 bits, so 10^4 draws hit it many times.
    r = random.Random(9)
    assert sum(sample_scalar(r, 4) == 0 for _ in range(10_000)) > 100


@pytest.mark.parametrize("n", [1, 2, 5, 8, 33])
def test_below_uniform(n):
    r = random.Random(n)
    draws = 2000 * n
    counts = [0] * n
    for _ in range(draws):
        counts[_below(r, n)] += 1
    # Each cell ~ Binomial(draws, 1/n); 6 sd keeps this seed-stable.
    sd = (draws * (1 / n) * (1 - 1 / n)) ** 0.5
    assert all(abs(c - 2000) <= 6 * sd for c in counts)


def test_sample_rejects_bad_bits():
    with pytest.raises(ValueError):
        sample_scalar(random.Random(0), 0)


@pytest.mark.parametrize("text, value", [
    ("-7/3", Scalar(-7, 3)),
    ("9", Scalar(9)),
    ("+4/6", Scalar(2, 3)),
    (" 0 ", Scalar(0)),
])
def test_parse(text, value):
    assert parse_scalar(text) == value


@pytest.mark.parametrize("bad", ["1.5", "1/0", "abc", "", "1e3", "3/-4"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_scalar(bad)


def test_format_canonical():
    assert format_scalar(Scalar(-7, 3)) == "-7/3"
    assert format_scalar(Scalar(9)) == "9/1"
    assert format_scalar(Scalar(4, -6)) == "-2/3"
    assert format_scalar(Scalar(0, 5)) == "0/1"


def test_to_scalar_conversions():
    assert to_scalar(Fraction(4, 6)) == Scalar(2, 3)
    assert to_scalar(5) == Scalar(5)
    assert to_scalar("1/2") == Scalar(1, 2)
    with pytest.raises(TypeError):
        to_scalar(0.5)
    with pytest.raises(TypeError):
        to_scalar(True)


@given(rationals)
def test_lowest_terms_positive_denominator(x):
    import math
    assert x.denominator > 0
    assert math.gcd(int(x.numerator), int(x.denominator)) == 1


@given(rationals)
def test_normalization_idempotent(x):
    again = Scalar(x.numerator, x.denominator)
    assert again == x
    assert format_scalar(again) == format_scalar(x)
    assert parse_scalar(format_scalar(x)) == x


@given(rationals, rationals)
def test_sign_matches_cross_multiplication(x, y):
    lhs = int(x.numerator) * int(y.denominator)
    rhs = int(y.numerator) * int(x.denominator)
    assert sign(x - y) == (lhs > rhs) - (lhs < rhs)


@given(rationals, rationals, rationals)
def test_field_laws_exact(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x + y == y + x
    assert x * y == y * x
    assert x * (y + z) == x * y + x * z


@given(rationals, rationals)
def test_agrees_with_fraction(x, y):
    fx = Fraction(int(x.numerator), int(x.denominator))
    fy = Fraction(int(y.numerator), int(y.denominator))
    s = x * y - x
    assert Fraction(int(s.numerator), int(s.denominator)) == fx * fy - fx
