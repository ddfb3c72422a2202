"""Exact rational scalars.

Every secret, blinding parameter and blinded value in the protocols is a
GMP rational (``gmpy2.mpq``). These are always kept in lowest terms with a
positive denominator, so signs and equalities are decided without rounding.
``fractions.Fraction`` inputs are accepted and converted.
"""

from __future__ import annotations

import random
import re
from fractions import Fraction
from typing import Union

import gmpy2

Scalar = type(gmpy2.mpq())

DEFAULT_MAGNITUDE_BITS = 64

_LITERAL = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")

ScalarLike = Union[Scalar, Fraction, int, str]


def sign(x: Scalar) -> int:
    """Return -1, 0 or +1 according to the exact sign of ``x``."""
    return (x > 0) - (x < 0)


def to_scalar(x: ScalarLike) -> Scalar:
    """Coerce an int, Fraction or exact literal into a Scalar.

    Floats are rejected outright; accepting them would smuggle rounding into
    the comparison path.
    """
    if isinstance(x, Scalar):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Fraction):
        return Scalar(x.numerator, x.denominator)
    if isinstance(x, (int, type(gmpy2.mpz()))):
        return Scalar(x)
    if isinstance(x, str):
        return parse_scalar(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact scalar")


def parse_scalar(text: str) -> Scalar:
    """Parse ``"n"`` or ``"n/d"`` into a Scalar.

    >>> parse_scalar("-7/3")
    mpq(-7,3)
    >>> parse_scalar("9")
    mpq(9,1)
    """
    match = _LITERAL.match(text)
    if match is None:
        raise ValueError(f"not an exact rational literal: {text!r}")
    num = int(match.group(1))
    den = int(match.group(2)) if match.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Scalar(num, den)


def format_scalar(x: Scalar) -> str:
    """Canonical ``num/den`` text form; integers keep an explicit ``/1``."""
    return f"{int(x.numerator)}/{int(x.denominator)}"


def sample_scalar(
    rng: random.Random,
    magnitude_bits: int = DEFAULT_MAGNITUDE_BITS,
    nonzero: bool = False,
) -> Scalar:
    """Draw a rational uniformly from a finite grid.

    The numerator is uniform in ``[-2**bits, 2**bits]`` and the denominator
    uniform in ``[1, 2**bits]``; the result is then reduced. With ``nonzero``
    set, zero draws are rejected and resampled.
    """
    if magnitude_bits < 1:
        raise ValueError("magnitude_bits must be at least 1")
    bound = 1 << magnitude_bits
    while True:
        num = _below(rng, 2 * bound + 1) - bound
        if nonzero and num == 0:
            continue
        den = _below(rng, bound) + 1
        return Scalar(num, den)


def _below(rng: random.Random, n: int) -> int:
    """Uniform integer in [0, n).

    Draws 8 spare bits and rejects only the top partial block, so almost
    every draw is accepted while the result stays exactly uniform.
    """
    if n & (n - 1) == 0:
        return rng.getrandbits(n.bit_length() - 1)
    k = n.bit_length() + 8
    limit = (1 << k) - (1 << k) % n
    while True:
        r = rng.getrandbits(k)
        if r < limit:
            return r % n
