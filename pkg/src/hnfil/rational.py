"""Exact rational parsing and formatting for the JSON/CSV interfaces."""

import re
from fractions import Fraction

from .errors import InvalidInputError

_RATIONAL = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")


def parse_rational(value, pointer=None):
    """Parse ``"num/den"`` strings or ints into a ``Fraction``.

    Floats are refused: nothing inexact crosses the interface.
    """
    if isinstance(value, bool):
        raise InvalidInputError("expected a rational, got a boolean", pointer)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str) and _RATIONAL.match(value):
        try:
            return Fraction(value.replace(" ", ""))
        except ZeroDivisionError:
            raise InvalidInputError(f"zero denominator in {value!r}", pointer) from None
    raise InvalidInputError(f"expected a rational string like '3/2', got {value!r}", pointer)


def format_rational(x):
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def vp(n, p):
    """p-adic valuation of a nonzero integer."""
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_rational(x, p):
    x = Fraction(x)
    return vp(x.numerator, p) - vp(x.denominator, p)
