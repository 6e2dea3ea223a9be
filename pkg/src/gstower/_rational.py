"""Rational parsing and formatting helpers (``fractions.Fraction`` is the number type)."""

from __future__ import annotations

from fractions import Fraction
from typing import Union

RationalLike = Union[Fraction, int, str]


def to_rational(x: RationalLike) -> Fraction:
    """Coerce ``x`` to a Fraction; strings may be "p/q", "p" or a decimal literal.

    Floats are refused: every value entering the exact engine has to be exact.
    """
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fmt(x: Fraction) -> str:
    """Always ``p/q``, also for integers, so output parses back uniformly."""
    return f"{x.numerator}/{x.denominator}"
