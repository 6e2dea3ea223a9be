"""Certified reals: closed rational intervals guaranteed to contain the true value.

Endpoints are Fractions rounded outward onto a binary grid whose resolution is
derived from the requested relative precision.  Rational powers use exact
integer root bracketing (exp of log once the root degree gets large); log and
exp use series with explicit remainder bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from ._rational import fmt, to_rational
from .errors import DomainError

DEFAULT_PRECISION = Fraction(1, 10**8)

# beyond these sizes integer root bracketing gets slow; fall back to exp(log)
_ROOT_DEGREE_LIMIT = 4096
_POWER_BIT_LIMIT = 1 << 16

Number = Union["CertifiedReal", Fraction, int]


def working_bits(precision: Fraction) -> int:
    """Grid resolution (relative bits) used for a requested precision.

    Grows twice as fast as log2(1/precision), so tightening the precision by a
    factor 2 shrinks interval widths by roughly a factor 4.
    """
    precision = to_rational(precision)
    if not 0 < precision < 1:
        raise DomainError("precision must lie in ]0,1[")
    k = 0
    while Fraction(1, 2**k) > precision:
        k += 1
    return 2 * k + 16


def _floor_log2(x: Fraction) -> int:
    n, d = x.numerator, x.denominator
    e = n.bit_length() - d.bit_length()
    # now 2^(e-1) < x < 2^(e+1); settle which side of 2^e we are on
    if e >= 0:
        return e if n >= d << e else e - 1
    return e if n << -e >= d else e - 1


def round_down(x: Fraction, bits: int) -> Fraction:
    if x == 0:
        return x
    if x < 0:
        return -round_up(-x, bits)
    shift = bits - _floor_log2(x)
    scaled = x * Fraction(2) ** shift
    return Fraction(math.floor(scaled)) / Fraction(2) ** shift


def round_up(x: Fraction, bits: int) -> Fraction:
    if x == 0:
        return x
    if x < 0:
        return -round_down(-x, bits)
    shift = bits - _floor_log2(x)
    scaled = x * Fraction(2) ** shift
    return Fraction(math.ceil(scaled)) / Fraction(2) ** shift


@dataclass(frozen=True)
class CertifiedReal:
    lower: Fraction
    upper: Fraction
    precision: Fraction = DEFAULT_PRECISION

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("interval with lower > upper")

    @classmethod
    def exact(cls, x, precision=DEFAULT_PRECISION) -> "CertifiedReal":
        x = to_rational(x)
        return cls(x, x, to_rational(precision))

    @classmethod
    def between(cls, lo, hi, precision=DEFAULT_PRECISION) -> "CertifiedReal":
        precision = to_rational(precision)
        bits = working_bits(precision)
        return cls(round_down(to_rational(lo), bits), round_up(to_rational(hi), bits), precision)

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def bits(self) -> int:
        return working_bits(self.precision)

    def meets_precision(self) -> bool:
        """Width is within ``precision`` relative to the magnitude (absolute below 1)."""
        return self.width <= self.precision * max(abs(self.upper), abs(self.lower), Fraction(1))

    def contains(self, x) -> bool:
        return self.lower <= to_rational(x) <= self.upper

    def _coerce(self, other) -> "CertifiedReal":
        if isinstance(other, CertifiedReal):
            return other
        return CertifiedReal.exact(to_rational(other), self.precision)

    def _make(self, lo: Fraction, hi: Fraction, other=None) -> "CertifiedReal":
        prec = self.precision
        if isinstance(other, CertifiedReal):
            prec = min(prec, other.precision)
        bits = working_bits(prec)
        return CertifiedReal(round_down(lo, bits), round_up(hi, bits), prec)

    def __add__(self, other: Number) -> "CertifiedReal":
        o = self._coerce(other)
        return self._make(self.lower + o.lower, self.upper + o.upper, o)

    __radd__ = __add__

    def __neg__(self) -> "CertifiedReal":
        return CertifiedReal(-self.upper, -self.lower, self.precision)

    def __sub__(self, other: Number) -> "CertifiedReal":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Number) -> "CertifiedReal":
        return self._coerce(other) - self

    def __mul__(self, other: Number) -> "CertifiedReal":
        o = self._coerce(other)
        products = [a * b for a in (self.lower, self.upper) for b in (o.lower, o.upper)]
        return self._make(min(products), max(products), o)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "CertifiedReal":
        o = self._coerce(other)
        if o.lower <= 0 <= o.upper:
            raise DomainError("division by an interval containing 0")
        return self * CertifiedReal(1 / o.upper, 1 / o.lower, o.precision)

    def __rtruediv__(self, other: Number) -> "CertifiedReal":
        return self._coerce(other) / self

    def log(self) -> "CertifiedReal":
        if self.lower <= 0:
            raise DomainError("log of an interval reaching 0 or below")
        bits = self.bits
        return CertifiedReal(log_bounds(self.lower, bits)[0], log_bounds(self.upper, bits)[1], self.precision)

    def exp(self) -> "CertifiedReal":
        bits = self.bits
        return CertifiedReal(exp_bounds(self.lower, bits)[0], exp_bounds(self.upper, bits)[1], self.precision)

    # -- presentation ----------------------------------------------------

    def upper_decimal(self, places: int = 7) -> str:
        """Upper end rounded up to ``places`` decimals: a sound '< X' display."""
        return _decimal(self.upper, places, ROUND_CEILING)

    def lower_decimal(self, places: int = 7) -> str:
        return _decimal(self.lower, places, ROUND_FLOOR)

    def to_dict(self) -> dict:
        return {"lower": fmt(self.lower), "upper": fmt(self.upper)}

    @classmethod
    def from_dict(cls, data: dict, precision=DEFAULT_PRECISION) -> "CertifiedReal":
        return cls(to_rational(data["lower"]), to_rational(data["upper"]), to_rational(precision))

    def __str__(self) -> str:
        return f"< {self.upper_decimal()} (certified)"


def _decimal(x: Fraction, places: int, rounding) -> str:
    with localcontext() as ctx:
        ctx.prec = max(50, places + 20 + len(str(abs(x.numerator) // x.denominator)))
        q = Decimal(x.numerator) / Decimal(x.denominator)
        # Decimal division is itself rounded; nudge by one unit in the working precision
        ulp = Decimal(1).scaleb(q.adjusted() - ctx.prec + 2)
        q = q + ulp if rounding == ROUND_CEILING else q - ulp
        return str(q.quantize(Decimal(1).scaleb(-places), rounding=rounding))


# -- elementary functions -------------------------------------------------------


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for integers n >= 0, k >= 1."""
    if n < 0 or k < 1:
        raise DomainError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    x = 1 << -(-n.bit_length() // k)  # 2^ceil(bits/k) >= true root
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def rational_power(base, exponent, precision=DEFAULT_PRECISION) -> CertifiedReal:
    """Certified ``base ** exponent`` for rational base > 0 and rational exponent."""
    base, exponent, precision = to_rational(base), to_rational(exponent), to_rational(precision)
    if base <= 0:
        raise DomainError("rational_power needs a positive base")
    a, b = exponent.numerator, exponent.denominator
    size = max(base.numerator.bit_length(), base.denominator.bit_length())
    if b > _ROOT_DEGREE_LIMIT or abs(a) * size > _POWER_BIT_LIMIT:
        return _power_via_log(base, exponent, precision)
    x = base**a
    if b == 1:
        return CertifiedReal.exact(x, precision)
    bits = working_bits(precision)
    # r / 2^s <= x^(1/b) < (r + 1) / 2^s with about `bits` significant bits
    s = bits + 2 - _floor_log2(x) // b
    scale = Fraction(2) ** (b * s)
    r = iroot(math.floor(x * scale), b)
    lo = Fraction(r) / Fraction(2) ** s
    hi = Fraction(r + 1) / Fraction(2) ** s
    if lo**b == x:
        return CertifiedReal.exact(lo, precision)
    return CertifiedReal(round_down(lo, bits), round_up(hi, bits), precision)


def _power_via_log(base: Fraction, exponent: Fraction, precision: Fraction) -> CertifiedReal:
    # exp(exponent * log(base)); extra guard bits cover the magnitude of the exponent product
    bits = working_bits(precision)
    size = max(base.numerator.bit_length(), base.denominator.bit_length()) + 1
    guard = bits + 8 + math.ceil(abs(exponent) * size).bit_length()
    lo, hi = log_bounds(base, guard)
    ends = sorted((exponent * lo, exponent * hi))
    return CertifiedReal(
        round_down(exp_bounds(ends[0], guard)[0], bits), round_up(exp_bounds(ends[1], guard)[1], bits), precision
    )


def power_product(factors: Iterable, rational_factor=1, precision=DEFAULT_PRECISION) -> CertifiedReal:
    """Certified ``rational_factor * prod base_i ** exponent_i``; equal bases are merged first."""
    precision = to_rational(precision)
    merged: dict[Fraction, Fraction] = {}
    for base, exponent in factors:
        base = to_rational(base)
        merged[base] = merged.get(base, Fraction(0)) + to_rational(exponent)
    result = CertifiedReal.exact(to_rational(rational_factor), precision)
    for base in sorted(merged):
        if merged[base]:
            result = result * rational_power(base, merged[base], precision)
    return result


def _atanh_bounds(u: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    # sum_{j<n} u^(2j+1)/(2j+1), remainder <= |u|^(2n+1) / ((2n+1)(1-u^2))
    if not abs(u) < Fraction(1, 2):
        raise DomainError("atanh series used outside |u| < 1/2")
    tol = Fraction(1, 2 ** (bits + 8))
    total, power, u2, j = Fraction(0), u, u * u, 0
    while True:
        total += power / (2 * j + 1)
        j += 1
        power *= u2
        rem = abs(power) / ((2 * j + 1) * (1 - u2))
        if rem < tol:
            return total - rem, total + rem


@lru_cache(maxsize=None)
def _ln2_bounds(bits: int) -> tuple[Fraction, Fraction]:
    lo, hi = _atanh_bounds(Fraction(1, 3), bits + 8)
    return 2 * lo, 2 * hi


def log_bounds(y: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of ``log(y)`` for rational y > 0."""
    y = to_rational(y)
    if y <= 0:
        raise DomainError("log of a nonpositive number")
    if y == 1:
        return Fraction(0), Fraction(0)
    k = _floor_log2(y)
    z = y / Fraction(2) ** k
    if z > Fraction(4, 3):
        z /= 2
        k += 1
    lo, hi = _atanh_bounds((z - 1) / (z + 1), bits + 8)
    l2lo, l2hi = _ln2_bounds(bits + 8)
    klo, khi = (k * l2lo, k * l2hi) if k >= 0 else (k * l2hi, k * l2lo)
    return round_down(klo + 2 * lo, bits), round_up(khi + 2 * hi, bits)


def exp_bounds(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of ``exp(x)`` for rational x."""
    x = to_rational(x)
    if x == 0:
        return Fraction(1), Fraction(1)
    j = 0
    while abs(x) / 2**j > Fraction(1, 2):
        j += 1
    y = abs(x) / 2**j
    work = bits + 8 + 2 * j
    tol = Fraction(1, 2 ** (work + 4))
    total, term, i = Fraction(0), Fraction(1), 0
    while True:
        total += term
        i += 1
        term = term * y / i
        rem = 2 * term  # tail <= term / (1 - y) with y <= 1/2
        if rem < tol:
            break
    lo, hi = round_down(total, work), round_up(total + rem, work)
    for _ in range(j):
        lo, hi = round_down(lo * lo, work), round_up(hi * hi, work)
    if x < 0:
        lo, hi = 1 / hi, 1 / lo
    return round_down(lo, bits), round_up(hi, bits)
