from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gstower.certified import (
    CertifiedReal,
    exp_bounds,
    iroot,
    log_bounds,
    power_product,
    rational_power,
    round_down,
    round_up,
    working_bits,
)
from gstower.errors import DomainError

mpmath.mp.dps = 60


def mp(x):
    return mpmath.mpf(x.numerator) / x.denominator


positive = st.fractions(min_value=F(1, 10**6), max_value=F(10**6), max_denominator=10**6)
exponents = st.fractions(min_value=F(-3), max_value=F(3), max_denominator=24)
precisions = st.sampled_from([F(1, 10**4), F(1, 10**8), F(1, 10**12)])


def test_working_bits():
    assert working_bits(F(1, 2)) == 18
    assert working_bits(F(1, 10**8)) == 2 * 27 + 16
    with pytest.raises(DomainError):
        working_bits(F(0))


@given(st.fractions(min_value=F(-10**6), max_value=F(10**6)), st.integers(4, 80))
def test_rounding_is_outward(x, bits):
    assert round_down(x, bits) <= x <= round_up(x, bits)


@given(st.integers(0, 10**40), st.integers(1, 9))
def test_iroot_brackets(n, k):
    r = iroot(n, k)
    assert r**k <= n < (r + 1) ** k


@settings(max_examples=200)
@given(positive, exponents, precisions)
def test_rational_power_contains_oracle(base, exponent, precision):
    c = rational_power(base, exponent, precision)
    if c.lower == c.upper:
        assert c.lower**exponent.denominator == base**exponent.numerator
    else:
        truth = mp(base) ** mp(exponent)
        assert mp(c.lower) <= truth <= mp(c.upper)
    assert c.meets_precision()


def test_cube_root_of_163_squared_by_bisection():
    # independent oracle: bisect y^3 = 163^2 in exact rationals
    lo, hi = F(29), F(30)
    for _ in range(60):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if mid**3 <= 163**2 else (lo, mid)
    c = rational_power(163, F(2, 3))
    assert c.lower <= hi and lo <= c.upper
    assert c.upper_decimal(4) == "29.8396" and c.lower_decimal(4) == "29.8395"


def test_exact_powers_stay_exact():
    c = rational_power(F(9, 4), F(3, 2))
    assert c.lower == c.upper == F(27, 8)


@settings(max_examples=200)
@given(positive, st.sampled_from([40, 80, 120]))
def test_log_bounds_contain_oracle(y, bits):
    lo, hi = log_bounds(y, bits)
    assert mp(lo) <= mpmath.log(mp(y)) <= mp(hi)


@settings(max_examples=200)
@given(st.fractions(min_value=F(-40), max_value=F(40), max_denominator=1000), st.sampled_from([40, 80]))
def test_exp_bounds_contain_oracle(x, bits):
    lo, hi = exp_bounds(x, bits)
    assert mp(lo) <= mpmath.exp(mp(x)) <= mp(hi)


@settings(max_examples=100)
@given(positive, positive, precisions)
def test_arithmetic_is_sound(a, b, precision):
    x = CertifiedReal.between(a, a * F(1001, 1000), precision)
    y = CertifiedReal.between(b, b * F(1001, 1000), precision)
    for op in (lambda u, v: u + v, lambda u, v: u - v, lambda u, v: u * v, lambda u, v: u / v):
        r = op(x, y)
        for u in (x.lower, x.upper):
            for v in (y.lower, y.upper):
                assert r.contains(op(u, v))


def test_division_by_zero_interval():
    with pytest.raises(DomainError):
        CertifiedReal.exact(1) / CertifiedReal(F(-1), F(1))


def test_log_domain():
    with pytest.raises(DomainError):
        CertifiedReal(F(0), F(1)).log()


def test_log_exp_identity():
    e = CertifiedReal.exact(1).exp()
    assert e.log().contains(1)


@pytest.mark.parametrize("base,exponent", [(3315, F(1, 2)), (1849, F(3, 16)), (163, F(2, 3)), (13, F(1, 24))])
def test_halving_precision_at_least_halves_width(base, exponent):
    widths = [rational_power(base, exponent, F(1, 2**j)).width for j in range(10, 40, 3)]
    for w1, w2 in zip(widths, widths[1:]):
        assert w2 <= w1 / 2


def test_power_product_merges_equal_bases():
    c = power_product([(5, F(1, 4)), (5, F(3, 4))], 2)
    assert c.lower == c.upper == 10


def test_display_rounds_outward():
    c = CertifiedReal(F(1, 3), F(2, 3))
    assert c.upper_decimal(4) == "0.6667" and c.lower_decimal(4) == "0.3333"
    assert str(c) == "< 0.6666667 (certified)"


def test_dict_round_trip():
    c = rational_power(2, F(1, 2))
    assert CertifiedReal.from_dict(c.to_dict()) == c


@pytest.mark.parametrize("base,exponent", [(13, F(2**29 - 1, 12 * 2**29)), (F(3, 7), F(-5, 9999)), (10**30, F(7, 3))])
def test_power_with_huge_exponent_parts(base, exponent):
    c = rational_power(base, exponent)
    truth = mp(F(base)) ** mp(exponent)
    assert mp(c.lower) <= truth <= mp(c.upper)
    assert c.meets_precision()
