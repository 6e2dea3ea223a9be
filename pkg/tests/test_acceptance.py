"""Acceptance criteria, one check per criterion.

Each test prints a single ``PASS``/``FAIL`` line.  Run the module directly
(``python3 tests/test_acceptance.py``) for the summary lines alone.
"""

import random
import sys
import time
from fractions import Fraction as F

import mpmath
import pytest

from gstower.casebook import fixture_dir, load_fixture, rd_bound_for, replay_all
from gstower.magnus import FreeWord, NCSeries, depth, embed, frattini_depth_bound, rank_equality_depth
from gstower.rdbound import IMPROVEMENTS, improvement_pct, plain_decimal, records_table, tame_exponents, wild2_exponent
from gstower.series import (
    GSSeries,
    VerdictKind,
    cut,
    find_witness,
    geometric_cut_series,
    iter_frobenius_schedule,
    lambda_m,
    min_single_cut_depth,
)

TOL = F(5, 10**4)


def _best_time(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


# -- 1 ---------------------------------------------------------------------------


def exact_boundary():
    s = GSSeries.parse("1-8t+16t^2")
    value = s.eval(F(1, 4))
    elapsed = _best_time(lambda: s.eval(F(1, 4)))
    return value == 0 and elapsed < 1e-3, f"P(1/4) = {value}, {elapsed * 1e3:.3f} ms"


# -- 2 ---------------------------------------------------------------------------

WITNESS_SUITE = [
    "1-5t+6t^2+t^4",
    "1-7t+12t^2",
    "1-7t+12t^2+t^4",
    "1-9t+20t^2",
    "1-9t+20t^2+t^4",
    "1-5t+4t^2+4t^3+t^4",
    "1-18t+80t^2+3t^4",
]


def witness_suite():
    problems, slowest = [], 0.0
    for text in WITNESS_SUITE:
        s = GSSeries.parse(text)
        v = find_witness(s)
        slowest = max(slowest, _best_time(lambda: find_witness(s), 3))
        if v.kind is not VerdictKind.CUTTABLE or not (0 < v.t0 < 1) or s.eval(v.t0) != v.value or v.value >= 0:
            problems.append(f"{text}: {v}")
    positive = find_witness(GSSeries.parse("1-9t+21t^2"))
    if positive.kind is not VerdictKind.INCONCLUSIVE or not positive.provably_positive:
        problems.append(f"1-9t+21t^2: {positive}")
    slowest = max(slowest, _best_time(lambda: find_witness(GSSeries.parse("1-9t+21t^2")), 3))
    if slowest >= 1e-2:
        problems.append(f"slowest search {slowest * 1e3:.2f} ms")
    detail = "; ".join(problems) or f"{len(WITNESS_SUITE)} witnesses + 1 positivity proof, slowest {slowest * 1e3:.2f} ms"
    return not problems, detail


# -- 3 ---------------------------------------------------------------------------

# fixture, value as listed, strict bound as printed next to the computation
RECORD_BOUNDS = [
    ("complex-43", "235.9351", "235.9351"),
    ("complex-9", "82.9940", "82.9940"),
    ("complex-record", "78.4269", "78.4269"),
    ("real-record", "857.5662", "857.5662"),
    ("wild-5460", "161.1592", "161.1592"),
    ("mixed-163", "2742.9562", "2742.95621"),
]


def _factors(fx):
    factors = list(fx.field.rd_factors)
    tame = [v for v in fx.places if v.tame]
    wild = [v for v in fx.places if not v.tame]
    factors += tame_exponents(fx.field, tame)
    if wild:
        factors.append((2, wild2_exponent(fx.field, wild)))
    return factors, fx.field.rd_scale


def _oracle(fx):
    factors, scale = _factors(fx)
    with mpmath.workdps(50):
        value = mpmath.mpf(scale.numerator) / scale.denominator
        for q, a in factors:
            value *= mpmath.mpf(q) ** (mpmath.mpf(a.numerator) / a.denominator)
        return value


def record_bounds():
    problems, shown = [], []
    start = time.perf_counter()
    bounds = {name: rd_bound_for(load_fixture(fixture_dir() / f"{name}.json")) for name, _, _ in RECORD_BOUNDS}
    elapsed = time.perf_counter() - start
    for name, listed, printed in RECORD_BOUNDS:
        c = bounds[name]
        truth = _oracle(load_fixture(fixture_dir() / f"{name}.json"))
        with mpmath.workdps(50):
            contains = mpmath.mpf(c.lower.numerator) / c.lower.denominator <= truth <= mpmath.mpf(c.upper.numerator) / c.upper.denominator
        close = abs(c.upper - F(listed)) <= TOL
        strict = c.upper < F(printed)
        shown.append(f"{name} < {c.upper_decimal()}")
        if not (contains and close and strict):
            problems.append(f"{name}: upper {c.upper_decimal()} vs {printed} (contains={contains}, close={close}, strict={strict})")
    if elapsed >= 1:
        problems.append(f"suite took {elapsed:.2f} s")
    return not problems, "; ".join(problems) or ", ".join(shown) + f" in {elapsed * 1e3:.0f} ms"


# -- 4 ---------------------------------------------------------------------------


def records_partials():
    rows = records_table(check=False)
    problems = [
        f"rd {plain_decimal(r.rd)}: recomputed {r.partial.lower_decimal(6)}..{r.partial.upper_decimal(6)} vs {plain_decimal(r.expected_partial)} (off {float(r.deviation):.2e})"
        for r in rows
        if not r.ok
    ]
    for signature, old, new, stated in IMPROVEMENTS:
        pct = improvement_pct(F(old), F(new))
        if max(abs(pct.upper - F(stated)), abs(pct.lower - F(stated))) > F(1, 100):
            problems.append(f"{signature} improvement {pct.upper_decimal(4)}% vs {stated}%")
    return not problems, "; ".join(problems) or "7 partials and 2 improvement percentages match"


# -- 5 ---------------------------------------------------------------------------


def _brute_k0(d, r):
    s, t0 = GSSeries.quadratic(d, r), F(d, 2 * r)
    k = 2
    while s.eval(t0) + t0**k >= 0:
        k += 1
    return k


def k0_oracle():
    start = time.perf_counter()
    pairs, bad = 0, []
    for d in range(1, 31):
        for r in range(1, d * d):
            if 4 * r < d * d and 2 * r > d:
                pairs += 1
                if min_single_cut_depth(d, r) != _brute_k0(d, r):
                    bad.append((d, r))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 5
    return ok, f"{pairs} pairs, {len(bad)} discrepancies, {elapsed:.2f} s"


# -- 6 ---------------------------------------------------------------------------


def geometric_parameters():
    m, q = 0, F(1)
    while not q < F(1, 800):
        m += 1
        q *= F(9, 10)
    lam, got = lambda_m(9, 20)
    value = geometric_cut_series(9, 20).eval(F(9, 40))
    ok = (lam, got) == (4, m) and m == 64 and value < 0
    return ok, f"lambda={lam}, m={got} (oracle {m}), tail series at 9/40 is {'negative' if value < 0 else 'not negative'}"


# -- 7 ---------------------------------------------------------------------------


def _random_word(rng, d):
    return FreeWord(d, tuple((rng.randrange(d), rng.choice([-2, -1, 1, 2])) for _ in range(rng.randint(1, 4))))


def magnus_properties(words=1000, N=10, seed=20240601):
    rng = random.Random(seed)
    start = time.perf_counter()
    failures = []
    cap = N + 1
    for p in (2, 3, 5):
        for i in range(words):
            d = rng.randint(1, 4)
            w1, w2 = _random_word(rng, d), _random_word(rng, d)
            e1, e2 = embed(w1, p, N), embed(w2, p, N)
            a, b = depth(w1, p, N), depth(w2, p, N)
            checks = {
                "homomorphism": embed(w1 * w2, p, N) == e1 * e2,
                "inverse": e1 * embed(w1.inverse(), p, N) == NCSeries.one(p, d, N),
                "depth of inverse": depth(w1.inverse(), p, N) == a,
                "product": depth(w1 * w2, p, N).lower_bound >= min(a.lower_bound, b.lower_bound, cap),
                "commutator": depth(w1.commutator(w2), p, N).lower_bound >= min(a.lower_bound + b.lower_bound, cap),
                "p-th power": depth(w1**p, p, N).lower_bound >= min(p * a.lower_bound, cap),
            }
            failures += [f"p={p} #{i} {name}: {w1} / {w2}" for name, ok in checks.items() if not ok]
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 30
    return ok, (failures[0] if failures else f"{3 * words} word pairs") + f", {elapsed:.1f} s"


# -- 8 ---------------------------------------------------------------------------


def frattini_bounds():
    ok = all(frattini_depth_bound(n) == 2 ** (n - 1) and rank_equality_depth(n) == 2**n for n in range(1, 11))
    return ok, "n = 1..10"


# -- 9 ---------------------------------------------------------------------------


def _random_cuttable(rng):
    while True:
        d = rng.randint(3, 30)
        relations = [(2, rng.randint(0, d * d // 4))]
        relations += [(rng.randint(3, 8), rng.randint(0, 3)) for _ in range(rng.randint(0, 2))]
        s = GSSeries(d, tuple(relations))
        v = find_witness(s)
        if v.kind is VerdictKind.CUTTABLE:
            return s, v


def schedule_safety(count=100, length=200, seed=314159):
    rng = random.Random(seed)
    start = time.perf_counter()
    bad = []
    for i in range(count):
        s, v = _random_cuttable(rng)
        budget = F(rng.randint(1, 99), 100)
        schedule = iter_frobenius_schedule(s, v.t0, budget)
        value, depths = v.value, []
        for _ in range(length):
            k = next(schedule)
            depths.append(k)
            value += v.t0**k
            if not value < 0:
                bad.append(f"#{i} {s} prefix {len(depths)}")
                break
        full = s
        for k in depths:
            full = cut(full, k, 1)
        if full.eval(v.t0) != value:
            bad.append(f"#{i} {s}: cut series disagrees with the prefix sums")
    elapsed = time.perf_counter() - start
    return not bad, (bad[0] if bad else f"{count} series x {length} prefixes") + f", {elapsed:.1f} s"


# -- 10 --------------------------------------------------------------------------


def replay_determinism():
    first, second = replay_all(), replay_all()
    same = first.to_json() == second.to_json() and first.render() == second.render()
    ok = first.ok and first.passed == 8 and len(first.reports) == 8 and same
    return ok, f"{first.passed}/{len(first.reports)} fixtures, reports {'identical' if same else 'differ'}"


CRITERIA = [
    (1, "exact boundary value", exact_boundary),
    (2, "witness suite", witness_suite),
    (3, "record root-discriminant bounds", record_bounds),
    (4, "records table partials", records_partials),
    (5, "single-cut depth oracle", k0_oracle),
    (6, "geometric cut parameters", geometric_parameters),
    (7, "Magnus property suite", magnus_properties),
    (8, "Frattini depth bounds", frattini_bounds),
    (9, "schedule safety", schedule_safety),
    (10, "deterministic replay", replay_determinism),
]


def _line(number, name, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {name}: {detail}"


@pytest.mark.parametrize("number,name,check", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(number, name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(number, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for number, name, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(number, name, ok, detail), flush=True)
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
