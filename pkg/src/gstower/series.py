"""Exact Golod-Shafarevich series.

A series attached to a minimal presentation with ``d`` generators is

    P(t) = 1 - d t + sum_k r_k t^k + sum_tails c t^m / (1 - rho t)

with ``r_k`` relations of depth ``k >= 2`` and optional geometric tails used by
infinite cut schedules.  If ``P(t0) <= 0`` for some ``t0`` in ]0,1[ the pro-p
group is infinite; ``P(t0) < 0`` additionally leaves room for further cuts.

Everything here is exact (``fractions.Fraction``); no floating point is used.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterator
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from ._rational import RationalLike, fmt, to_rational
from .errors import DepthError, DomainError, PreconditionError, ResourceError

ITERATION_CAP = 10**6

_TERM = re.compile(r"([+-]?)(\d*)(t?)(?:\^(\d+))?(?=[+-]|$)")


@dataclass(frozen=True)
class Tail:
    """``coeff * t^start * (1 + ratio t + ratio^2 t^2 + ...)``."""

    coeff: Fraction
    start: int
    ratio: Fraction

    def value(self, t: Fraction) -> Fraction:
        if self.ratio * t >= 1:
            raise DomainError(f"tail with ratio {fmt(self.ratio)} diverges at t={fmt(t)}")
        return self.coeff * t**self.start / (1 - self.ratio * t)

    def to_dict(self) -> dict:
        return {"coeff": fmt(self.coeff), "start": self.start, "ratio": fmt(self.ratio)}


@dataclass(frozen=True)
class GSSeries:
    d: int
    relations: tuple[tuple[int, int], ...] = ()
    tails: tuple[Tail, ...] = ()

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("generator count must be nonnegative")
        merged: dict[int, int] = {}
        for depth, count in self.relations:
            if depth < 2:
                raise DepthError(f"relation depth {depth} < 2 (relations of a minimal presentation lie in F_2)")
            if count < 0:
                raise ValueError("relation counts must be nonnegative")
            merged[depth] = merged.get(depth, 0) + count
        object.__setattr__(self, "relations", tuple(sorted((k, c) for k, c in merged.items() if c)))
        for tail in self.tails:
            if tail.start < 2:
                raise DepthError("tails must start at degree >= 2")
            if tail.coeff <= 0 or tail.ratio < 0:
                raise ValueError("tails need coeff > 0 and ratio >= 0")

    # -- construction -----------------------------------------------------

    @classmethod
    def quadratic(cls, d: int, r: int) -> "GSSeries":
        """``1 - d t + r t^2``: the series used when nothing is known about relation depths."""
        return cls(d, ((2, r),))

    @classmethod
    def from_coefficients(cls, coeffs) -> "GSSeries":
        """Build from ``[1, -d, r_2, r_3, ...]``."""
        coeffs = [int(c) for c in coeffs]
        if not coeffs or coeffs[0] != 1:
            raise ValueError("constant coefficient must be 1")
        d = -coeffs[1] if len(coeffs) > 1 else 0
        return cls(d, tuple((k, c) for k, c in enumerate(coeffs) if k >= 2 and c))

    @classmethod
    def parse(cls, text: str) -> "GSSeries":
        """Parse a polynomial written like ``1-5t+4t^2+4t^3+t^4``."""
        src = text.replace(" ", "").replace("\u2212", "-")
        if not re.fullmatch(r"(?:[+-]?(?:\d+t?|t)(?:\^\d+)?)+", src):
            raise ValueError(f"cannot parse polynomial {text!r}")
        coeffs: dict[int, int] = {}
        for sign, num, var, power in _TERM.findall(src):
            if not (num or var):
                continue
            c = int(num) if num else 1
            k = (int(power) if power else 1) if var else 0
            coeffs[k] = coeffs.get(k, 0) + (-c if sign == "-" else c)
        return cls.from_coefficients([coeffs.get(k, 0) for k in range(max(coeffs) + 1)])

    @classmethod
    def from_dict(cls, data: dict) -> "GSSeries":
        rels = tuple((int(x["depth"]), int(x["count"])) for x in data.get("relations", []))
        tails = tuple(
            Tail(to_rational(x["coeff"]), int(x["start"]), to_rational(x["ratio"]))
            for x in data.get("tails", [])
        )
        return cls(int(data["d"]), rels, tails)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "relations": [{"depth": k, "count": c} for k, c in self.relations],
            "tails": [t.to_dict() for t in self.tails],
        }

    # -- inspection -------------------------------------------------------

    def count(self, depth: int) -> int:
        return dict(self.relations).get(depth, 0)

    @property
    def total_relations(self) -> int:
        return sum(c for _, c in self.relations)

    @property
    def is_quadratic(self) -> bool:
        return not self.tails and all(k == 2 for k, _ in self.relations)

    def coefficients(self) -> list[int]:
        """Polynomial part as ``[1, -d, r_2, ...]`` (tails excluded)."""
        top = max([1] + [k for k, _ in self.relations])
        out = [0] * (top + 1)
        out[0], out[1] = 1, -self.d
        for k, c in self.relations:
            out[k] += c
        return out

    def eval(self, t: RationalLike) -> Fraction:
        t = to_rational(t)
        if not 0 < t < 1:
            raise DomainError(f"t={fmt(t)} is not in ]0,1[")
        value = Fraction(0)
        for c in reversed(self.coefficients()):
            value = value * t + c
        for tail in self.tails:
            value += tail.value(t)
        return value

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self.coefficients()):
            if c == 0:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            mag = abs(c)
            body = f"{mag}{mono}" if (mag != 1 or not mono) else mono
            parts.append(("-" if c < 0 else "+") + body)
        for tail in self.tails:
            parts.append(f"+{tail.coeff}*t^{tail.start}/(1-{tail.ratio}t)")
        text = "".join(parts)
        return text[1:] if text.startswith("+") else text


def evaluate(s: GSSeries, t: RationalLike) -> Fraction:
    """Exact value of ``s`` at ``t``; raises DomainError outside ]0,1[ or past a tail's radius."""
    return s.eval(t)


# -- verdicts ------------------------------------------------------------------


class VerdictKind(str, Enum):
    CUTTABLE = "CUTTABLE"
    BOUNDARY_INFINITE = "BOUNDARY_INFINITE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    t0: Optional[Fraction] = None
    value: Optional[Fraction] = None
    provably_positive: bool = False

    @property
    def certifies_infinite(self) -> bool:
        return self.kind is not VerdictKind.INCONCLUSIVE

    def to_dict(self) -> dict:
        return {
            "verdict": self.kind.value,
            "t0": None if self.t0 is None else fmt(self.t0),
            "value": None if self.value is None else fmt(self.value),
            "provably_positive": self.provably_positive,
        }

    def __str__(self) -> str:
        if self.kind is VerdictKind.INCONCLUSIVE:
            return "INCONCLUSIVE (provably positive on ]0,1[)" if self.provably_positive else "INCONCLUSIVE"
        return f"{self.kind.value} at t0={fmt(self.t0)} value={fmt(self.value)}"


def _quadratic_verdict(d: int, r: int) -> Optional[Verdict]:
    """Closed-form answer for ``1 - d t + r t^2``; None means 'search the grid'."""
    positive = Verdict(VerdictKind.INCONCLUSIVE, provably_positive=True)
    if r == 0:
        if d <= 1:
            return positive
        t0 = Fraction(2, d + 1)
        return Verdict(VerdictKind.CUTTABLE, t0, 1 - d * t0)
    vertex = Fraction(d, 2 * r)
    disc = d * d - 4 * r
    if disc < 0:
        return positive
    if vertex < 1:
        value = 1 - Fraction(d * d, 4 * r)
        if disc == 0:
            return Verdict(VerdictKind.BOUNDARY_INFINITE, vertex, value)
        return Verdict(VerdictKind.CUTTABLE, vertex, value)
    # decreasing on ]0,1[: sign near 1 is decided by P(1)
    if 1 - d + r >= 0:
        return positive
    return None


def _candidates(s: GSSeries, max_depth: int) -> Iterator[list[Fraction]]:
    canon = []
    r2 = s.count(2)
    for denom in (2 * r2, 2 * s.total_relations):
        if denom > 0:
            t = Fraction(s.d, denom)
            if 0 < t < 1 and t not in canon:
                canon.append(t)
    if canon:
        yield canon
    for n in range(1, max_depth + 1):
        yield [Fraction(j, 2**n) for j in range(1, 2**n, 2)]


def find_witness(s: GSSeries, max_depth: int = 12) -> Verdict:
    """Search for an exact ``t0`` in ]0,1[ with ``P(t0) <= 0``.

    Tries the canonical point d/(2r) first, then dyadic grids ``j/2^n`` for
    ``n <= max_depth``; within the first batch containing a negative value the
    most negative point is returned.  INCONCLUSIVE never claims finiteness.
    """
    if s.is_quadratic:
        verdict = _quadratic_verdict(s.d, s.count(2))
        if verdict is not None:
            return verdict
    boundary = None
    for batch in _candidates(s, max_depth):
        best = None
        for t in batch:
            try:
                v = s.eval(t)
            except DomainError:
                continue
            if v < 0 and (best is None or v < best[1]):
                best = (t, v)
            elif v == 0 and boundary is None:
                boundary = t
        if best is not None:
            return Verdict(VerdictKind.CUTTABLE, best[0], best[1])
    if boundary is not None:
        return Verdict(VerdictKind.BOUNDARY_INFINITE, boundary, Fraction(0))
    return Verdict(VerdictKind.INCONCLUSIVE)


# -- cuts ----------------------------------------------------------------------


def cut(s: GSSeries, depth: int, count: int = 1) -> GSSeries:
    """Add ``count`` relations of depth at least ``depth`` (quotient by their normal closure)."""
    if depth < 2:
        raise DepthError("cutting by elements of depth < 2 changes the generator rank")
    if count < 0:
        raise PreconditionError("count must be nonnegative")
    if count == 0:
        return s
    return GSSeries(s.d, s.relations + ((depth, count),), s.tails)


def cut_tail(s: GSSeries, k_start: int, ratio: RationalLike, coeff: RationalLike = 1) -> GSSeries:
    """Append ``coeff * t^k_start / (1 - ratio t)``.

    ``ratio=1, coeff=1`` is one relation at each depth k', k'+1, ...;
    ``ratio=lam, coeff=lam**m`` is lam^(m+k) relations at depth m+k for k >= 0.
    """
    if k_start < 2:
        raise DepthError("tail must start at depth >= 2")
    ratio, coeff = to_rational(ratio), to_rational(coeff)
    if ratio < 0 or coeff <= 0:
        raise PreconditionError("tail needs ratio >= 0 and coeff > 0")
    return GSSeries(s.d, s.relations, s.tails + (Tail(coeff, k_start, ratio),))


def min_single_cut_depth(d: int, r: int) -> int:
    """Least k >= 2 with ``1 - d t0 + r t0^2 + t0^k < 0`` at ``t0 = d/2r``.

    Equivalently ``(d/2r)^k < d^2/4r - 1``, decided by exact power iteration.
    """
    if not 4 * r < d * d:
        raise PreconditionError(f"need r < d^2/4, got d={d}, r={r}")
    if not 2 * r > d:
        raise PreconditionError(f"need d/2r < 1, got d={d}, r={r}")
    t0 = Fraction(d, 2 * r)
    margin = Fraction(d * d, 4 * r) - 1
    power = t0 * t0
    for k in range(2, ITERATION_CAP):
        if power < margin:
            return k
        power *= t0
    raise ResourceError("k0 iteration cap exceeded")


def geometric_ratio(d: int, r: int) -> int:
    """``floor(a)`` for non-integral ``a = 2r/d``, else ``a - 1``."""
    if d <= 0:
        raise PreconditionError("d must be positive")
    a = Fraction(2 * r, d)
    if a <= 1:
        raise PreconditionError(f"need 2r/d > 1, got {fmt(a)}")
    return a.numerator - 1 if a.denominator == 1 else math.floor(a)


def lambda_m(d: int, r: int) -> tuple[int, int]:
    """Parameters (lambda, m) of the geometric cut schedule for a (d, r) presentation.

    m is the least integer >= 2 with ``1 - d^2/4r + (lam/a)^m / (1 - lam/a) < 0``.
    """
    if not 4 * r < d * d:
        raise PreconditionError(f"need r < d^2/4, got d={d}, r={r}")
    lam = geometric_ratio(d, r)
    q = lam / Fraction(2 * r, d)
    margin = Fraction(d * d, 4 * r) - 1
    # q^m / (1-q) < margin  <=>  q^m < margin (1-q)
    bound = margin * (1 - q)
    power = q * q
    for m in range(2, ITERATION_CAP):
        if power < bound:
            return lam, m
        power *= q
    raise ResourceError("m iteration cap exceeded")


def geometric_cut_series(d: int, r: int) -> GSSeries:
    """``1 - d t + r t^2 + sum_{k>=0} lam^(m+k) t^(m+k)``, evaluable for t < 1/lam."""
    lam, m = lambda_m(d, r)
    return cut_tail(GSSeries.quadratic(d, r), m, lam, Fraction(lam) ** m)


# -- infinite Frobenius schedules ------------------------------------------------


def iter_frobenius_schedule(
    s: GSSeries, t0: RationalLike, budget_fraction: RationalLike = Fraction(1, 2)
) -> Iterator[int]:
    """Yield depths k_1 <= k_2 <= ... whose cut keeps ``P(t0)`` below ``-(1-budget)·delta``.

    With ``R`` the unspent budget (initially ``budget_fraction * delta``), each
    k_i is the least depth >= max(2, k_{i-1}) with ``t0^k_i <= (1 - t0) R``.
    Spending at most that leaves ``R >= t0 R > 0``, so the schedule never runs
    out and every partial sum stays strictly below the budget.
    """
    t0, budget_fraction = to_rational(t0), to_rational(budget_fraction)
    if not 0 < budget_fraction < 1:
        raise PreconditionError("budget_fraction must lie in ]0,1[")
    value = s.eval(t0)
    if value >= 0:
        raise PreconditionError(f"series is not negative at t0={fmt(t0)}")
    remaining = budget_fraction * (-value)
    k, power = 2, t0 * t0
    while True:
        allowance = (1 - t0) * remaining
        steps = 0
        while power > allowance:
            power *= t0
            k += 1
            steps += 1
            if steps > ITERATION_CAP:
                raise ResourceError("schedule depth iteration cap exceeded")
        remaining -= power
        yield k


def frobenius_schedule(
    s: GSSeries, t0: RationalLike, budget_fraction: RationalLike = Fraction(1, 2), length: int = 10
) -> list[int]:
    it = iter_frobenius_schedule(s, t0, budget_fraction)
    return [next(it) for _ in range(length)]

