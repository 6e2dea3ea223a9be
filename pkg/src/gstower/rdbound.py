"""Certified root-discriminant bounds for cut towers, Martinet distances and the records table."""

from __future__ import annotations

import os
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from ._rational import to_rational
from .certified import DEFAULT_PRECISION, CertifiedReal, power_product
from .errors import ConsistencyError, DomainError

PRECISION_ENV = "GS_TOWER_PRECISION"

# lower bounds for root discriminants of infinite towers under GRH, kept as the
# customary decimal literals; grh_constants() recomputes them independently
ALPHA_IMAGINARY = Fraction("44.763")
ALPHA_REAL = Fraction("215.33")


def default_precision() -> Fraction:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_PRECISION
    try:
        value = to_rational(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"{PRECISION_ENV}={raw!r} is not a rational number") from exc
    if not 0 < value < 1:
        raise DomainError(f"{PRECISION_ENV} must lie in ]0,1[")
    return value


def _precision(precision) -> Fraction:
    return default_precision() if precision is None else to_rational(precision)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class FieldData:
    """Degree, signature and root discriminant of a base field.

    The root discriminant is the exact radical ``rd_scale * prod q_i^(a_i/b_i)``.
    When only the discriminant factorisation is given the radical is derived
    from it as ``|Disc|^(1/n)``.
    """

    degree: int
    r1: int
    r2: int
    rd_factors: tuple[tuple[int, Fraction], ...] = ()
    rd_scale: Fraction = Fraction(1)
    disc_factorization: Optional[tuple[tuple[int, int], ...]] = None
    rd_published: Optional[Fraction] = None
    name: str = ""

    def __post_init__(self):
        if self.degree < 1 or min(self.r1, self.r2) < 0:
            raise DomainError("degree must be positive and the signature nonnegative")
        if self.r1 + 2 * self.r2 != self.degree:
            raise DomainError(f"signature ({self.r1}, {self.r2}) does not match degree {self.degree}")
        factors = tuple((int(q), to_rational(a)) for q, a in self.rd_factors)
        disc = None
        if self.disc_factorization is not None:
            disc = tuple((int(q), int(e)) for q, e in self.disc_factorization)
            for q, e in disc:
                if not _is_prime(q) or e < 1:
                    raise DomainError(f"bad discriminant factor {q}^{e}")
            derived = tuple((q, Fraction(e, self.degree)) for q, e in disc)
            if not factors and self.rd_scale == 1:
                factors = derived
            elif _merge(factors, self.rd_scale) != _merge(derived, Fraction(1)):
                raise ConsistencyError("rd radical does not match |Disc|^(1/n)")
        scale = to_rational(self.rd_scale)
        if scale <= 0 or any(q < 1 for q, _ in factors):
            raise DomainError("root discriminant must be positive")
        object.__setattr__(self, "rd_factors", factors)
        object.__setattr__(self, "rd_scale", scale)
        object.__setattr__(self, "disc_factorization", disc)
        if self.rd_published is not None:
            object.__setattr__(self, "rd_published", to_rational(self.rd_published))

    @property
    def totally_real(self) -> bool:
        return self.r2 == 0

    @property
    def totally_imaginary(self) -> bool:
        return self.r1 == 0

    def rd(self, precision=None) -> CertifiedReal:
        """Certified root discriminant; checked against the published upper value if any."""
        value = power_product(self.rd_factors, self.rd_scale, _precision(precision))
        if self.rd_published is not None and value.upper > self.rd_published:
            raise ConsistencyError(
                f"root discriminant {value.upper_decimal()} exceeds the published bound {float(self.rd_published)}"
            )
        return value

    @classmethod
    def from_dict(cls, data: dict) -> "FieldData":
        disc = data.get("disc_factorization")
        return cls(
            degree=int(data["degree"]),
            r1=int(data["r1"]),
            r2=int(data["r2"]),
            rd_factors=tuple((int(q), to_rational(a)) for q, a in data.get("rd_factors", [])),
            rd_scale=to_rational(data.get("rd_scale", "1")),
            disc_factorization=None if disc is None else tuple((int(q), int(e)) for q, e in disc),
            rd_published=None if data.get("rd_published") is None else to_rational(data["rd_published"]),
            name=data.get("name", ""),
        )


def _merge(factors, scale: Fraction) -> tuple[Fraction, dict[int, Fraction]]:
    merged: dict[int, Fraction] = {}
    for q, a in factors:
        merged[q] = merged.get(q, Fraction(0)) + a
    return scale, {q: a for q, a in merged.items() if a}


@dataclass(frozen=True)
class PlaceData:
    """A finite place: residue characteristic q, ramification e, residue degree f.

    ``p`` is the prime of the tower; ``k`` caps the ramification exponent at
    ``p**k`` (None means uncapped).
    """

    q: int
    e: int
    f: int
    p: int
    k: Optional[int] = None

    def __post_init__(self):
        if not _is_prime(self.q) or not _is_prime(self.p):
            raise DomainError("q and p must be prime")
        if self.e < 1 or self.f < 1:
            raise DomainError("e and f must be positive")
        if self.k is not None and self.k < 0:
            raise DomainError("k must be nonnegative")

    @property
    def norm(self) -> int:
        return self.q**self.f

    @property
    def tame(self) -> bool:
        return self.q != self.p

    @classmethod
    def from_dict(cls, data: dict, p: int) -> "PlaceData":
        k = data.get("k")
        return cls(q=int(data["q"]), e=int(data.get("e", 1)), f=int(data["f"]), p=int(data.get("p", p)), k=None if k is None else int(k))


def _check_places(fd: FieldData, places: Sequence[PlaceData]):
    for v in places:
        if v.e * v.f > fd.degree:
            raise DomainError(f"place over {v.q} has e*f = {v.e * v.f} > degree {fd.degree}")


def tame_exponents(fd: FieldData, places: Iterable[PlaceData]) -> list[tuple[int, Fraction]]:
    """Per-place factors ``(q, f (1 - p^-k) / n)``; uncapped places contribute ``f / n``."""
    places = list(places)
    _check_places(fd, places)
    out = []
    for v in places:
        if not v.tame:
            raise DomainError(f"place over {v.q} is wild for p = {v.p}")
        cap = Fraction(1) if v.k is None else 1 - Fraction(1, v.p**v.k)
        out.append((v.q, Fraction(v.f, fd.degree) * cap))
    return out


def wild2_exponent(fd: FieldData, places: Iterable[PlaceData]) -> Fraction:
    """Exact exponent of 2 in the wild bound: ``sum f (2 + 1/e - 2^(-e f)) / n``."""
    places = list(places)
    _check_places(fd, places)
    total = Fraction(0)
    for v in places:
        if v.p != 2:
            raise DomainError("the wild bound is only available for p = 2")
        if v.q != 2:
            raise DomainError(f"place over {v.q} is not above 2")
        total += v.f * (2 + Fraction(1, v.e) - Fraction(1, 2 ** (v.e * v.f)))
    return total / fd.degree


def tame_bound(fd: FieldData, places: Sequence[PlaceData], precision=None) -> CertifiedReal:
    precision = _precision(precision)
    fd.rd(precision)
    return power_product(list(fd.rd_factors) + tame_exponents(fd, places), fd.rd_scale, precision)


def wild2_bound(fd: FieldData, places: Sequence[PlaceData], precision=None) -> CertifiedReal:
    precision = _precision(precision)
    fd.rd(precision)
    return power_product(list(fd.rd_factors) + [(2, wild2_exponent(fd, places))], fd.rd_scale, precision)


def mixed_bound(
    fd: FieldData,
    tame_places: Sequence[PlaceData] = (),
    wild_places: Sequence[PlaceData] = (),
    extra_factors: Sequence[tuple[int, Fraction]] = (),
    precision=None,
) -> CertifiedReal:
    """Tame factors, the p = 2 wild factor and any explicit ``(base, exponent)`` pairs in one product."""
    precision = _precision(precision)
    fd.rd(precision)
    factors = list(fd.rd_factors) + tame_exponents(fd, tame_places)
    if wild_places:
        factors.append((2, wild2_exponent(fd, wild_places)))
    factors += [(int(q), to_rational(a)) for q, a in extra_factors]
    return power_product(factors, fd.rd_scale, precision)


def _as_interval(x, precision: Fraction) -> CertifiedReal:
    if isinstance(x, CertifiedReal):
        return x
    return CertifiedReal.exact(to_rational(x), precision)


def martinet_distance(rd, totally_real: bool, precision=None) -> CertifiedReal:
    """``log(rd / alpha)`` with alpha the GRH constant for the signature class."""
    precision = _precision(precision)
    rd = _as_interval(rd, precision)
    alpha = ALPHA_REAL if totally_real else ALPHA_IMAGINARY
    if rd.lower <= alpha:
        raise DomainError(f"root discriminant must exceed {float(alpha)}")
    return (rd / alpha).log()


def improvement_pct(old, new, precision=None) -> CertifiedReal:
    """Relative decrease ``100 (old - new) / old``."""
    precision = _precision(precision)
    old, new = _as_interval(old, precision), _as_interval(new, precision)
    if not (new.lower > 0 and old.lower >= new.upper):
        raise DomainError("improvement needs old >= new > 0")
    return (old - new) / old * 100


@dataclass(frozen=True)
class RecordRow:
    signature: str
    era: str
    rd: Fraction
    expected_partial: Fraction
    partial: CertifiedReal
    deviation: Fraction
    ok: bool


# (signature class, era, rd, partial) as tabulated in the literature
RECORDS: tuple[tuple[str, str, str, str], ...] = (
    ("totally imaginary", "1978", "92.368", "0.7244"),
    ("totally imaginary", "2002", "82.1004", "0.6066"),
    ("totally imaginary", "new", "78.427", "0.5608"),
    ("totally real", "1978", "1058.565", "1.592"),
    ("totally real", "2002", "954.293", "1.488"),
    ("totally real", "2006", "913.493", "1.445"),
    ("totally real", "new", "857.567", "1.382"),
)

# best previous and new partials per signature class, for the improvement figures
IMPROVEMENTS: tuple[tuple[str, str, str, str], ...] = (
    ("totally imaginary", "0.6066", "0.5608", "7.55"),
    ("totally real", "1.445", "1.382", "4.36"),
)


def records_table(tolerance=Fraction(5, 10**4), check: bool = True, precision=None) -> list[RecordRow]:
    """Recompute every tabulated distance and compare with the stored value.

    With ``check`` a row deviating by more than ``tolerance`` raises
    ConsistencyError; otherwise the rows come back with ``ok`` flags.
    """
    precision, tolerance = _precision(precision), to_rational(tolerance)
    rows = []
    for signature, era, rd, partial in RECORDS:
        value = martinet_distance(Fraction(rd), signature == "totally real", precision)
        expected = Fraction(partial)
        deviation = max(abs(value.upper - expected), abs(value.lower - expected))
        rows.append(RecordRow(signature, era, Fraction(rd), expected, value, deviation, deviation <= tolerance))
    bad = [r for r in rows if not r.ok]
    if check and bad:
        detail = ", ".join(f"rd {float(r.rd)}: {r.partial.upper_decimal(6)} vs {float(r.expected_partial)}" for r in bad)
        raise ConsistencyError(f"recomputed distances off by more than {float(tolerance)}: {detail}")
    return rows


def format_records(rows: Sequence[RecordRow]) -> str:
    header = f"{'signature':<18} {'era':<5} {'rd':>9} {'partial':>7} {'recomputed':>10}  status"
    lines = [header]
    for r in rows:
        lines.append(
            f"{r.signature:<18} {r.era:<5} {plain_decimal(r.rd):>9} {plain_decimal(r.expected_partial):>7} "
            f"{r.partial.upper_decimal(6):>10}  {'ok' if r.ok else 'MISMATCH'}"
        )
    return "\n".join(lines)


def records_csv(rows: Sequence[RecordRow]) -> str:
    lines = ["signature,era,rd,partial"]
    lines += [f"{r.signature},{r.era},{plain_decimal(r.rd)},{r.partial.upper_decimal(6)}" for r in rows]
    return "\n".join(lines)


def plain_decimal(x: Fraction) -> str:
    # tabulated values are terminating decimals, so this division is exact
    return str(Decimal(x.numerator) / Decimal(x.denominator))


def grh_constants(dps: int = 30) -> dict[str, tuple[str, Fraction, bool]]:
    """Recompute ``8 pi e^gamma`` and ``8 pi e^(gamma + pi/2)`` and compare with the stored literals.

    The stored values are quoted to a few significant figures, so the
    comparison is relative with tolerance 1e-3.
    """
    import mpmath

    with mpmath.workdps(dps):
        imag = 8 * mpmath.pi * mpmath.exp(mpmath.euler)
        real = imag * mpmath.exp(mpmath.pi / 2)
        out = {}
        for name, exact, stored in (("imaginary", imag, ALPHA_IMAGINARY), ("real", real, ALPHA_REAL)):
            rel = abs(exact - mpmath.mpf(stored.numerator) / stored.denominator) / exact
            out[name] = (mpmath.nstr(exact, 12), stored, bool(rel < mpmath.mpf("1e-3")))
    return out


def check_grh_constants() -> None:
    for name, (value, stored, ok) in grh_constants().items():
        if not ok:
            raise ConsistencyError(f"stored {name} constant {float(stored)} disagrees with {value}")


__all__ = [
    "ALPHA_IMAGINARY",
    "ALPHA_REAL",
    "FieldData",
    "PlaceData",
    "RecordRow",
    "RECORDS",
    "IMPROVEMENTS",
    "default_precision",
    "tame_bound",
    "wild2_bound",
    "wild2_exponent",
    "tame_exponents",
    "mixed_bound",
    "martinet_distance",
    "improvement_pct",
    "records_table",
    "format_records",
    "records_csv",
    "plain_decimal",
    "grh_constants",
    "check_grh_constants",
]
