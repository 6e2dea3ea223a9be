"""Worked-example fixtures and an end-to-end replay of each certification.

A fixture stores measured ranks, the cuts applied, the places entering the
root-discriminant bound and the expected outcomes.  ``replay`` recomputes
everything from the ranks upwards and records one check per expectation.
"""

from __future__ import annotations

import fnmatch
import json
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence, Union

import jsonschema

from ._rational import fmt, to_rational
from .certified import CertifiedReal, rational_power
from .cft import Place, RankProfile, alpha_test, h1_rank, r_upper_bound, solve_b_rank, wild_relation_count
from .errors import ConsistencyError, FixtureError, GSTowerError
from .magnus import FreeWord, depth, rank_equality_depth
from .rdbound import FieldData, PlaceData, default_precision, mixed_bound, tame_bound, wild2_bound
from .series import GSSeries, Verdict, VerdictKind, cut, find_witness

SCHEMA_VERSION = 1


def _schema(name: str) -> dict:
    return json.loads(resources.files("gstower").joinpath("schemas").joinpath(name).read_text(encoding="utf-8"))


def fixture_dir() -> Path:
    return Path(str(resources.files("gstower").joinpath("fixtures")))


@dataclass(frozen=True)
class CutEntry:
    kind: str
    description: str
    data: dict

    @property
    def expect_series(self) -> Optional[str]:
        return self.data.get("expect_series")


@dataclass(frozen=True)
class Variant:
    name: str
    cuts: tuple[CutEntry, ...]
    series: str
    verdict: str
    note: str = ""


@dataclass(frozen=True)
class CaseFixture:
    id: str
    title: str
    p: int
    field: Optional[FieldData]
    base_ranks: Optional[RankProfile]
    ranks: RankProfile
    relation_rule: dict
    cut_ledger: tuple[CutEntry, ...]
    variants: tuple[Variant, ...]
    rd_method: Optional[str]
    places: tuple[PlaceData, ...]
    savings: Optional[dict]
    expected: dict
    notes: tuple[str, ...] = ()
    provenance: dict = field(default_factory=dict, compare=False)
    source: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict, source: Optional[str] = None) -> "CaseFixture":
        try:
            jsonschema.validate(data, _schema("fixture.schema.json"))
        except jsonschema.ValidationError as exc:
            where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
            raise FixtureError(f"{source or data.get('id', '?')}: {where}: {exc.message}") from None
        try:
            p = data["p"]
            ranks = data["ranks"]
            rd = data.get("rd_bound") or {}
            places: list[PlaceData] = []
            for v in rd.get("places", []):
                places += [PlaceData.from_dict(v, p)] * v.get("count", 1)
            return cls(
                id=data["id"],
                title=data["title"],
                p=p,
                field=None if data.get("field") is None else FieldData.from_dict(data["field"]),
                base_ranks=profile_from_dict(ranks.get("base")),
                ranks=profile_from_dict(ranks["S"]),
                relation_rule=dict(data["relation_rule"]),
                cut_ledger=tuple(_entry(e) for e in data["cut_ledger"]),
                variants=tuple(
                    Variant(v["name"], tuple(_entry(e) for e in v["cuts"]), v["series"], v["verdict"], v.get("note", ""))
                    for v in data.get("variants", [])
                ),
                rd_method=rd.get("method"),
                places=tuple(places),
                savings=rd.get("savings"),
                expected=dict(data["expected"]),
                notes=tuple(data.get("notes", [])),
                provenance=dict(data.get("provenance", {})),
                source=source,
            )
        except (ValueError, TypeError, KeyError, GSTowerError) as exc:
            raise FixtureError(f"{source or data.get('id', '?')}: {exc}") from exc


def profile_from_dict(data: Optional[dict]) -> Optional[RankProfile]:
    if data is None:
        return None
    places = []
    for v in data["S"]:
        places += [Place.from_dict(v)] * v.get("count", 1)
    return RankProfile(
        p=data["p"],
        r1=data["r1"],
        r2=data["r2"],
        delta_K=data["delta_K"],
        S=tuple(places),
        B_S_rank=data.get("B_S_rank"),
        measured_d=data.get("measured_d"),
    )


def _entry(data: dict) -> CutEntry:
    return CutEntry(data["kind"], data["description"], dict(data))


def load_fixture(path: Union[str, Path]) -> CaseFixture:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FixtureError(f"{path.name}: {exc}") from exc
    fx = CaseFixture.from_dict(data, source=path.name)
    if path.stem != fx.id:
        raise FixtureError(f"{path.name}: file name does not match id {fx.id!r}")
    return fx


def load_fixtures(directory: Union[str, Path, None] = None) -> list[CaseFixture]:
    directory = fixture_dir() if directory is None else Path(directory)
    fixtures = [load_fixture(p) for p in sorted(directory.glob("*.json"))]
    ids = [f.id for f in fixtures]
    if len(set(ids)) != len(ids):
        raise FixtureError("duplicate fixture ids")
    return sorted(fixtures, key=lambda f: f.id)


# -- report --------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


@dataclass
class CertReport:
    fixture_id: str
    title: str
    checks: list[Check] = field(default_factory=list)
    series: Optional[GSSeries] = None
    verdict: Optional[Verdict] = None
    cut_series: Optional[GSSeries] = None
    cut_verdict: Optional[Verdict] = None
    rd_bound: Optional[CertifiedReal] = None
    error: Optional[str] = None
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str) -> bool:
        self.checks.append(Check(name, bool(ok), detail))
        return ok

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "id": self.fixture_id,
            "title": self.title,
            "passed": self.passed,
            "series": None if self.series is None else str(self.series),
            "verdict": None if self.verdict is None else self.verdict.to_dict(),
            "cut_series": None if self.cut_series is None else str(self.cut_series),
            "cut_verdict": None if self.cut_verdict is None else self.cut_verdict.to_dict(),
            "rd_bound": None if self.rd_bound is None else {**self.rd_bound.to_dict(), "display": self.rd_bound.upper_decimal()},
            "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in self.checks],
            "error": self.error,
        }
        if timing:
            out["elapsed_seconds"] = round(self.elapsed, 6)
        return out

    def render(self, timing: bool = False) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.fixture_id}: {self.title}"
        if timing:
            head += f" ({self.elapsed * 1000:.1f} ms)"
        lines = [head]
        for c in self.checks:
            lines.append(f"  {'ok  ' if c.ok else 'FAIL'} {c.name}: {c.detail}")
        if self.error:
            lines.append(f"  ERROR {self.error}")
        return "\n".join(lines)


@dataclass
class ReplaySummary:
    reports: list[CertReport]

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.reports)

    @property
    def failed(self) -> int:
        return len(self.reports) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self, timing: bool = False) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "summary": {"total": len(self.reports), "passed": self.passed, "failed": self.failed},
            "reports": [r.to_dict(timing) for r in self.reports],
        }

    def render(self, timing: bool = False) -> str:
        blocks = [r.render(timing) for r in self.reports]
        blocks.append(f"{self.passed}/{len(self.reports)} fixtures passed")
        return "\n".join(blocks)

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True)


# -- replay --------------------------------------------------------------------


def _complete(rp: RankProfile) -> tuple[RankProfile, int]:
    """Fill in a missing B_S rank from the measured rank, then evaluate the rank formula."""
    if rp.B_S_rank is None:
        rp = replace(rp, B_S_rank=solve_b_rank(rp))
    return rp, h1_rank(rp)


def _relation_count(rule: dict, rp: RankProfile, d: int) -> int:
    kind = rule["kind"]
    if kind == "tame":
        return r_upper_bound(rp)
    if kind == "wild":
        return wild_relation_count(d, rp.r2)
    return int(rule.get("count", 0))


def _series_check(report: CertReport, name: str, computed: GSSeries, expected: Optional[str]):
    if expected is None:
        return
    want = GSSeries.parse(expected)
    report.add(name, computed == want, f"{computed} (expected {want})")


def _verdict_check(report: CertReport, name: str, s: GSSeries, verdict: Verdict, expected: Optional[str]):
    if expected is not None:
        report.add(name, verdict.kind.value == expected, f"{verdict} (expected {expected})")
    if verdict.t0 is not None:
        value = s.eval(verdict.t0)
        report.add(f"{name}.recheck", value == verdict.value, f"P({fmt(verdict.t0)}) = {fmt(value)}")


def _cut_depth(entry: CutEntry, fx: CaseFixture, report: CertReport) -> list[tuple[int, int]]:
    """Depth lower bounds and counts contributed by one ledger entry."""
    d = entry.data
    if entry.kind == "relation":
        return [(d["depth"], d.get("count", 1))]
    if entry.kind == "local_commutators":
        pairs = [a + b for a, b in combinations(d["generator_depths"], 2)]
        places = d.get("places", 1)
        by_depth: dict[int, int] = {}
        for k in pairs:
            by_depth[k] = by_depth.get(k, 0) + places
        return sorted(by_depth.items())
    # inertia_power: tau^(p^k) has depth at least p^k * depth(tau)
    rule = d["tau_depth"]
    if rule["rule"] == "rank_gap":
        base, s = fx.base_ranks, fx.ranks
        ok = base is not None and base.measured_d is not None and s.measured_d is not None and base.measured_d < s.measured_d
        report.add(f"ledger.{entry.description}.rank_gap", ok, "p-rank grows when the places are added")
        tau = 1
    elif rule["rule"] == "rank_equality":
        base, s = fx.base_ranks, fx.ranks
        ok = base is not None and base.measured_d is not None and base.measured_d == s.measured_d
        report.add(f"ledger.{entry.description}.rank_equality", ok, "p-rank unchanged when the places are added")
        tau = rank_equality_depth(rule.get("level", 1))
    else:
        tau = rule["depth"]
    power = fx.p ** d["k"]
    if tau == 1:
        # the free-group lower bound is attained by a generator: check it with the Magnus embedding
        w = FreeWord(1, ((0, power),))
        got = depth(w, fx.p, power)
        report.add(f"ledger.{entry.description}.magnus", got.is_exact and got.value == power, f"depth(x0^{power}) = {got}")
    return [(power * tau, d.get("count", 1))]


def _apply(s: GSSeries, entries: Sequence[CutEntry], fx: CaseFixture, report: CertReport, prefix: str) -> GSSeries:
    for entry in entries:
        for k, count in _cut_depth(entry, fx, report):
            s = cut(s, k, count)
        _series_check(report, f"{prefix}.{entry.description}", s, entry.expect_series)
    return s


def rd_bound_for(fx: CaseFixture, precision=None) -> Optional[CertifiedReal]:
    if fx.rd_method is None or fx.field is None:
        return None
    precision = default_precision() if precision is None else to_rational(precision)
    if fx.rd_method == "base":
        return fx.field.rd(precision)
    if fx.rd_method == "tame":
        return tame_bound(fx.field, fx.places, precision)
    if fx.rd_method == "wild2":
        return wild2_bound(fx.field, fx.places, precision)
    tame = [v for v in fx.places if v.tame]
    wild = [v for v in fx.places if not v.tame]
    return mixed_bound(fx.field, tame, wild, precision=precision)


def replay(fx: CaseFixture, precision=None, strict: bool = False) -> CertReport:
    """Recompute one fixture and compare with its expectations.

    With ``strict`` a failed expectation raises ConsistencyError instead of
    being recorded in the report.
    """
    precision = default_precision() if precision is None else to_rational(precision)
    report = CertReport(fx.id, fx.title)
    start = time.perf_counter()
    try:
        _replay_into(fx, precision, report)
    except GSTowerError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
    report.elapsed = time.perf_counter() - start
    if strict and not report.passed:
        failed = [c.name for c in report.checks if not c.ok]
        raise ConsistencyError(f"fixture {fx.id} failed: {report.error or ', '.join(failed)}")
    return report


def _replay_into(fx: CaseFixture, precision: Fraction, report: CertReport):
    exp = fx.expected

    if fx.base_ranks is not None:
        rp0, d0 = _complete(fx.base_ranks)
        report.add("ranks.base", True, f"d = {d0}, B rank = {rp0.B_S_rank}")
        base = GSSeries.quadratic(d0, r_upper_bound(rp0))
        _series_check(report, "base.series", base, exp.get("base_series"))
        v0 = find_witness(base)
        _verdict_check(report, "base.verdict", base, v0, exp.get("base_verdict"))
        if "base_provably_positive" in exp:
            want = exp["base_provably_positive"]
            report.add("base.provably_positive", v0.provably_positive == want, f"{v0.provably_positive} (expected {want})")

    rp, d = _complete(fx.ranks)
    r = _relation_count(fx.relation_rule, rp, d)
    report.add("ranks.S", True, f"d = {d}, B rank = {rp.B_S_rank}, r <= {r}")
    series = GSSeries.quadratic(d, r)
    report.series = series
    _series_check(report, "series", series, exp["series"])
    verdict = find_witness(series)
    report.verdict = verdict
    _verdict_check(report, "verdict", series, verdict, exp["verdict"])

    route = exp["route"]
    alpha = alpha_test(d, rp.r1, rp.r2, not rp.S, rp.delta_K)
    if route == "ALPHA_TEST":
        ok = alpha and verdict.kind is VerdictKind.CUTTABLE
    elif route == "P_AT_T0_ZERO":
        ok = (not alpha) and verdict.kind is VerdictKind.BOUNDARY_INFINITE
    else:
        ok = verdict.kind is VerdictKind.CUTTABLE
    report.add("route", ok, f"{route} (alpha test {'passes' if alpha else 'fails'}, verdict {verdict.kind.value})")

    current = _apply(series, fx.cut_ledger, fx, report, "ledger")
    if fx.cut_ledger or "cut_series" in exp:
        report.cut_series = current
        _series_check(report, "cut.series", current, exp.get("cut_series"))
        cv = find_witness(current)
        report.cut_verdict = cv
        _verdict_check(report, "cut.verdict", current, cv, exp.get("cut_verdict"))

    for variant in fx.variants:
        s = _apply(current, variant.cuts, fx, report, f"variant.{variant.name}")
        _series_check(report, f"variant.{variant.name}.series", s, variant.series)
        _verdict_check(report, f"variant.{variant.name}.verdict", s, find_witness(s), variant.verdict)

    bound = rd_bound_for(fx, precision)
    report.rd_bound = bound
    if "rd_bound" in exp:
        if bound is None:
            report.add("rd_bound", False, "fixture expects a bound but has no field data")
        else:
            target = Fraction(exp["rd_bound"])
            tol = Fraction(exp.get("rd_tolerance", "0.0005"))
            ok = bound.upper < target and target - bound.upper <= tol
            report.add("rd_bound", ok, f"{bound} vs < {exp['rd_bound']} (tolerance {exp.get('rd_tolerance', '0.0005')})")
    if fx.savings is not None and fx.field is not None:
        uncapped = [replace(v, k=None) for v in fx.places]
        ratio = tame_bound(fx.field, uncapped, precision) / bound
        factor = rational_power(fx.savings["base"], Fraction(fx.savings["exponent"]), precision)
        approx = fx.savings["approx"]
        places = len(approx.split(".")[1])
        ok = factor.lower_decimal(places) == approx and (ratio - factor).lower <= 0 <= (ratio - factor).upper
        report.add(
            "rd_bound.savings",
            ok,
            f"{fx.savings['base']}^{fx.savings['exponent']} = {factor.lower_decimal(places + 3)}..., "
            f"uncapped/capped = {ratio.lower_decimal(places + 3)}...",
        )


def replay_all(
    filter_glob: Optional[str] = None, directory: Union[str, Path, None] = None, precision=None
) -> ReplaySummary:
    """Replay every fixture whose id matches ``filter_glob``; reports are ordered by id."""
    reports = []
    for fx in load_fixtures(directory):
        if filter_glob is None or fnmatch.fnmatchcase(fx.id, filter_glob):
            reports.append(replay(fx, precision))
    return ReplaySummary(sorted(reports, key=lambda r: r.fixture_id))
