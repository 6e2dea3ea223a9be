"""Generator and relation rank bookkeeping for G_S from measured p-ranks.

Nothing here computes class groups: the Kummer-side rank ``d_p B_S`` and the
software-measured ``d_p G_S`` come in as data, and the formulas below only
combine them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import BranchError, ConsistencyError, PreconditionError


@dataclass(frozen=True)
class Place:
    """A finite place in S.

    ``delta_v`` is 1 when the completion contains the p-th roots of unity.
    Wild places (above p) carry their local degree ``[K_v : Q_p]``.
    """

    norm: int
    delta_v: int
    tame: bool = True
    local_degree: Optional[int] = None

    def __post_init__(self):
        if self.delta_v not in (0, 1):
            raise ValueError("delta_v must be 0 or 1")
        if not self.tame and (self.local_degree is None or self.local_degree < 1):
            raise ValueError("a wild place needs its local degree")

    @classmethod
    def from_dict(cls, data: dict) -> "Place":
        return cls(
            norm=int(data["norm"]),
            delta_v=int(data["delta_v"]),
            tame=bool(data.get("tame", True)),
            local_degree=data.get("local_degree"),
        )

    def to_dict(self) -> dict:
        out = {"norm": str(self.norm), "delta_v": self.delta_v, "tame": self.tame}
        if self.local_degree is not None:
            out["local_degree"] = self.local_degree
        return out


@dataclass(frozen=True)
class RankProfile:
    p: int
    r1: int
    r2: int
    delta_K: int
    S: tuple[Place, ...] = ()
    B_S_rank: Optional[int] = None
    measured_d: Optional[int] = None
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "S", tuple(self.S))
        if self.delta_K not in (0, 1):
            raise ValueError("delta_K must be 0 or 1")
        if self.p == 2 and self.delta_K != 1:
            raise ConsistencyError("for p = 2 the field always contains mu_2")
        if min(self.r1, self.r2) < 0 or (self.B_S_rank is not None and self.B_S_rank < 0):
            raise ValueError("ranks and signature entries must be nonnegative")

    @property
    def tame_places(self) -> tuple[Place, ...]:
        return tuple(v for v in self.S if v.tame)

    @property
    def wild_places(self) -> tuple[Place, ...]:
        return tuple(v for v in self.S if not v.tame)

    @classmethod
    def from_dict(cls, data: dict) -> "RankProfile":
        return cls(
            p=int(data["p"]),
            r1=int(data["r1"]),
            r2=int(data["r2"]),
            delta_K=int(data["delta_K"]),
            S=tuple(Place.from_dict(v) for v in data.get("S", [])),
            B_S_rank=data.get("B_S_rank"),
            measured_d=data.get("measured_d"),
            provenance=dict(data.get("provenance", {})),
        )

    def to_dict(self) -> dict:
        out = {
            "p": self.p,
            "r1": self.r1,
            "r2": self.r2,
            "delta_K": self.delta_K,
            "S": [v.to_dict() for v in self.S],
            "B_S_rank": self.B_S_rank,
            "measured_d": self.measured_d,
        }
        if self.provenance:
            out["provenance"] = dict(self.provenance)
        return out


def _h1_without_b(rp: RankProfile) -> int:
    wild_degree = sum(v.local_degree for v in rp.wild_places)
    deltas = sum(v.delta_v for v in rp.S)
    return wild_degree - rp.delta_K + deltas - (rp.r1 + rp.r2) + 1


def h1_rank(rp: RankProfile) -> int:
    """Generator rank ``d_p G_S`` from the local degrees, delta flags, signature and ``d_p B_S``.

    When the profile also carries a measured rank the two must agree.
    """
    if rp.B_S_rank is None:
        raise PreconditionError("profile has no B_S rank; use solve_b_rank")
    d = _h1_without_b(rp) + rp.B_S_rank
    if rp.measured_d is not None and rp.measured_d != d:
        raise ConsistencyError(f"rank formula gives d = {d} but the measured rank is {rp.measured_d}")
    return d


def solve_b_rank(rp: RankProfile) -> int:
    """Invert the rank formula: the ``d_p B_S`` implied by a measured ``d_p G_S``."""
    if rp.measured_d is None:
        raise PreconditionError("profile has no measured generator rank")
    b = rp.measured_d - _h1_without_b(rp)
    if b < 0:
        raise ConsistencyError(f"measured rank {rp.measured_d} implies a negative B_S rank {b}")
    return b


def r_upper_bound(rp: RankProfile) -> int:
    """Upper bound for the relation rank of G_S when S is tame."""
    if rp.wild_places:
        raise BranchError("S contains places above p; use wild_relation_count")
    if rp.B_S_rank is None:
        raise PreconditionError("profile has no B_S rank")
    if not rp.S:
        return rp.B_S_rank
    return rp.B_S_rank + len(rp.S) - rp.delta_K


def wild_relation_count(d: int, r2: int) -> int:
    """Relation rank ``d - r2 - 1`` of G_{S_p} (cohomological dimension 2)."""
    if d < r2 + 1:
        raise PreconditionError(f"d = {d} is below r2 + 1 = {r2 + 1}")
    return d - r2 - 1


def alpha_test(d: int, r1: int, r2: int, S_empty: bool, delta_K: int) -> bool:
    """Exact check of ``d > 2 + 2 sqrt(r1 + r2 + theta)``.

    theta is delta_K for empty S and 0 otherwise.  Squaring is legitimate
    because both sides are positive once d > 2.
    """
    if min(d, r1, r2) < 0:
        raise ValueError("inputs must be nonnegative")
    theta = delta_K if S_empty else 0
    return d > 2 and (d - 2) ** 2 > 4 * (r1 + r2 + theta)
