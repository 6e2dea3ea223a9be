import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gstower.casebook import load_fixtures
from gstower.cft import (
    Place,
    RankProfile,
    alpha_test,
    h1_rank,
    r_upper_bound,
    solve_b_rank,
    wild_relation_count,
)
from gstower.errors import BranchError, ConsistencyError, PreconditionError


def test_b_rank_by_inversion():
    assert solve_b_rank(RankProfile(2, 8, 0, 1, measured_d=8)) == 16
    assert solve_b_rank(RankProfile(2, 0, 6, 1, measured_d=7)) == 13


def test_h1_rank_cross_validates():
    assert h1_rank(RankProfile(2, 8, 0, 1, B_S_rank=16, measured_d=8)) == 8
    with pytest.raises(ConsistencyError):
        h1_rank(RankProfile(2, 8, 0, 1, B_S_rank=16, measured_d=9))


def test_degenerate_profile():
    assert h1_rank(RankProfile(3, 0, 0, 1, B_S_rank=0)) == 0


def test_missing_inputs():
    with pytest.raises(PreconditionError):
        h1_rank(RankProfile(2, 1, 0, 1))
    with pytest.raises(PreconditionError):
        solve_b_rank(RankProfile(2, 1, 0, 1))
    with pytest.raises(ConsistencyError):
        solve_b_rank(RankProfile(2, 0, 0, 1, S=(Place(7, 1), Place(11, 1)), measured_d=1))


def test_profile_invariants():
    with pytest.raises(ConsistencyError):
        RankProfile(2, 1, 0, 0)
    with pytest.raises(ValueError):
        RankProfile(3, 1, 0, 2)
    with pytest.raises(ValueError):
        Place(7, 2)
    with pytest.raises(ValueError):
        Place(2, 1, tame=False)


def test_r_upper_bound_examples():
    nine = Place(9, 1)
    assert r_upper_bound(RankProfile(2, 0, 6, 1, S=(nine,), B_S_rank=12)) == 12
    assert r_upper_bound(RankProfile(2, 8, 0, 1, B_S_rank=16)) == 16
    assert r_upper_bound(RankProfile(2, 8, 0, 1, B_S_rank=0)) == 0
    with pytest.raises(BranchError):
        r_upper_bound(RankProfile(2, 0, 2, 1, S=(Place(2, 1, tame=False, local_degree=2),), B_S_rank=0))


def test_wild_relation_count():
    assert wild_relation_count(5, 1) == 3
    assert wild_relation_count(7, 6) == 0
    with pytest.raises(PreconditionError):
        wild_relation_count(3, 3)


def test_alpha_examples():
    assert not alpha_test(8, 8, 0, True, 1)
    assert alpha_test(9, 12, 0, False, 1)
    assert not alpha_test(2, 0, 0, True, 0)


def test_alpha_against_float_grid():
    checked = 0
    for d, r1, r2, empty, delta in itertools.product(range(51), range(51), range(0, 51, 5), (True, False), (0, 1)):
        theta = delta if empty else 0
        alpha = 2 + 2 * math.sqrt(r1 + r2 + theta)
        if abs(d - alpha) < 1e-9:
            continue
        assert alpha_test(d, r1, r2, empty, delta) == (d > alpha)
        checked += 1
    assert checked > 100_000


places_st = st.lists(st.builds(Place, st.integers(2, 1000), st.integers(0, 1)), max_size=6)


@given(places_st, st.integers(0, 10), st.integers(0, 10), st.integers(0, 20), st.randoms())
def test_h1_rank_ignores_place_order(places, r1, r2, b, rnd):
    rp = RankProfile(3, r1, r2, 0, S=tuple(places), B_S_rank=b)
    shuffled = list(places)
    rnd.shuffle(shuffled)
    assert h1_rank(rp) == h1_rank(RankProfile(3, r1, r2, 0, S=tuple(shuffled), B_S_rank=b))


@given(places_st, st.integers(0, 10), st.integers(0, 10), st.integers(0, 20))
def test_h1_rank_is_linear_in_each_summand(places, r1, r2, b):
    base = h1_rank(RankProfile(3, r1, r2, 0, S=tuple(places), B_S_rank=b))
    assert h1_rank(RankProfile(3, r1, r2, 0, S=tuple(places), B_S_rank=b + 1)) == base + 1
    assert h1_rank(RankProfile(3, r1 + 1, r2, 0, S=tuple(places), B_S_rank=b)) == base - 1
    assert h1_rank(RankProfile(3, r1, r2, 0, S=tuple(places) + (Place(7, 1),), B_S_rank=b)) == base + 1
    wild = Place(3, 0, tame=False, local_degree=4)
    assert h1_rank(RankProfile(3, r1, r2, 0, S=tuple(places) + (wild,), B_S_rank=b)) == base + 4


def test_every_fixture_profile_is_consistent():
    fixtures = load_fixtures()
    assert len(fixtures) == 8
    for fx in fixtures:
        for rp in (fx.base_ranks, fx.ranks):
            if rp is not None and rp.B_S_rank is not None:
                h1_rank(rp)


def test_profile_json_round_trip():
    data = {"p": 2, "r1": 0, "r2": 6, "delta_K": 1, "S": [{"norm": "9", "delta_v": 1, "tame": True}], "B_S_rank": 12, "measured_d": 7}
    rp = RankProfile.from_dict(data)
    assert h1_rank(rp) == 7
    assert RankProfile.from_dict(rp.to_dict()) == rp
