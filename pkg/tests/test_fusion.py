from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from boxfinder.fusion import FusionParams, rrf, rrf_exact

from oracles import rrf_bruteforce

A, B, C = "1900", "1901", "1902"


def test_hand_case():
    fused = rrf_exact([[(A, 9.0), (B, 1.0)], [(A, 3.0), (C, 2.0)]], 60)
    assert fused == [(A, Fraction(2, 61)), (B, Fraction(1, 62)), (C, Fraction(1, 62))]
    floats = rrf([[(A, 9.0), (B, 1.0)], [(A, 3.0), (C, 2.0)]])
    assert [b for b, _ in floats] == [A, B, C]
    assert floats[0][1] == pytest.approx(0.032787, abs=1e-6)


def test_empty_rules():
    lst = [("1905", 2.0), ("1901", 1.0)]
    assert [b for b, _ in rrf([[], lst])] == ["1905", "1901"]
    assert [b for b, _ in rrf([lst, []])] == ["1905", "1901"]
    assert rrf([[], []]) == []
    assert rrf([]) == []


def test_params():
    assert FusionParams().discount == 60
    with pytest.raises(ValueError):
        FusionParams(0)
    fused = rrf([[(A, 1.0)], [(B, 1.0), (A, 0.5)]], FusionParams(1))
    assert fused[0] == (A, pytest.approx(1 / 2 + 1 / 3))


ranked_st = st.lists(st.sampled_from([str(i) for i in range(1900, 1912)]), unique=True, max_size=8).map(
    lambda ids: [(b, float(len(ids) - i)) for i, b in enumerate(ids)]
)


@given(st.lists(ranked_st, max_size=4), st.randoms())
def test_permutation_invariant(lists, rnd):
    shuffled = list(lists)
    rnd.shuffle(shuffled)
    assert rrf(lists) == rrf(shuffled)


@given(st.lists(ranked_st, max_size=4), st.floats(0.01, 100))
def test_depends_only_on_ranks(lists, factor):
    scaled = [[(b, s * factor) for b, s in lst] for lst in lists]
    assert rrf(lists) == rrf(scaled)


@given(ranked_st, st.integers(0, 3))
def test_single_nonempty_list_keeps_order(lst, n_empty):
    assert [b for b, _ in rrf([lst] + [[]] * n_empty)] == [b for b, _ in lst]


@given(st.lists(ranked_st, max_size=4))
def test_matches_bruteforce(lists):
    assert rrf_exact(lists) == rrf_bruteforce(lists)
