import pytest
from hypothesis import given, strategies as st

from eocsim import SelfPolicy, Situation, distance, is_nonself

counts = st.integers(min_value=0, max_value=10_000)
situations = st.builds(
    Situation, s=counts, e=counts, i=counts, ii=counts, r=counts, im=counts, d=counts,
    timestamp=st.integers(min_value=0, max_value=600),
)


def fold_distance(a: Situation, b: Situation) -> int:
    # Independent oracle: explicit field-by-field absolute-difference fold.
    total = 0
    for name in ("s", "e", "i", "ii", "r", "im", "d"):
        total += abs(getattr(a, name) - getattr(b, name))
    return total


def test_worked_example():
    a = Situation(i=2, ii=1)
    b = Situation(im=31)
    assert distance(a, b) == 2 + 1 + 31


def test_distance_identity():
    x = Situation(s=50, e=10, i=20, ii=10, r=1, d=3)
    assert distance(x, x) == 0


def test_timestamp_excluded():
    a = Situation(s=5, timestamp=0)
    b = Situation(s=5, timestamp=480)
    assert distance(a, b) == 0


@given(situations, situations)
def test_distance_matches_fold_oracle(a, b):
    assert distance(a, b) == fold_distance(a, b)


@given(situations, situations)
def test_distance_symmetry_and_nonnegativity(a, b):
    assert distance(a, b) >= 0
    assert distance(a, b) == distance(b, a)


@given(situations, situations)
def test_identity_of_indiscernibles(a, b):
    if distance(a, b) == 0:
        assert a.counts() == b.counts()
    else:
        assert a.counts() != b.counts()


@given(situations, situations, situations)
def test_triangle_inequality(a, b, c):
    assert distance(a, c) <= distance(a, b) + distance(b, c)


def test_negative_count_rejected():
    with pytest.raises(ValueError, match="must be >= 0"):
        Situation(s=-1)


def test_nonself_cases():
    policy = SelfPolicy(nonself_infection_threshold=1)
    assert not is_nonself(Situation(s=1000), policy)
    assert is_nonself(Situation(s=997, i=3), policy)
    assert not is_nonself(Situation(im=1000), policy)


@given(situations, st.integers(min_value=0, max_value=5),
       st.sampled_from(["e", "i", "ii"]), st.integers(min_value=0, max_value=100))
def test_nonself_monotone_in_infection(sit, threshold, state_field, extra):
    policy = SelfPolicy(threshold)
    bumped = Situation(**{
        name: getattr(sit, name) + (extra if name == state_field else 0)
        for name in ("s", "e", "i", "ii", "r", "im", "d")
    })
    if is_nonself(sit, policy):
        assert is_nonself(bumped, policy)


def test_default_policy_threshold():
    assert is_nonself(Situation(e=1))
    assert not is_nonself(Situation(s=1, r=2, im=3, d=4))
