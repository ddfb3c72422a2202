import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from privcmp.adversary import (
    TrentStrategy,
    ambiguity_swap,
    apply_strategy,
    brute_force_consistent,
    enumerate_consistent,
)
from privcmp.errors import ZeroLambda
from privcmp.numeric import Scalar, sample_scalar

rationals = st.builds(
    Scalar,
    st.integers(min_value=-(2 ** 64), max_value=2 ** 64),
    st.integers(min_value=1, max_value=2 ** 64),
)


def test_apply_honest():
    s = TrentStrategy.honest()
    assert apply_strategy(s, 1, 0) == 0
    assert apply_strategy(s, 9, 1) == 1
    assert apply_strategy(s, 4, True) is True


def test_apply_flip_rounds():
    s = TrentStrategy.flip_rounds({3})
    assert apply_strategy(s, 3, 0) == 1
    assert apply_strategy(s, 2, 0) == 0
    assert apply_strategy(s, 3, True) is False


def test_flip_random_needs_resolution():
    with pytest.raises(ValueError):
        apply_strategy(TrentStrategy.flip_random(2), 1, 0)


@pytest.mark.parametrize("k", [0, 1, 3, 10])
def test_flip_random_exact_count(k):
    r = random.Random(k)
    for _ in range(50):
        resolved = TrentStrategy.flip_random(k).start_run(10, r)
        assert len(resolved.rounds) == k
        assert resolved.rounds <= set(range(1, 11))


def test_flip_random_uniform():
    r = random.Random(0)
    counts = [0] * 4
    for _ in range(4000):
        (i,) = TrentStrategy.flip_random(1).start_run(4, r).rounds
        counts[i - 1] += 1
    assert all(abs(c - 1000) < 150 for c in counts)


def test_start_run_validation():
    with pytest.raises(ValueError):
        TrentStrategy.flip_rounds({7}).start_run(5, random.Random(0))
    with pytest.raises(ValueError):
        TrentStrategy.equality_lie(None).start_run(5, random.Random(0), protocol="p1")
    with pytest.raises(ValueError):
        TrentStrategy.flip_random(6).start_run(5, random.Random(0))


@pytest.mark.parametrize("text, kind, rounds, k", [
    ("honest", "honest", frozenset(), 0),
    ("flip-random:1", "flip_random", frozenset(), 1),
    ("flip-rounds:2,5", "flip_rounds", frozenset({2, 5}), 0),
    ("equality-lie:all", "equality_lie", None, 0),
])
def test_parse(text, kind, rounds, k):
    s = TrentStrategy.parse(text)
    assert (s.kind, s.rounds, s.k) == (kind, rounds, k)


def test_parse_unknown():
    with pytest.raises(ValueError):
        TrentStrategy.parse("bribe")


def test_swap_example():
    swapped = ambiguity_swap(Scalar(2), Scalar(1), Scalar(5), Scalar(3))
    assert swapped == (1, 2, 14, -3)
    a, b, c, lam = swapped
    assert lam * a + c == 11
    assert lam * b + c == 8


def test_swap_zero_lambda():
    with pytest.raises(ZeroLambda):
        ambiguity_swap(Scalar(1), Scalar(2), Scalar(0), Scalar(0))


@given(rationals, rationals, rationals, rationals.filter(lambda x: x != 0))
def test_swap_reproduces_observation(u, v, c0, lam0):
    alpha, beta = lam0 * u + c0, lam0 * v + c0
    a, b, c, lam = ambiguity_swap(u, v, c0, lam0)
    assert (lam * a + c, lam * b + c) == (alpha, beta)
    assert ambiguity_swap(a, b, c, lam) == (u, v, c0, lam0)


def test_swap_thousand_random():
    r = random.Random(42)
    for _ in range(1000):
        u, v, c0 = (sample_scalar(r, 64) for _ in range(3))
        lam0 = sample_scalar(r, 64, nonzero=True)
        a, b, c, lam = ambiguity_swap(u, v, c0, lam0)
        assert lam * a + c == lam0 * u + c0
        assert lam * b + c == lam0 * v + c0


def test_enumerate_both_orderings():
    secrets = [Scalar(x) for x in range(-5, 6)]
    params = [Scalar(x) for x in range(-20, 21)]
    report = enumerate_consistent((Scalar(11), Scalar(8)), secrets, params)
    assert report.orderings_possible == {"greater", "less"}
    assert (Scalar(2), Scalar(1), Scalar(5), Scalar(3)) in report.hypotheses
    assert (Scalar(1), Scalar(2), Scalar(14), Scalar(-3)) in report.hypotheses
    for a, b, c, lam in report.hypotheses:
        assert lam * a + c == 11 and lam * b + c == 8


def test_enumerate_matches_full_product():
    secrets = [Scalar(x) for x in range(-3, 4)]
    params = [Scalar(x) for x in range(-8, 9)]
    obs = (Scalar(7), Scalar(1))
    report = enumerate_consistent(obs, secrets, params)
    assert report.hypotheses == brute_force_consistent(obs, secrets, params)


def test_enumerate_degenerate_domain():
    secrets = [Scalar(x) for x in range(-5, 6)]
    report = enumerate_consistent((Scalar(11), Scalar(8)), secrets, [Scalar(5)],
                                  lambda_domain=[Scalar(3)])
    assert report.hypotheses == [(2, 1, 5, 3)]
    assert report.orderings_possible == {"greater"}


def test_enumerate_equal_observation():
    secrets = [Scalar(x) for x in range(-4, 5)]
    params = [Scalar(x) for x in range(-6, 7)]
    report = enumerate_consistent((Scalar(4), Scalar(4)), secrets, params)
    assert report.hypotheses
    assert all(a == b for a, b, _, _ in report.hypotheses)
    assert report.orderings_possible == {"equal"}


def test_report_json():
    report = enumerate_consistent((Scalar(11), Scalar(8)), [Scalar(1), Scalar(2)],
                                  [Scalar(5)], lambda_domain=[Scalar(3)])
    assert report.to_dict() == {
        "observed": ["11/1", "8/1"],
        "hypotheses": [["2/1", "1/1", "5/1", "3/1"]],
        "orderings_possible": ["greater"],
    }
