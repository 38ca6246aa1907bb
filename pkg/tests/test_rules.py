import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pvlab.core import PresenceMask, Provenance, VisibleProfile
from pvlab.oracles import brute_av, brute_phragmen, brute_phragmen_score, random_profile
from pvlab.rules import (
    ConsensusState,
    ParticipationMode,
    PhragmenState,
    QuotaState,
    make_engine,
    phragmen_score,
    round_support,
    select_av,
    select_consensus,
    select_phragmen,
    select_quota,
)

EXAMPLE = VisibleProfile.observed([{0}, {0}, {1}])
EMPTY = VisibleProfile.observed([set(), set(), set()])


@st.composite
def profiles(draw, max_voters=6, max_alternatives=4):
    n = draw(st.integers(1, max_voters))
    m = draw(st.integers(1, max_alternatives))
    approvals = draw(st.lists(st.frozensets(st.integers(0, m - 1)), min_size=n, max_size=n))
    return approvals, m


# approval voting


def test_av_majority():
    assert select_av(EXAMPLE, 2) == 0


def test_av_empty_ties_to_first():
    assert select_av(EMPTY, 3) == 0


def test_av_matches_count(rng):
    for _ in range(50):
        approvals = random_profile(rng, 5, 4)
        assert select_av(VisibleProfile.observed(approvals), 4) == brute_av(approvals, 4)


def test_no_alternatives_rejected():
    with pytest.raises(ValueError):
        select_av(EXAMPLE, 0)


# Phragmén


@pytest.mark.parametrize(
    "loads, approvers, score, chosen",
    [
        ([0.0, 0.0], [0, 1], 0.5, {0, 1}),
        ([0.5, 0.0], [0, 1], 0.75, {0, 1}),
        ([0.3], [0], 1.3, {0}),
    ],
)
def test_phragmen_score_examples(loads, approvers, score, chosen):
    got, got_set = phragmen_score(np.array(loads), approvers)
    assert got == pytest.approx(score, abs=1e-15)
    assert got_set == frozenset(chosen)


def test_phragmen_score_no_approvers():
    assert phragmen_score(np.zeros(3), []) == (math.inf, frozenset())


def test_phragmen_fresh_round():
    winner, state = select_phragmen(PhragmenState.initial(3), EXAMPLE, 2)
    assert winner == 0
    np.testing.assert_array_equal(state.loads, [0.5, 0.5, 0.0])


def test_phragmen_empty_ballots_keep_loads():
    start = PhragmenState(np.array([0.2, 0.4, 0.1]))
    winner, state = select_phragmen(start, EMPTY, 3)
    assert winner == 0
    np.testing.assert_array_equal(state.loads, start.loads)


def test_phragmen_matches_enumeration(rng):
    for _ in range(100):
        loads = rng.uniform(0, 2, 5)
        approvals = random_profile(rng, 5, 3)
        winner, state = select_phragmen(PhragmenState(loads), VisibleProfile.observed(approvals), 3)
        ref_winner, ref_loads = brute_phragmen(loads, approvals, 3)
        assert winner == ref_winner
        np.testing.assert_allclose(state.loads, ref_loads, rtol=0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 2), min_size=1, max_size=7))
def test_phragmen_prefix_is_optimal(loads):
    loads = np.array(loads)
    approvers = list(range(len(loads)))
    assert phragmen_score(loads, approvers)[0] == pytest.approx(brute_phragmen_score(loads, approvers)[0], abs=1e-12)


def test_phragmen_does_not_mutate_input():
    start = PhragmenState.initial(3)
    select_phragmen(start, EXAMPLE, 2)
    np.testing.assert_array_equal(start.loads, 0.0)


# Consensus


def test_consensus_example():
    winner, state = select_consensus(ConsensusState.initial(3), EXAMPLE, 2)
    assert winner == 0
    np.testing.assert_allclose(state.weights, [0.5, 0.5, 2.0])


def test_consensus_empty_ballots():
    winner, state = select_consensus(ConsensusState.initial(3), EMPTY, 2)
    assert winner == 0
    np.testing.assert_allclose(state.weights, 2.0)


def test_consensus_nonpositive_weight_skips_penalty():
    # voter 0 sits at -0.5 and approves the winner; voter 1 carries it
    state = ConsensusState(np.array([-0.5, 1.0, 1.0]))
    winner, new = select_consensus(state, VisibleProfile.observed([{0}, {0}, {1}]), 2)
    assert winner == 0
    # only voter 1 is in the positive set: 1 + 1 - 3/1
    np.testing.assert_allclose(new.weights, [0.5, -1.0, 2.0])


def test_consensus_two_round_trace():
    state = ConsensusState.initial(2)
    winner, state = select_consensus(state, VisibleProfile.observed([{0}, {1}]), 2)
    assert winner == 0
    np.testing.assert_allclose(state.weights, [0.0, 2.0])
    # voter 0 now has weight 0: excluded from the positive set despite approving
    winner, state = select_consensus(state, VisibleProfile.observed([{0, 1}, {1}]), 2)
    assert winner == 1
    np.testing.assert_allclose(state.weights, [1.0, 1.0])


@settings(max_examples=200, deadline=None)
@given(profiles())
def test_consensus_total_weight_bookkeeping(case):
    # everyone gains 1; a non-empty positive set pays back exactly |N|
    approvals, m = case
    n = len(approvals)
    state = ConsensusState.initial(n)
    for _ in range(3):
        before = state.weights
        winner, state = select_consensus(state, VisibleProfile.observed(approvals), m)
        paid = any(winner in a and before[i] > 0 for i, a in enumerate(approvals))
        assert state.weights.sum() == pytest.approx(before.sum() + (0 if paid else n), abs=1e-9)


# Quota


def test_quota_example():
    winner, state = select_quota(QuotaState.initial(3), EXAMPLE, 2)
    assert winner == 0
    np.testing.assert_allclose(state.cumulative_quota, [2 / 3, 2 / 3, 1 / 3])
    np.testing.assert_array_equal(state.cumulative_satisfaction, [1, 1, 0])


def test_quota_empty_ballots():
    winner, state = select_quota(QuotaState.initial(3), EMPTY, 2)
    assert winner == 0
    np.testing.assert_array_equal(state.cumulative_quota, 0.0)


def test_quota_partial_denominator():
    profile = VisibleProfile(
        [{0}, {0}, {1}, set()],
        [Provenance.OBSERVED] * 3 + [Provenance.EMPTY_ABSENT],
    )
    presence = PresenceMask([True, True, True, False])
    _, state = select_quota(QuotaState.initial(4), profile, 2, presence, ParticipationMode.PARTIAL)
    np.testing.assert_allclose(state.cumulative_quota, [2 / 3, 2 / 3, 1 / 3, 0])


def test_quota_zero_present_gives_zero_support():
    profile = VisibleProfile([set(), set()], [Provenance.EMPTY_ABSENT] * 2)
    presence = PresenceMask([False, False])
    winner, state = select_quota(QuotaState.initial(2), profile, 2, presence, ParticipationMode.PARTIAL)
    assert winner == 0
    np.testing.assert_array_equal(state.cumulative_quota, 0.0)


def test_round_support_zero_denominator():
    np.testing.assert_array_equal(round_support(EXAMPLE, 2, 0), 0.0)


# properties shared by every rule


@pytest.mark.parametrize("rule", ["av", "phragmen", "consensus", "quota"])
@settings(max_examples=60, deadline=None)
@given(case=profiles())
def test_determinism(rule, case):
    approvals, m = case
    profile = VisibleProfile.observed(approvals)
    a = make_engine(rule, len(approvals))
    b = make_engine(rule, len(approvals))
    assert [a.step(profile, m) for _ in range(4)] == [b.step(profile, m) for _ in range(4)]


@pytest.mark.parametrize("rule", ["av", "phragmen", "consensus", "quota"])
@settings(max_examples=60, deadline=None)
@given(case=profiles(), data=st.data())
def test_anonymity(rule, case, data):
    approvals, m = case
    perm = data.draw(st.permutations(range(len(approvals))))
    shuffled = [approvals[i] for i in perm]
    a, b = make_engine(rule, len(approvals)), make_engine(rule, len(approvals))
    for _ in range(3):
        assert a.step(VisibleProfile.observed(approvals), m) == b.step(VisibleProfile.observed(shuffled), m)


@pytest.mark.parametrize("rule", ["av", "phragmen", "consensus", "quota"])
@settings(max_examples=60, deadline=None)
@given(ballot=st.frozensets(st.integers(0, 3), min_size=1))
def test_single_voter_gets_an_approved_winner(rule, ballot):
    engine = make_engine(rule, 1)
    for _ in range(3):
        assert engine.step(VisibleProfile.observed([ballot]), 4) in ballot


def test_unknown_rule():
    with pytest.raises(ValueError):
        make_engine("borda", 3)
