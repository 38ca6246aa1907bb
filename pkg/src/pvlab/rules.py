"""Perpetual voting rules.

Each rule is a pure ``select_*`` function taking the previous state and the
round's visible profile and returning ``(winner, new_state)``. Rule engines
(:class:`RuleEngine` subclasses) wrap these for the simulation loop.

Ties are broken towards the lowest alternative index everywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import PresenceMask, VisibleProfile

RULE_IDS = ("av", "phragmen", "consensus", "quota")


class ParticipationMode(str, enum.Enum):
    FULL = "full"
    PARTIAL = "partial"
    DELEGATED = "delegated"


def _check_alternatives(n_alternatives: int) -> None:
    if n_alternatives < 1:
        raise ValueError("an election needs at least one alternative")


def _argmax_lowest(scores) -> int:
    # np.argmax already returns the first maximum
    return int(np.argmax(np.asarray(scores)))


def select_av(profile: VisibleProfile, n_alternatives: int) -> int:
    """Alternative with the most approvals."""
    _check_alternatives(n_alternatives)
    return _argmax_lowest(profile.counts(n_alternatives))


# --------------------------------------------------------------------------
# Perpetual Phragmén


@dataclass(frozen=True)
class PhragmenState:
    loads: np.ndarray

    @classmethod
    def initial(cls, n_voters: int) -> PhragmenState:
        return cls(np.zeros(n_voters))


def phragmen_score(loads, approvers) -> tuple[float, frozenset[int]]:
    """Minimal ``(sum of loads + 1) / |S|`` over non-empty subsets S of ``approvers``.

    The optimum is always a prefix of the approvers sorted by increasing load:
    adding the next-lowest load lowers the average exactly when that load is
    below the current score. Returns ``(math.inf, frozenset())`` if there are no
    approvers.
    """
    approvers = sorted(approvers, key=lambda n: (loads[n], n))
    if not approvers:
        return math.inf, frozenset()
    best, best_k = math.inf, 0
    total = 1.0
    for k, n in enumerate(approvers, start=1):
        total += loads[n]
        score = total / k
        if score < best:
            best, best_k = score, k
    return best, frozenset(approvers[:best_k])


def select_phragmen(
    state: PhragmenState, profile: VisibleProfile, n_alternatives: int
) -> tuple[int, PhragmenState]:
    _check_alternatives(n_alternatives)
    approvers = [[] for _ in range(n_alternatives)]
    for n, a in enumerate(profile.approvals):
        for j in a:
            approvers[j].append(n)
    best_j, best_score, best_set = 0, math.inf, frozenset()
    for j in range(n_alternatives):
        score, chosen = phragmen_score(state.loads, approvers[j])
        if score < best_score:
            best_j, best_score, best_set = j, score, chosen
    if not best_set:
        return best_j, state
    loads = state.loads.copy()
    loads[list(best_set)] = best_score
    return best_j, PhragmenState(loads)


# --------------------------------------------------------------------------
# Perpetual Consensus


@dataclass(frozen=True)
class ConsensusState:
    weights: np.ndarray

    @classmethod
    def initial(cls, n_voters: int) -> ConsensusState:
        return cls(np.ones(n_voters))


def select_consensus(
    state: ConsensusState, profile: VisibleProfile, n_alternatives: int
) -> tuple[int, ConsensusState]:
    """Maximise the total positive weight of approvers, then rebalance weights.

    Every voter gains 1. Positive-weight approvers of the winner additionally
    share a penalty of ``|N|`` (the whole electorate, whatever the turnout).
    """
    _check_alternatives(n_alternatives)
    weights = state.weights
    n_voters = len(weights)
    sums = np.zeros(n_alternatives)
    for n, a in enumerate(profile.approvals):
        if weights[n] > 0:
            for j in a:
                sums[j] += weights[n]
    winner = _argmax_lowest(sums)
    positive = [n for n, a in enumerate(profile.approvals) if winner in a and weights[n] > 0]
    new = weights + 1.0
    if positive:
        new[positive] -= n_voters / len(positive)
    return winner, ConsensusState(new)


# --------------------------------------------------------------------------
# Perpetual Quota


@dataclass(frozen=True)
class QuotaState:
    cumulative_quota: np.ndarray
    cumulative_satisfaction: np.ndarray

    @classmethod
    def initial(cls, n_voters: int) -> QuotaState:
        return cls(np.zeros(n_voters), np.zeros(n_voters, dtype=int))


def round_support(profile: VisibleProfile, n_alternatives: int, denominator: int) -> np.ndarray:
    """Per-voter support: largest approval count among the voter's approved
    alternatives, divided by ``denominator``. Zero for empty ballots, and for
    everyone when ``denominator`` is 0.
    """
    support = np.zeros(profile.n_voters)
    if denominator <= 0:
        return support
    counts = profile.counts(n_alternatives)
    for n, a in enumerate(profile.approvals):
        if a:
            support[n] = max(counts[j] for j in a) / denominator
    return support


def quota_denominator(
    profile: VisibleProfile, presence: PresenceMask | None, mode: ParticipationMode | str
) -> int:
    """Support denominator: present voters in partial mode, ``|N|`` otherwise.

    Delegated absentees cast real (predicted) ballots, so in delegated mode
    nobody's ballot is artificially empty and no correction applies.
    """
    if ParticipationMode(mode) is ParticipationMode.PARTIAL and presence is not None:
        return presence.n_present
    return profile.n_voters


def select_quota(
    state: QuotaState,
    profile: VisibleProfile,
    n_alternatives: int,
    presence: PresenceMask | None = None,
    mode: ParticipationMode | str = ParticipationMode.FULL,
) -> tuple[int, QuotaState]:
    """Pick the alternative whose approvers have the largest total quota deficit.

    The round's support is added to the cumulative quota before selection. If
    every deficit is zero the rule falls back to approval counts.
    """
    _check_alternatives(n_alternatives)
    denominator = quota_denominator(profile, presence, mode)
    quota = state.cumulative_quota + round_support(profile, n_alternatives, denominator)
    deficit = np.maximum(0.0, quota - state.cumulative_satisfaction)
    scores = np.zeros(n_alternatives)
    for n, a in enumerate(profile.approvals):
        for j in a:
            scores[j] += deficit[n]
    if scores.max() > 0:
        winner = _argmax_lowest(scores)
    else:
        winner = _argmax_lowest(profile.counts(n_alternatives))
    sat = state.cumulative_satisfaction.copy()
    for n, a in enumerate(profile.approvals):
        if winner in a:
            sat[n] += 1
    return winner, QuotaState(quota, sat)


# --------------------------------------------------------------------------
# engines


class RuleEngine:
    """Stateful wrapper around a ``select_*`` function."""

    rule_id: str

    def __init__(self, n_voters: int, mode: ParticipationMode | str = ParticipationMode.FULL):
        self.n_voters = n_voters
        self.mode = ParticipationMode(mode)
        self.state = self.initial_state(n_voters)

    def initial_state(self, n_voters: int):
        return None

    def step(self, profile: VisibleProfile, n_alternatives: int, presence: PresenceMask | None = None) -> int:
        raise NotImplementedError


class ApprovalVoting(RuleEngine):
    rule_id = "av"

    def step(self, profile, n_alternatives, presence=None):
        return select_av(profile, n_alternatives)


class PerpetualPhragmen(RuleEngine):
    rule_id = "phragmen"

    def initial_state(self, n_voters):
        return PhragmenState.initial(n_voters)

    def step(self, profile, n_alternatives, presence=None):
        winner, self.state = select_phragmen(self.state, profile, n_alternatives)
        return winner


class PerpetualConsensus(RuleEngine):
    rule_id = "consensus"

    def initial_state(self, n_voters):
        return ConsensusState.initial(n_voters)

    def step(self, profile, n_alternatives, presence=None):
        winner, self.state = select_consensus(self.state, profile, n_alternatives)
        return winner


class PerpetualQuota(RuleEngine):
    rule_id = "quota"

    def initial_state(self, n_voters):
        return QuotaState.initial(n_voters)

    def step(self, profile, n_alternatives, presence=None):
        winner, self.state = select_quota(self.state, profile, n_alternatives, presence, self.mode)
        return winner


ENGINES = {cls.rule_id: cls for cls in (ApprovalVoting, PerpetualPhragmen, PerpetualConsensus, PerpetualQuota)}


def make_engine(rule_id: str, n_voters: int, mode: ParticipationMode | str = ParticipationMode.FULL) -> RuleEngine:
    try:
        cls = ENGINES[rule_id]
    except KeyError:
        raise ValueError(f"unknown rule {rule_id!r}; expected one of {', '.join(RULE_IDS)}") from None
    return cls(n_voters, mode)
