"""Fairness and alignment metrics over a completed voting record.

Every metric is evaluated against the TRUE approval sets with the whole
electorate as denominator, whatever ballots the rule saw. That is what lets
partial and delegated runs be compared with full turnout.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import VotingRecord

METRIC_COLUMNS = (
    "longest_dry_spell_max",
    "longest_dry_spell_mean",
    "gini_influence",
    "lqc",
    "uqc",
    "qc",
    "lqnc",
    "uqnc",
    "overlap",
)


def support(approvals, voter: int, denominator: int) -> float:
    """Largest share of voters approving some alternative that ``voter`` approves."""
    if not 0 <= voter < len(approvals):
        raise IndexError(f"voter {voter} outside 0..{len(approvals) - 1}")
    if denominator <= 0:
        warnings.warn("support denominator is 0; defining support as 0", RuntimeWarning, stacklevel=2)
        return 0.0
    mine = approvals[voter]
    if not mine:
        return 0.0
    return max(sum(1 for a in approvals if j in a) for j in mine) / denominator


def _support_counts(record: VotingRecord) -> np.ndarray:
    """``(T, |N|)`` integer numerators of each voter's per-round support."""
    out = np.zeros((len(record), record.n_voters), dtype=np.int64)
    for t, r in enumerate(record.rounds):
        approvals = r.election.true_approvals
        counts = np.zeros(r.election.n_alternatives, dtype=np.int64)
        for a in approvals:
            for j in a:
                counts[j] += 1
        for n, a in enumerate(approvals):
            if a:
                out[t, n] = max(counts[j] for j in a)
    return out


def dry_spells(satisfied: np.ndarray) -> int:
    """Longest dry spell of one voter's satisfaction sequence.

    Rounds 0 and T+1 count as satisfied, so the result is the longest run of
    unsatisfied rounds plus one (1 for an always-satisfied voter, T+1 for a
    never-satisfied one).
    """
    longest = run = 0
    for s in satisfied:
        run = 0 if s else run + 1
        longest = max(longest, run)
    return longest + 1


def longest_dry_spell(record: VotingRecord, voter: int) -> int:
    if not len(record):
        raise ValueError("record is empty")
    return dry_spells(record.satisfaction_matrix()[:, voter])


def influence(record: VotingRecord) -> np.ndarray:
    """Per-voter influence: each round's winner credits its approvers 1/|approvers|."""
    infl = np.zeros(record.n_voters)
    for r in record.rounds:
        approvers = [n for n, a in enumerate(r.election.true_approvals) if r.winner in a]
        if approvers:
            infl[approvers] += 1.0 / len(approvers)
    return infl


def gini(values) -> float:
    values = np.asarray(values, dtype=float)
    n = len(values)
    mean = values.mean()
    if mean == 0:
        return 0.0
    return float(np.abs(values[:, None] - values[None, :]).sum() / (2.0 * mean * n * n))


def gini_influence(record: VotingRecord) -> float:
    if not len(record):
        raise ValueError("record is empty")
    return gini(influence(record))


def quota_compliance(record: VotingRecord) -> tuple[float, float, float, float, float]:
    """Return ``(lqc, uqc, qc, lqnc, uqnc)``.

    Quotas are rationals ``k / |N|``, so floor and ceiling are taken on the
    integer numerators to avoid rounding artefacts at whole numbers.
    """
    if not len(record):
        raise ValueError("record is empty")
    n_voters, T = record.n_voters, len(record)
    sat = np.cumsum(record.satisfaction_matrix(), axis=0)
    numerators = np.cumsum(_support_counts(record), axis=0)
    lower = numerators // n_voters
    upper = -(-numerators // n_voters)
    lqc = float(np.count_nonzero(sat >= lower)) / (n_voters * T)
    uqc = float(np.count_nonzero(sat <= upper)) / (n_voters * T)
    lqnc, uqnc = 1.0 - lqc, 1.0 - uqc
    return lqc, uqc, 1.0 - lqnc - uqnc, lqnc, uqnc


def overlap(winners_delegate, winners_full, winners_partial) -> float:
    """Share of rounds where the delegated winner equals the full or the partial winner."""
    k = len(winners_delegate)
    if k == 0 or len(winners_full) != k or len(winners_partial) != k:
        raise ValueError("winner sequences must be non-empty and of equal length")
    hits = sum(1 for d, f, p in zip(winners_delegate, winners_full, winners_partial) if d == f or d == p)
    return hits / k


@dataclass(frozen=True)
class FairnessReport:
    longest_dry_spell: np.ndarray
    longest_dry_spell_max: int
    longest_dry_spell_mean: float
    gini_influence: float
    lqc: float
    uqc: float
    qc: float
    lqnc: float
    uqnc: float
    per_voter_influence: np.ndarray
    mean_influence: float


def fairness_report(record: VotingRecord) -> FairnessReport:
    if not len(record):
        raise ValueError("record is empty")
    sat = record.satisfaction_matrix()
    spells = np.array([dry_spells(sat[:, n]) for n in range(record.n_voters)])
    infl = influence(record)
    lqc, uqc, qc, lqnc, uqnc = quota_compliance(record)
    return FairnessReport(
        longest_dry_spell=spells,
        longest_dry_spell_max=int(spells.max()),
        longest_dry_spell_mean=float(spells.mean()),
        gini_influence=gini(infl),
        lqc=lqc,
        uqc=uqc,
        qc=qc,
        lqnc=lqnc,
        uqnc=uqnc,
        per_voter_influence=infl,
        mean_influence=float(infl.mean()),
    )
