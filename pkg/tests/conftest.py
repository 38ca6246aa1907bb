from __future__ import annotations

import numpy as np
import pytest

from pvlab.core import Election, PresenceMask, VisibleProfile, VotingRecord

# filled by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def make_record(approvals_per_round, winners, n_alternatives=None) -> VotingRecord:
    """Full-turnout record from per-round approval lists and winners (0-based)."""
    n_voters = len(approvals_per_round[0])
    record = VotingRecord(n_voters)
    for t, (approvals, winner) in enumerate(zip(approvals_per_round, winners), start=1):
        m = n_alternatives or max([winner, *(j for a in approvals for j in a)]) + 1
        election = Election(t, np.zeros((m, 1)), approvals)
        record.append(election, PresenceMask.everyone(n_voters), VisibleProfile.observed(approvals), winner)
    return record


def random_record(rng: np.random.Generator, n_voters: int, rounds: int, m: int, p: float = 0.4) -> VotingRecord:
    approvals = [
        [frozenset(int(j) for j in np.flatnonzero(rng.random(m) < p)) for _ in range(n_voters)]
        for _ in range(rounds)
    ]
    winners = [int(rng.integers(m)) for _ in range(rounds)]
    return make_record(approvals, winners, m)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
