"""Domain types for perpetual approval voting.

Voters and alternatives are indexed from 0 internally. Rounds carry a
1-based ``round_index`` so that ``record[t]`` style lookups in the public API
(:func:`is_satisfied`) follow the usual t = 1..T convention.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ApprovalSet = frozenset


class Provenance(str, enum.Enum):
    """Where a voter's visible ballot came from in a given round."""

    OBSERVED = "observed"
    EMPTY_ABSENT = "empty-absent"
    DELEGATE = "delegate-predicted"


def _freeze(approvals: Iterable[Iterable[int]]) -> tuple[frozenset[int], ...]:
    return tuple(frozenset(int(j) for j in a) for a in approvals)


@dataclass(frozen=True)
class Election:
    """One round: alternative features plus the true approval profile.

    Parameters
    ----------
    round_index : int
        1-based position of the round in the sequence.
    features : numpy.ndarray
        ``(m, d)`` matrix with entries in [0, 1]; row ``j`` describes alternative ``j``.
    true_approvals : tuple of frozenset of int
        One approval set per voter, each a subset of ``range(m)``.
    """

    round_index: int
    features: np.ndarray
    true_approvals: tuple[frozenset[int], ...]

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        if features.ndim != 2 or features.shape[0] < 1:
            raise ValueError("features must be a non-empty (m, d) matrix")
        if np.any(features < 0.0) or np.any(features > 1.0):
            raise ValueError("feature entries must lie in [0, 1]")
        if self.round_index < 1:
            raise ValueError("round_index must be >= 1")
        features.setflags(write=False)
        object.__setattr__(self, "features", features)
        approvals = _freeze(self.true_approvals)
        m = features.shape[0]
        for a in approvals:
            if any(j < 0 or j >= m for j in a):
                raise ValueError(f"approval set {sorted(a)} outside range(0, {m})")
        object.__setattr__(self, "true_approvals", approvals)

    @property
    def n_alternatives(self) -> int:
        return self.features.shape[0]

    @property
    def n_voters(self) -> int:
        return len(self.true_approvals)


@dataclass(frozen=True)
class PresenceMask:
    present: np.ndarray

    def __post_init__(self):
        present = np.asarray(self.present, dtype=bool).copy()
        if present.ndim != 1:
            raise ValueError("presence mask must be a vector")
        present.setflags(write=False)
        object.__setattr__(self, "present", present)

    @classmethod
    def everyone(cls, n_voters: int) -> PresenceMask:
        return cls(np.ones(n_voters, dtype=bool))

    def __len__(self) -> int:
        return len(self.present)

    @property
    def n_present(self) -> int:
        return int(self.present.sum())


@dataclass(frozen=True)
class VisibleProfile:
    """The ballots a voting rule actually sees in a round."""

    approvals: tuple[frozenset[int], ...]
    provenance: tuple[Provenance, ...]

    def __post_init__(self):
        approvals = _freeze(self.approvals)
        provenance = tuple(Provenance(p) for p in self.provenance)
        if len(approvals) != len(provenance):
            raise ValueError("approvals and provenance must have equal length")
        for a, p in zip(approvals, provenance):
            if p is Provenance.EMPTY_ABSENT and a:
                raise ValueError("an empty-absent voter must have an empty approval set")
        object.__setattr__(self, "approvals", approvals)
        object.__setattr__(self, "provenance", provenance)

    @classmethod
    def observed(cls, approvals: Sequence[Iterable[int]]) -> VisibleProfile:
        return cls(approvals, (Provenance.OBSERVED,) * len(approvals))

    @property
    def n_voters(self) -> int:
        return len(self.approvals)

    def approvers(self, alternative: int) -> list[int]:
        return [n for n, a in enumerate(self.approvals) if alternative in a]

    def counts(self, n_alternatives: int) -> np.ndarray:
        counts = np.zeros(n_alternatives, dtype=int)
        for a in self.approvals:
            for j in a:
                counts[j] += 1
        return counts


@dataclass(frozen=True)
class Round:
    election: Election
    presence: PresenceMask
    visible: VisibleProfile
    winner: int


@dataclass
class VotingRecord:
    """Append-only history of rounds for one electorate."""

    n_voters: int
    rounds: list[Round] = field(default_factory=list)

    def append(
        self,
        election: Election,
        presence: PresenceMask,
        visible: VisibleProfile,
        winner: int,
    ) -> None:
        if election.round_index != len(self.rounds) + 1:
            raise ValueError(
                f"expected round {len(self.rounds) + 1}, got {election.round_index}"
            )
        if election.n_voters != self.n_voters or len(presence) != self.n_voters:
            raise ValueError("voter count does not match the record")
        if visible.n_voters != self.n_voters:
            raise ValueError("visible profile voter count does not match the record")
        if not 0 <= winner < election.n_alternatives:
            raise ValueError(f"winner {winner} is not an alternative of round {election.round_index}")
        for n, (shown, prov) in enumerate(zip(visible.approvals, visible.provenance)):
            if prov is Provenance.OBSERVED and shown != election.true_approvals[n]:
                raise ValueError(f"voter {n} tagged observed but ballot differs from truth")
        self.rounds.append(Round(election, presence, visible, int(winner)))

    def __len__(self) -> int:
        return len(self.rounds)

    @property
    def winners(self) -> list[int]:
        return [r.winner for r in self.rounds]

    def satisfaction_matrix(self) -> np.ndarray:
        """Boolean ``(T, |N|)`` matrix of ground-truth satisfaction."""
        sat = np.zeros((len(self.rounds), self.n_voters), dtype=bool)
        for t, r in enumerate(self.rounds):
            for n, a in enumerate(r.election.true_approvals):
                sat[t, n] = r.winner in a
        return sat


def is_satisfied(record: VotingRecord, voter: int, t: int) -> bool:
    """Whether ``voter`` truly approves the winner of round ``t`` (1-based)."""
    if not 1 <= t <= len(record):
        raise IndexError(f"round {t} outside 1..{len(record)}")
    if not 0 <= voter < record.n_voters:
        raise IndexError(f"voter {voter} outside 0..{record.n_voters - 1}")
    r = record.rounds[t - 1]
    return r.winner in r.election.true_approvals[voter]
