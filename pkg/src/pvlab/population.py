"""Synthetic electorates under a linear random utility model.

Voters belong to a majority or a minority group. Each group has a centroid on
the probability simplex; a voter's preference weights blend the centroid with
an independent offset drawn from the same Dirichlet distribution.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import PresenceMask


class ConfigError(ValueError):
    """Raised for invalid simulation or population settings."""


class ThresholdMode(str, enum.Enum):
    """How a voter turns utilities into an approval set.

    ``absolute``: utility above the threshold.
    ``relative``: utility within the threshold of the round's best utility.
    ``mean``: utility above the round's mean utility by more than the threshold.
    """

    ABSOLUTE = "absolute"
    RELATIVE = "relative"
    MEAN = "mean"


@dataclass(frozen=True)
class VoterModel:
    weights: np.ndarray
    threshold: float
    noise_scale: float
    group: str  # "majority" or "minority"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("voter weights must lie on the simplex")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class PopulationConfig:
    n_voters: int = 20
    minority_fraction: float = 0.3
    cluster_density: float = 0.5
    dirichlet_alpha: float = 0.2
    d: int = 5
    tau: float = 0.05
    beta: float = 0.01
    n_alternatives: int = 5
    absenteeism: float = 0.5
    threshold_mode: ThresholdMode = ThresholdMode.MEAN

    def __post_init__(self):
        object.__setattr__(self, "threshold_mode", ThresholdMode(self.threshold_mode))
        self.validate()

    def validate(self) -> None:
        if self.n_voters < 1:
            raise ConfigError("n_voters must be >= 1")
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.n_alternatives < 1:
            raise ConfigError("n_alternatives must be >= 1")
        if not 0.0 <= self.minority_fraction <= 0.5:
            raise ConfigError("minority_fraction must lie in [0, 0.5]")
        for name in ("cluster_density", "absenteeism"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.dirichlet_alpha <= 0:
            raise ConfigError("dirichlet_alpha must be > 0")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")

    @property
    def n_minority(self) -> int:
        # round half up, so 0.5 * 7 -> 4 rather than banker's rounding
        return int(math.floor(self.minority_fraction * self.n_voters + 0.5))


def _dirichlet(rng: np.random.Generator, alpha: float, d: int, size=None) -> np.ndarray:
    sample = rng.dirichlet(np.full(d, alpha), size=size)
    # small alpha can underflow every gamma draw; numpy then returns nan
    sample = np.nan_to_num(sample, nan=0.0)
    if sample.ndim == 1:
        if sample.sum() == 0:
            sample[rng.integers(d)] = 1.0
        return sample / sample.sum()
    empty = sample.sum(axis=1) == 0
    for i in np.flatnonzero(empty):
        sample[i, rng.integers(d)] = 1.0
    return sample / sample.sum(axis=1, keepdims=True)


def sample_population(config: PopulationConfig, rng: np.random.Generator) -> list[VoterModel]:
    """Draw the electorate: majority voters first, then the minority."""
    n_min = config.n_minority
    n_maj = config.n_voters - n_min
    p = config.cluster_density
    voters = []
    for group, size in (("majority", n_maj), ("minority", n_min)):
        centroid = _dirichlet(rng, config.dirichlet_alpha, config.d)
        if size == 0:
            continue
        offsets = _dirichlet(rng, config.dirichlet_alpha, config.d, size=size)
        for offset in offsets:
            w = p * centroid + (1.0 - p) * offset
            w = np.clip(w, 0.0, None)
            voters.append(VoterModel(w / w.sum(), config.tau, config.beta, group))
    return voters


def sample_election(config: PopulationConfig, rng: np.random.Generator, round_index: int) -> np.ndarray:
    """Feature matrix for one round, i.i.d. uniform on [0, 1]."""
    return rng.random((config.n_alternatives, config.d))


def ballot(
    voter: VoterModel,
    features: np.ndarray,
    rng: np.random.Generator,
    threshold_mode: ThresholdMode | str = ThresholdMode.MEAN,
) -> frozenset[int]:
    """Noisy approval ballot of ``voter`` over the rows of ``features``.

    Utilities are ``features @ weights`` plus independent Gaussian noise of
    standard deviation ``voter.noise_scale`` per alternative, then thresholded
    at ``voter.threshold`` according to ``threshold_mode`` (see
    :class:`ThresholdMode`).
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] != voter.weights.shape[0]:
        raise ValueError(
            f"feature dimension {features.shape} does not match weights {voter.weights.shape}"
        )
    # always draw, so the stream position does not depend on beta
    noise = rng.standard_normal(features.shape[0]) * voter.noise_scale
    utility = features @ voter.weights + noise
    return approve_from_utilities(utility, voter.threshold, threshold_mode)


def approve_from_utilities(
    utility: np.ndarray, threshold: float, threshold_mode: ThresholdMode | str
) -> frozenset[int]:
    mode = ThresholdMode(threshold_mode)
    if mode is ThresholdMode.ABSOLUTE:
        chosen = np.flatnonzero(utility > threshold)
    elif mode is ThresholdMode.RELATIVE:
        chosen = np.flatnonzero(utility >= utility.max() - threshold)
    else:
        chosen = np.flatnonzero(utility - utility.mean() > threshold)
    return frozenset(int(j) for j in chosen)


def sample_presence(config: PopulationConfig, rng: np.random.Generator, n_voters: int) -> PresenceMask:
    return PresenceMask(rng.random(n_voters) >= config.absenteeism)
