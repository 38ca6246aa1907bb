import numpy as np
import pytest

from pvlab.population import (
    ConfigError,
    PopulationConfig,
    ThresholdMode,
    VoterModel,
    approve_from_utilities,
    ballot,
    sample_election,
    sample_population,
    sample_presence,
)


def _within_group_spread(config, seeds):
    spread = []
    for seed in seeds:
        voters = sample_population(config, np.random.default_rng(seed))
        for group in ("majority", "minority"):
            w = np.array([v.weights for v in voters if v.group == group])
            if len(w) > 1:
                spread.append(np.linalg.norm(w - w.mean(axis=0), axis=1).mean())
    return float(np.mean(spread))


def test_full_density_puts_everyone_on_the_centroid(rng):
    voters = sample_population(PopulationConfig(cluster_density=1.0), rng)
    for group in ("majority", "minority"):
        w = np.array([v.weights for v in voters if v.group == group])
        np.testing.assert_allclose(w, np.broadcast_to(w[0], w.shape), atol=1e-12)


def test_zero_density_ignores_centroid():
    # same stream, two different densities: only the offsets survive at p=0
    a = sample_population(PopulationConfig(cluster_density=0.0), np.random.default_rng(3))
    rng = np.random.default_rng(3)
    rng.dirichlet(np.full(5, 0.2))  # majority centroid
    offsets = rng.dirichlet(np.full(5, 0.2), size=14)
    np.testing.assert_allclose([v.weights for v in a[:14]], offsets, atol=1e-12)


def test_weights_on_simplex_and_density_tightens_groups():
    for seed in range(20):
        for v in sample_population(PopulationConfig(cluster_density=0.5), np.random.default_rng(seed)):
            assert np.all(v.weights >= 0)
            assert abs(v.weights.sum() - 1.0) <= 1e-9
    loose = _within_group_spread(PopulationConfig(cluster_density=0.2), range(100))
    tight = _within_group_spread(PopulationConfig(cluster_density=0.8), range(100))
    assert tight < loose


def test_group_sizes(rng):
    voters = sample_population(PopulationConfig(n_voters=20, minority_fraction=0.3), rng)
    assert [v.group for v in voters] == ["majority"] * 14 + ["minority"] * 6
    assert PopulationConfig(n_voters=7, minority_fraction=0.5).n_minority == 4


@pytest.mark.parametrize(
    "kwargs",
    [
        {"cluster_density": 1.5},
        {"absenteeism": -0.1},
        {"minority_fraction": 0.7},
        {"n_voters": 0},
        {"dirichlet_alpha": 0.0},
        {"beta": -1.0},
        {"threshold_mode": "median"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises((ConfigError, ValueError)):
        PopulationConfig(**kwargs)


def test_election_features(rng):
    config = PopulationConfig()
    first = sample_election(config, rng, 1)
    second = sample_election(config, rng, 2)
    assert first.shape == (5, 5)
    assert np.all((first >= 0) & (first <= 1))
    assert not np.array_equal(first, second)
    big = np.concatenate([sample_election(config, rng, t) for t in range(4000)])
    assert 0.495 <= big.mean() <= 0.505


def test_noiseless_absolute_zero_threshold_approves_all(rng):
    voter = VoterModel(np.array([0.2, 0.8]), 0.0, 0.0, "majority")
    assert ballot(voter, rng.uniform(0.01, 1, (4, 2)), rng, ThresholdMode.ABSOLUTE) == {0, 1, 2, 3}


def test_noiseless_relative_zero_margin_is_argmax(rng):
    voter = VoterModel(np.array([0.5, 0.5]), 0.0, 0.0, "majority")
    features = np.array([[0.1, 0.2], [0.9, 0.3], [0.3, 0.9], [0.0, 0.0]])
    assert ballot(voter, features, rng, ThresholdMode.RELATIVE) == {1, 2}


def test_mean_mode():
    assert approve_from_utilities(np.array([0.1, 0.5, 0.9]), 0.1, "mean") == {2}


def test_ballot_dimension_mismatch(rng):
    voter = VoterModel(np.array([0.5, 0.5]), 0.0, 0.0, "majority")
    with pytest.raises(ValueError):
        ballot(voter, np.zeros((3, 4)), rng)


def test_default_calibration():
    config = PopulationConfig()
    rng = np.random.default_rng(0)
    sizes = []
    while len(sizes) < 10_000:
        for voter in sample_population(config, rng):
            sizes.append(len(ballot(voter, sample_election(config, rng, 1), rng, config.threshold_mode)))
    assert 1.5 <= np.mean(sizes[:10_000]) <= 2.5


def test_presence_extremes(rng):
    assert sample_presence(PopulationConfig(absenteeism=0.0), rng, 20).n_present == 20
    assert sample_presence(PopulationConfig(absenteeism=1.0), rng, 20).n_present == 0


def test_presence_rate(rng):
    config = PopulationConfig(absenteeism=0.5)
    present = sum(sample_presence(config, rng, 20).n_present for _ in range(10_000))
    assert 0.49 <= present / 200_000 <= 0.51
