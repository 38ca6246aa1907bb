"""Monte-Carlo experiments over rules, participation modes and parameter sweeps.

Within one simulation every rule and every participation mode sees the same
electorate, elections, true ballots and presence masks (a paired design).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .core import Election, PresenceMask, Provenance, VisibleProfile, VotingRecord
from .delegates import LearnedPreference, LearnerConfig, TrainingSet, fit, predict
from .metrics import METRIC_COLUMNS, fairness_report, overlap
from .population import (
    ConfigError,
    PopulationConfig,
    ThresholdMode,
    ballot,
    sample_election,
    sample_population,
    sample_presence,
)
from .rules import RULE_IDS, ParticipationMode, make_engine
from .streams import derive_seed, stream

log = logging.getLogger(__name__)

MODES = tuple(m.value for m in ParticipationMode)
SWEEP_PARAMS = (
    "n_alternatives",
    "n_voters",
    "absenteeism",
    "cluster_density",
    "minority_fraction",
    "beta",
    "rounds",
)

# sub-stream keys within one simulation
_POPULATION, _ELECTIONS, _BALLOTS, _PRESENCE = range(4)


@dataclass(frozen=True)
class ExperimentConfig:
    population: PopulationConfig = field(default_factory=PopulationConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    rounds: int = 50
    n_sims: int = 100
    rules: tuple[str, ...] = RULE_IDS
    modes: tuple[str, ...] = MODES
    master_seed: int = 42
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "modes", tuple(ParticipationMode(m).value for m in self.modes))
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        self.validate()

    def validate(self) -> None:
        self.population.validate()
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.n_sims < 0:
            raise ConfigError("n_sims must be >= 0")
        for r in self.rules:
            if r not in RULE_IDS:
                raise ConfigError(f"unknown rule {r!r}; expected one of {', '.join(RULE_IDS)}")
        if self.sweep_param is not None and self.sweep_param not in SWEEP_PARAMS:
            raise ConfigError(
                f"unknown sweep parameter {self.sweep_param!r}; expected one of {', '.join(SWEEP_PARAMS)}"
            )

    def with_value(self, name: str, value) -> ExperimentConfig:
        """Copy with one sweepable parameter replaced."""
        if name == "rounds":
            return dataclasses.replace(self, rounds=int(value))
        if name in ("n_voters", "n_alternatives"):
            value = int(value)
        try:
            population = dataclasses.replace(self.population, **{name: value})
        except TypeError:
            raise ConfigError(f"unknown parameter {name!r}") from None
        return dataclasses.replace(self, population=population)


@dataclass(frozen=True)
class RunRecord:
    sim_index: int
    rule: str
    mode: str
    sweep_param: str | None
    sweep_value: float | None
    longest_dry_spell_max: int
    longest_dry_spell_mean: float
    gini_influence: float
    lqc: float
    uqc: float
    qc: float
    lqnc: float
    uqnc: float
    overlap: float | None
    mean_approval_size: float
    seed: int

    def as_row(self) -> dict[str, Any]:
        return {k: _render(v) for k, v in dataclasses.asdict(self).items()}


RECORD_COLUMNS = tuple(f.name for f in dataclasses.fields(RunRecord))


def _render(value):
    if isinstance(value, float):
        return float(f"{value:.9g}")
    return value


@dataclass
class SimulationData:
    """Everything a simulation samples, shared by all rules and modes."""

    elections: list[Election]
    presence: list[PresenceMask]
    profiles: dict[str, list[VisibleProfile]]
    seed: int

    @property
    def mean_approval_size(self) -> float:
        sizes = [len(a) for e in self.elections for a in e.true_approvals]
        return float(np.mean(sizes)) if sizes else 0.0


class DelegatePool:
    """One delegate per voter, trained on the rounds that voter attended."""

    def __init__(self, n_voters: int, d: int, learner: LearnerConfig, population: PopulationConfig):
        self.learner = learner
        self.population = population
        self.data = [TrainingSet(d) for _ in range(n_voters)]
        self.models: list[LearnedPreference | None] = [None] * n_voters
        # training-set size each model was fit on, to skip refits on unchanged data
        self._fitted_on = [-1] * n_voters
        self.n_fits = 0

    def observe(self, voter: int, features: np.ndarray, approvals: frozenset[int]) -> None:
        self.data[voter].add_round(features, approvals)

    def model(self, voter: int) -> LearnedPreference:
        size = self.data[voter].n_rounds
        current = self.models[voter]
        stale = size != self._fitted_on[voter]
        if not self.learner.refit_every_absence and current is not None and not current.fallback:
            stale = False
        if current is None or stale:
            current = fit(self.data[voter], self.learner)
            self.models[voter] = current
            self._fitted_on[voter] = size
            self.n_fits += 1
        return current

    def vote(self, voter: int, features: np.ndarray) -> frozenset[int]:
        return predict(
            self.model(voter),
            features,
            self.population.threshold_mode,
            margin=self.population.tau,
        )


def simulation_seed(config: ExperimentConfig, sim_index: int, point_index: int | None = None) -> int:
    if point_index is None:
        return derive_seed(config.master_seed, sim_index)
    return derive_seed(config.master_seed, point_index, sim_index)


def sample_simulation(config: ExperimentConfig, seed: int) -> SimulationData:
    """Sample the electorate, elections, ballots, presence and delegate ballots."""
    pop_cfg = config.population
    voters = sample_population(pop_cfg, stream(seed, _POPULATION))
    n_voters = len(voters)
    rng_elections = stream(seed, _ELECTIONS)
    rng_ballots = stream(seed, _BALLOTS)
    rng_presence = stream(seed, _PRESENCE)
    pool = DelegatePool(n_voters, pop_cfg.d, config.learner, pop_cfg)

    elections, masks = [], []
    profiles: dict[str, list[VisibleProfile]] = {m: [] for m in MODES}
    for t in range(1, config.rounds + 1):
        features = sample_election(pop_cfg, rng_elections, t)
        truth = [ballot(v, features, rng_ballots, pop_cfg.threshold_mode) for v in voters]
        election = Election(t, features, truth)
        mask = sample_presence(pop_cfg, rng_presence, n_voters)
        present = mask.present

        partial, delegated = [], []
        partial_tags, delegated_tags = [], []
        for n in range(n_voters):
            if present[n]:
                partial.append(truth[n])
                delegated.append(truth[n])
                partial_tags.append(Provenance.OBSERVED)
                delegated_tags.append(Provenance.OBSERVED)
            else:
                partial.append(frozenset())
                partial_tags.append(Provenance.EMPTY_ABSENT)
                delegated.append(pool.vote(n, election.features))
                delegated_tags.append(Provenance.DELEGATE)
        for n in np.flatnonzero(present):
            pool.observe(int(n), election.features, truth[n])

        elections.append(election)
        masks.append(mask)
        profiles["full"].append(VisibleProfile.observed(truth))
        profiles["partial"].append(VisibleProfile(partial, partial_tags))
        profiles["delegated"].append(VisibleProfile(delegated, delegated_tags))
    log.debug("seed %d: %d delegate fits", seed, pool.n_fits)
    return SimulationData(elections, masks, profiles, seed)


def replay(rule: str, mode: str, data: SimulationData) -> VotingRecord:
    """Run one rule over the sampled rounds using the ballots of ``mode``."""
    n_voters = data.elections[0].n_voters
    engine = make_engine(rule, n_voters, mode)
    record = VotingRecord(n_voters)
    for election, mask, profile in zip(data.elections, data.presence, data.profiles[mode]):
        winner = engine.step(profile, election.n_alternatives, mask)
        record.append(election, mask, profile, winner)
    return record


def run_simulation(
    config: ExperimentConfig,
    sim_index: int,
    point_index: int | None = None,
    sweep_value: float | None = None,
) -> list[RunRecord]:
    seed = simulation_seed(config, sim_index, point_index)
    data = sample_simulation(config, seed)
    mean_size = data.mean_approval_size
    records = []
    for rule in config.rules:
        needed = set(config.modes)
        if "delegated" in needed:
            needed |= {"full", "partial"}
        voting = {mode: replay(rule, mode, data) for mode in MODES if mode in needed}
        for mode in config.modes:
            report = fairness_report(voting[mode])
            ov = None
            if mode == "delegated":
                ov = overlap(voting["delegated"].winners, voting["full"].winners, voting["partial"].winners)
            records.append(
                RunRecord(
                    sim_index=sim_index,
                    rule=rule,
                    mode=mode,
                    sweep_param=config.sweep_param,
                    sweep_value=sweep_value,
                    longest_dry_spell_max=report.longest_dry_spell_max,
                    longest_dry_spell_mean=report.longest_dry_spell_mean,
                    gini_influence=report.gini_influence,
                    lqc=report.lqc,
                    uqc=report.uqc,
                    qc=report.qc,
                    lqnc=report.lqnc,
                    uqnc=report.uqnc,
                    overlap=ov,
                    mean_approval_size=mean_size,
                    seed=seed,
                )
            )
    return records


def _run_task(args) -> list[RunRecord]:
    config, sim_index, point_index, value = args
    return run_simulation(config, sim_index, point_index, value)


def _execute(tasks: Sequence[tuple], jobs: int) -> list[RunRecord]:
    # results are merged in task order, so output does not depend on scheduling
    if jobs <= 1:
        chunks = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_task, tasks))
    return [r for chunk in chunks for r in chunk]


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> list[RunRecord]:
    """All simulations of ``config`` (a sweep if ``config.sweep_param`` is set)."""
    if config.sweep_param is not None:
        return run_sweep(config, jobs)
    return _execute([(config, i, None, None) for i in range(config.n_sims)], jobs)


def run_sweep(config: ExperimentConfig, jobs: int = 1) -> list[RunRecord]:
    """Run ``n_sims`` fresh simulations per sweep value, other settings fixed."""
    name = config.sweep_param
    if name not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {name!r}; expected one of {', '.join(SWEEP_PARAMS)}")
    tasks = []
    for point, value in enumerate(config.sweep_values):
        point_config = config.with_value(name, value)
        tasks.extend((point_config, i, point, float(value)) for i in range(config.n_sims))
    return _execute(tasks, jobs)


def write_records(records: Iterable[RunRecord], path, fmt: str = "csv") -> None:
    path = Path(path)
    rows = [r.as_row() for r in records]
    try:
        if fmt == "csv":
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=RECORD_COLUMNS, lineterminator="\n")
                writer.writeheader()
                for row in rows:
                    writer.writerow({k: _csv_cell(v) for k, v in row.items()})
        elif fmt == "json":
            path.write_text(json.dumps(rows, indent=1) + "\n", encoding="utf-8")
        else:
            raise ConfigError(f"unknown output format {fmt!r}; expected csv or json")
    except OSError as exc:
        raise OSError(f"cannot write records to {path}: {exc}") from exc


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.9g}"
    return value


def read_records(path, fmt: str = "csv") -> list[dict[str, Any]]:
    """Read rows written by :func:`write_records` back as dicts."""
    path = Path(path)
    if fmt == "json":
        return json.loads(path.read_text(encoding="utf-8"))
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append({k: _parse_cell(k, v) for k, v in row.items()})
    return out


_INT_COLUMNS = {"sim_index", "longest_dry_spell_max", "seed"}
_STR_COLUMNS = {"rule", "mode", "sweep_param"}


def _parse_cell(column: str, text: str):
    if text == "":
        return None
    if column in _STR_COLUMNS:
        return text
    if column in _INT_COLUMNS:
        return int(text)
    return float(text)


def summarize(records: Iterable[RunRecord], metric: str) -> dict[tuple, float]:
    """Mean of ``metric`` per (sweep value, rule, mode)."""
    groups: dict[tuple, list[float]] = {}
    for r in records:
        value = getattr(r, metric)
        if value is not None:
            groups.setdefault((r.sweep_value, r.rule, r.mode), []).append(value)
    return {k: float(np.mean(v)) for k, v in groups.items()}
