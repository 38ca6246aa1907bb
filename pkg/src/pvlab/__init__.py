"""Perpetual approval voting under partial turnout, with artificial delegates."""

from .core import Election, PresenceMask, Provenance, VisibleProfile, VotingRecord, is_satisfied
from .delegates import LearnedPreference, LearnerConfig, TrainingSet, fit, log_likelihood, predict, simplex_project
from .harness import ExperimentConfig, RunRecord, run_experiment, run_simulation, run_sweep, write_records
from .metrics import FairnessReport, fairness_report, gini_influence, longest_dry_spell, overlap, quota_compliance
from .population import ConfigError, PopulationConfig, ThresholdMode, VoterModel
from .rules import RULE_IDS, ParticipationMode, make_engine

__version__ = "0.1.0"
