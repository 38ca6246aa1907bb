"""Command line interface: ``pvlab simulate | sweep | oracle``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import oracles
from .delegates import LearnerConfig
from .harness import MODES, SWEEP_PARAMS, ExperimentConfig, run_experiment, summarize, write_records
from .population import ConfigError, PopulationConfig, ThresholdMode
from .rules import RULE_IDS

log = logging.getLogger("pvlab")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

# flag/config key -> (section, field, parser)
_KEYS = {
    "voters": ("population", "n_voters", int),
    "alternatives": ("population", "n_alternatives", int),
    "dims": ("population", "d", int),
    "minority_fraction": ("population", "minority_fraction", float),
    "cluster_density": ("population", "cluster_density", float),
    "dirichlet_alpha": ("population", "dirichlet_alpha", float),
    "absenteeism": ("population", "absenteeism", float),
    "tau": ("population", "tau", float),
    "beta": ("population", "beta", float),
    "threshold_mode": ("population", "threshold_mode", str),
    "max_iters": ("learner", "max_iters", int),
    "grad_tol": ("learner", "grad_tol", float),
    "refit_every_absence": ("learner", "refit_every_absence", bool),
    "learn_sharpness": ("learner", "learn_sharpness", bool),
    "rounds": ("experiment", "rounds", int),
    "sims": ("experiment", "n_sims", int),
    "seed": ("experiment", "master_seed", int),
    "rules": ("experiment", "rules", None),
    "modes": ("experiment", "modes", None),
    "param": ("experiment", "sweep_param", str),
    "values": ("experiment", "sweep_values", None),
}
_RUN_KEYS = {"out", "format", "jobs"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _csv_list(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(t) for t in text]
    return [t.strip() for t in str(text).split(",") if t.strip()]


def parse_values(text) -> list[float]:
    """``"0.1:0.9:0.2"`` (inclusive range) or ``"0.1,0.5"``, or a JSON list."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text)
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ConfigError("range step must be positive")
            count = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(v) for v in _csv_list(text)]
    except ValueError as exc:
        raise ConfigError(f"cannot parse sweep values {text!r}: {exc}") from None


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes", "on"):
        return True
    if str(value).lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def build_config(settings: dict) -> ExperimentConfig:
    """Turn flat flag/config-file settings into an :class:`ExperimentConfig`."""
    sections = {"population": {}, "learner": {}, "experiment": {}}
    for raw_key, value in settings.items():
        key = raw_key.replace("-", "_")
        if key in _RUN_KEYS or key == "config" or value is None:
            continue
        if key not in _KEYS:
            raise ConfigError(f"unknown setting {raw_key!r}")
        section, name, kind = _KEYS[key]
        if key in ("rules", "modes"):
            value = tuple(_csv_list(value))
        elif key == "values":
            value = tuple(parse_values(value))
        elif kind is bool:
            value = _parse_bool(value)
        else:
            try:
                value = kind(value)
            except (TypeError, ValueError):
                raise ConfigError(f"invalid value for {raw_key}: {value!r}") from None
        sections[section][name] = value
    try:
        return ExperimentConfig(
            population=PopulationConfig(**sections["population"]),
            learner=LearnerConfig(**sections["learner"]),
            **sections["experiment"],
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    p.add_argument("--rules", default=S, help=f"comma list from {','.join(RULE_IDS)}")
    p.add_argument("--modes", default=S, help=f"comma list from {','.join(MODES)}")
    p.add_argument("--rounds", type=int, default=S)
    p.add_argument("--sims", type=int, default=S)
    p.add_argument("--voters", type=int, default=S)
    p.add_argument("--alternatives", type=int, default=S)
    p.add_argument("--dims", type=int, default=S)
    p.add_argument("--minority-fraction", type=float, default=S)
    p.add_argument("--cluster-density", type=float, default=S)
    p.add_argument("--dirichlet-alpha", type=float, default=S)
    p.add_argument("--absenteeism", type=float, default=S)
    p.add_argument("--tau", type=float, default=S)
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--threshold-mode", choices=[m.value for m in ThresholdMode], default=S)
    p.add_argument("--max-iters", type=int, default=S)
    p.add_argument("--grad-tol", type=float, default=S)
    p.add_argument("--refit-every-absence", default=S, help="true/false")
    p.add_argument("--learn-sharpness", default=S, help="true/false; false fits the unit-slope model")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--jobs", type=int, default=S, help="worker processes (default 1)")
    p.add_argument("--out", default=S, help="output file (default: print a summary only)")
    p.add_argument("--format", choices=["csv", "json"], default=S)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pvlab", description="Perpetual voting with absentees and artificial delegates.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    simulate = sub.add_parser("simulate", help="run simulations at one parameter setting")
    _add_experiment_flags(simulate)
    sweep = sub.add_parser("sweep", help="vary one parameter, holding the rest at their defaults")
    _add_experiment_flags(sweep)
    sweep.add_argument("--param", default=argparse.SUPPRESS, help=f"one of {', '.join(SWEEP_PARAMS)}")
    sweep.add_argument("--values", default=argparse.SUPPRESS, help="start:stop:step or comma list")
    oracle = sub.add_parser("oracle", help="run brute-force equivalence checks")
    oracle.add_argument("--seed", type=int, default=0)
    return parser


def _load_settings(args: argparse.Namespace) -> dict:
    settings: dict = {}
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        settings.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, value in vars(args).items():
        if key not in ("command", "verbose", "config"):
            settings[key] = value
    return settings


def _print_summary(records) -> None:
    for metric in ("longest_dry_spell_mean", "gini_influence", "qc", "overlap"):
        means = summarize(records, metric)
        for (value, rule, mode), mean in sorted(means.items(), key=lambda kv: str(kv[0])):
            where = "" if value is None else f" @ {value:g}"
            print(f"{metric:24s} {rule:10s} {mode:10s}{where}: {mean:.4f}")


def _simulate(args) -> int:
    settings = _load_settings(args)
    if args.command == "sweep" and not settings.get("param"):
        raise ConfigError("sweep needs --param")
    if args.command == "sweep" and not settings.get("values"):
        raise ConfigError("sweep needs --values")
    if args.command == "simulate":
        settings.pop("param", None)
        settings.pop("values", None)
    config = build_config(settings)
    fmt = settings.get("format", "csv")
    jobs = int(settings.get("jobs", 1))
    started = time.perf_counter()
    records = run_experiment(config, jobs=jobs)
    log.info("%d records in %.1fs", len(records), time.perf_counter() - started)
    if settings.get("out"):
        write_records(records, settings["out"], fmt)
    else:
        _print_summary(records)
    return EXIT_OK


def _oracle(args) -> int:
    ok = True
    for result in oracles.run_all(seed=args.seed):
        ok &= result.passed
        print(f"{'PASS' if result.passed else 'FAIL'}  {result.name}: {result.detail} ({result.seconds:.2f}s)")
    return EXIT_OK if ok else EXIT_RUNTIME


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        if args.command == "oracle":
            return _oracle(args)
        return _simulate(args)
    except ConfigError as exc:
        print(f"pvlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - top-level boundary
        print(f"pvlab: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
