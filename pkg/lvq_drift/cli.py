"""Command-line front end: scenario in, CSV tables and a run manifest out."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .config import (
    canned_document,
    list_scenarios,
    read_document,
    scenario_from_document,
)
from .const import (
    COLUMNS,
    COMPARE_CSV,
    CONF_ALPHA_MAX,
    CONF_DIM,
    CONF_ENGINE,
    CONF_GAMMA,
    CONF_MC_RUNS,
    CONF_SEED,
    CONF_WORKERS,
    CSV_DIGITS,
    ENGINES,
    LOGGER,
    MANIFEST_JSON,
    MC_CSV,
    ODE_CSV,
    VERSION,
)
from .diagnostics import build_manifest, write_manifest
from .exceptions import ConfigSourceError, ConfigValidationError, LvqDriftError
from .harness import run_scenario
from .models import DeviationReport, LearningCurve, Scenario

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2

OUTPUT_FORMATS = ("csv",)


@dataclass(frozen=True, kw_only=True)
class RunConfig:
    """One invocation: where the scenario comes from and where results go.

    With neither ``config_path`` nor ``scenario_name`` the all-defaults
    document is used.
    """

    config_path: Path | None = None
    scenario_name: str | None = None
    out: Path = Path("out")
    overrides: dict[str, Any] = field(default_factory=dict)
    output_format: str = "csv"
    verbosity: int = logging.INFO

    def __post_init__(self) -> None:
        """Check that at most one scenario source is given."""
        if self.config_path is not None and self.scenario_name is not None:
            raise ConfigValidationError(
                "scenario", "--config and --scenario are mutually exclusive"
            )
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigValidationError("format", f"must be one of {OUTPUT_FORMATS}")

    def resolve(self) -> Scenario:
        """Read the scenario source, apply flag overrides and validate."""
        if self.config_path is not None:
            if not self.config_path.is_file():
                raise ConfigSourceError(str(self.config_path))
            document = read_document(self.config_path.read_text(encoding="utf-8"))
            name = self.config_path.stem
        elif self.scenario_name is not None:
            document = canned_document(self.scenario_name)
            name = self.scenario_name
        else:
            document = {}
            name = "defaults"
        document.update(self.overrides)
        return scenario_from_document(document, name)


def _fmt(value: float) -> str:
    return format(value, CSV_DIGITS)


def write_curve(path: Path, curve: LearningCurve) -> None:
    """Write a learning curve; Monte Carlo means get *_std columns."""
    header = list(COLUMNS)
    if curve.std is not None:
        header += [f"{key}_std" for key in COLUMNS[1:]]
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for i, alpha in enumerate(curve.alpha):
            row = [_fmt(float(alpha))]
            row += [_fmt(float(curve.values[key][i])) for key in COLUMNS[1:]]
            if curve.std is not None:
                row += [_fmt(float(curve.std[key][i])) for key in COLUMNS[1:]]
            writer.writerow(row)


def write_comparison(path: Path, report: DeviationReport) -> None:
    """Write per-column deviation statistics."""
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["column", "max_abs", "mean_abs", "max_abs_z"])
        for key in COLUMNS[1:]:
            dev = report.columns[key]
            writer.writerow(
                [
                    key,
                    _fmt(dev.max_abs),
                    _fmt(dev.mean_abs),
                    "" if dev.max_abs_z is None else _fmt(dev.max_abs_z),
                ]
            )


def run(config: RunConfig) -> int:
    """Run the configured scenario and write its outputs; return the exit status."""
    try:
        scenario = config.resolve()
        result = run_scenario(scenario)
        config.out.mkdir(parents=True, exist_ok=True)
        files: list[str] = []
        if result.ode is not None:
            write_curve(config.out / ODE_CSV, result.ode)
            files.append(ODE_CSV)
        if result.mc is not None:
            write_curve(config.out / MC_CSV, result.mc)
            files.append(MC_CSV)
        if result.comparison is not None:
            write_comparison(config.out / COMPARE_CSV, result.comparison)
            files.append(COMPARE_CSV)
        files.append(MANIFEST_JSON)
        write_manifest(config.out / MANIFEST_JSON, build_manifest(result, files))
    except LvqDriftError as err:
        LOGGER.error("%s", err)
        return EXIT_INVALID
    except OSError as err:
        LOGGER.error("Cannot write results to %s: %s", config.out, err)
        return EXIT_IO
    LOGGER.info("Wrote %s to %s", ", ".join(files), config.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser of the lvq-drift command."""
    parser = argparse.ArgumentParser(
        prog="lvq-drift",
        description="Simulate LVQ1 training under drifting class priors.",
    )
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--config", type=Path, help="TOML scenario document")
    source.add_argument("--scenario", help="name of a shipped scenario")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--engine", choices=ENGINES)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--runs", type=int, help="number of Monte Carlo runs")
    parser.add_argument("--dim", type=int, help="input dimension N")
    parser.add_argument("--gamma", type=float, help="weight decay")
    parser.add_argument("--alpha-max", type=float, dest="alpha_max")
    parser.add_argument("--workers", type=int, help="processes for Monte Carlo runs")
    parser.add_argument(
        "--list-scenarios", action="store_true", help="list shipped scenarios and exit"
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", action="store_true")
    verbosity.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Translate parsed flags into a run configuration."""
    flag_keys = {
        "engine": CONF_ENGINE,
        "seed": CONF_SEED,
        "runs": CONF_MC_RUNS,
        "dim": CONF_DIM,
        "gamma": CONF_GAMMA,
        "alpha_max": CONF_ALPHA_MAX,
        "workers": CONF_WORKERS,
    }
    overrides = {
        key: getattr(args, flag)
        for flag, key in flag_keys.items()
        if getattr(args, flag) is not None
    }
    if args.quiet:
        level = logging.WARNING
    elif args.verbose:
        level = logging.DEBUG
    else:
        level = logging.INFO
    return RunConfig(
        config_path=args.config,
        scenario_name=args.scenario,
        out=args.out,
        overrides=overrides,
        verbosity=level,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the lvq-drift command."""
    args = build_parser().parse_args(argv)
    if args.list_scenarios:
        for name in list_scenarios():
            print(name)  # noqa: T201
        return EXIT_OK
    config = config_from_args(args)
    logging.basicConfig(
        level=config.verbosity,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
