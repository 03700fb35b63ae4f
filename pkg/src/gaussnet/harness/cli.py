"""Command-line entry point: ``gaussnet <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical degeneracy.
"""

import logging
import sys
from dataclasses import replace

import click

from ..errors import NumericalDegeneracyError, ParameterError
from .config import ConfigError, ExperimentConfig, ExperimentKind, load_config
from .csvio import emit_plotdata
from .experiments import run_experiment

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("gaussnet")


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _common(fn):
    fn = click.option("--quiet", is_flag=True, help="Suppress progress output.")(fn)
    fn = click.option("--jobs", type=int, default=None, help="Worker threads (results do not depend on it).")(fn)
    fn = click.option("--replicates", type=int, default=None, help="Number of replicate seeds.")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Master seed.")(fn)
    fn = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="INI config file.")(fn)
    return fn


def _run(kind, config_path, seed, out_dir, replicates, jobs, quiet):
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, format="%(message)s")
    try:
        overrides = {"experiment": kind}
        for attr, value in (("master_seed", seed), ("out", out_dir), ("replicates", replicates), ("jobs", jobs)):
            if value is not None:
                overrides[attr] = value
        if config_path:
            cfg = load_config(config_path, overrides)
        else:
            cfg = replace(ExperimentConfig(), **overrides).validate()
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    try:
        paths = run_experiment(cfg)
    except NumericalDegeneracyError as exc:
        _fail(EXIT_NUMERICAL, f"{type(exc).__name__}: {exc}")
    except ParameterError as exc:
        _fail(EXIT_CONFIG, str(exc))
    for p in paths:
        log.info("wrote %s", p)


@click.group()
def main():
    """Random Gaussian layer embedding experiments."""


def _subcommand(name, kind, help_text):
    @main.command(name, help=help_text)
    @_common
    def command(config_path, seed, out_dir, replicates, jobs, quiet):
        _run(kind, config_path, seed, out_dir, replicates, jobs, quiet)

    return command


_subcommand("meanwidth", ExperimentKind.MEAN_WIDTH, "Monte Carlo mean width against closed-form bounds.")
_subcommand("embed", ExperimentKind.EMBEDDING, "Distance preservation of random layers.")
_subcommand("recover", ExperimentKind.RECOVERY, "Input recovery error versus layer width.")
_subcommand("covering", ExperimentKind.COVERING, "Covering numbers before and after layers.")
_subcommand("samplesize", ExperimentKind.SAMPLE_SIZE, "Mean-width bound and net-size estimate.")
_subcommand("sweep", ExperimentKind.FULL_SWEEP, "Run every experiment.")


@main.command("plotdata")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--x", "x_field", required=True)
@click.option("--y", "y_field", required=True)
@click.option("--group", "group_field", default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--quiet", is_flag=True)
def plotdata(csv_path, x_field, y_field, group_field, out_path, quiet):
    """Extract a tidy (x, y, group) table from an experiment CSV."""
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, format="%(message)s")
    try:
        path, count = emit_plotdata(csv_path, x_field, y_field, group_field, out_path)
    except ParameterError as exc:
        _fail(EXIT_CONFIG, str(exc))
    log.info("wrote %s (%d rows)", path, count)


if __name__ == "__main__":
    main()
