#!/usr/bin/env python3
"""
Command-line entry point for dual gradient experiments
"""

import functools
import logging
import sys

import click
from tabulate import tabulate

from common.errors import ConfigError
from common.errors import DualGradientError
from common.logging_config import configure_logging
from experiments.config import load_config
from experiments.runner import ExperimentRunner
from experiments.runner import run_comparison
from problems.generator import default_penalty_kind
from problems.generator import describe_problems

logger = logging.getLogger(__name__)

config_option = click.option('--config', 'config_path', envvar='DUALGRAD_CONFIG', required=True,
                             type=click.Path(dir_okay=False), help='Experiment configuration (JSON)')
out_option = click.option('--out', 'output_dir', envvar='DUALGRAD_OUTPUT_DIR', type=click.Path(file_okay=False),
                          help='Output directory (overrides output_dir in the config)')
jobs_option = click.option('--jobs', default=1, show_default=True, type=click.IntRange(min=1),
                           help='Grid cells solved concurrently')
unproven_option = click.option('--allow-unproven-region', 'allow_unproven', is_flag=True,
                               help='Allow tau and step sizes outside the proven region (marked experimental)')


def handle_errors(command):
    """Report toolkit errors in red and exit non-zero instead of printing a traceback"""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigError as e:
            click.secho(f"Configuration error: {e}", fg='red', err=True)
            sys.exit(2)
        except DualGradientError as e:
            click.secho(f"Error: {e}", fg='red', err=True)
            sys.exit(1)
    return wrapper


def _banner(title: str) -> None:
    click.echo("\n" + "=" * 60)
    click.echo(title)
    click.echo("=" * 60)


@click.group()
@click.option('--debug', is_flag=True, help='Enable debug logging')
def main(debug):
    """Dual gradient regularization of linear ill-posed problems"""
    configure_logging(debug)


@main.command()
@config_option
@out_option
@click.option('--record-every', type=click.IntRange(min=1), help='Keep every m-th iterate')
@unproven_option
@handle_errors
def solve(config_path, output_dir, record_every, allow_unproven):
    """Run one solve at the first noise level"""
    config = load_config(config_path)
    runner = ExperimentRunner(config, output_dir, record_every=record_every, allow_unproven=allow_unproven or None)
    record, summary = runner.run_single()

    _banner(f"SOLVE: {config.problem.name} ({config.method})")
    click.echo(tabulate([(k, v) for k, v in summary.items()], headers=['Field', 'Value'], tablefmt='grid'))
    if record.experimental:
        click.secho("Outside the proven parameter region: results are experimental", fg='yellow')
    click.echo(f"\nOutputs written to {runner.output_dir}")


@main.command(name='rate-study')
@config_option
@out_option
@jobs_option
@unproven_option
@handle_errors
def rate_study(config_path, output_dir, jobs, allow_unproven):
    """Solve across the noise levels and fit convergence rates"""
    config = load_config(config_path)
    runner = ExperimentRunner(config, output_dir, jobs=jobs, allow_unproven=allow_unproven or None)
    result = runner.run_rate_study()

    _banner(f"RATE STUDY: {config.problem.name} ({config.method})")
    click.echo(f"\nSolver invocations: {result.invocations}")
    fit_rows = [(m.value, f"{f.slope:.4f}", f"{f.r_squared:.4f}", f.n_points, 'yes' if f.dropped_largest else 'no')
                for m, f in result.fits.items()]
    click.echo(tabulate(fit_rows, headers=['Measure', 'Slope', 'R^2', 'Points', 'Dropped largest'],
                        tablefmt='grid'))
    click.echo(f"\nOutputs written to {result.output_dir}")


@main.command()
@click.option('--config', 'config_paths', multiple=True, required=True, type=click.Path(dir_okay=False),
              help='Two experiment configurations differing only in the method')
@out_option
@jobs_option
@unproven_option
@handle_errors
def compare(config_paths, output_dir, jobs, allow_unproven):
    """Compare iterations-to-stop of two methods"""
    if len(config_paths) != 2:
        raise click.UsageError("compare needs exactly two --config options")
    config_a, config_b = (load_config(path) for path in config_paths)
    frame = run_comparison(config_a, config_b, output_dir, jobs, allow_unproven=allow_unproven or None)

    _banner(f"COMPARISON: {config_a.method} vs {config_b.method}")
    columns = ['delta', 'seed', 'n_a', 'n_b', 'ratio', 'termination_a', 'termination_b']
    click.echo(tabulate(frame[columns].values.tolist(), headers=columns, tablefmt='grid'))


@main.command(name='validate-config')
@config_option
@handle_errors
def validate_config(config_path):
    """Validate a configuration file and print its hash"""
    config = load_config(config_path)
    click.echo(f"{config_path}: valid (config hash {config.config_hash})")


@main.command(name='list-problems')
def list_problems():
    """List the built-in test problems"""
    rows = [(name, default_penalty_kind(name).value, description) for name, description in describe_problems()]
    click.echo(tabulate(rows, headers=['Problem', 'Penalty', 'Description'], tablefmt='grid'))


if __name__ == '__main__':
    main()
