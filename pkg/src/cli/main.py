"""Command-line entry point for the anti-sensing surface simulations."""

import functools
import io
import sys
from typing import List, Optional, Sequence, Tuple

import click
import numpy as np

from src.channel.scenario import derive_channels, linear_to_db
from src.optimization.nu_solver import InfeasibleScenarioError
from src.optimization.phase_recovery import recover_phases
from src.sensing.estimator import monte_carlo_aoa_error
from src.services.config_loader import HarnessConfig, parse_config
from src.services.experiment import METHODS, ExperimentRunner, SweepRecord, build_records
from src.services.results_writer import emit_csv, write_table
from src.utils.logging import logger

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3

ECHO_FIELDS = ["trial", "psi_hat_deg", "error_deg", "alpha_hat_re", "alpha_hat_im"]


def _exit_codes(func):
    """Translate domain errors into the documented exit codes"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InfeasibleScenarioError as e:
            logger.error(f"Infeasible scenario: {str(e)}")
            click.echo(f"Error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_INFEASIBLE)
        except ValueError as e:
            # ConfigParseError, pydantic ValidationError and bad arguments
            logger.error(f"Invalid input: {str(e)}")
            click.echo(f"Error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_PARSE)
        except OSError as e:
            logger.error(f"I/O failure: {str(e)}")
            click.echo(f"Error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_IO)
    return wrapper


def _common_options(func):
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="Flat key = value config file"),
        click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
                     help="CSV destination; standard output when omitted"),
        click.option("--seed", type=int, default=None, help="Override the configured seed"),
        click.option("--trials", type=click.IntRange(min=1), default=None,
                     help="Override the configured Monte Carlo trial count"),
        click.option("--method", type=click.Choice(list(METHODS) + ["all"]), default="all",
                     show_default=True, help="Surface design method"),
        click.option("--estimator", type=click.Choice(["asymptotic", "monte-carlo"]), default=None,
                     help="Override the configured AoA estimator"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _methods(method: str) -> Tuple[str, ...]:
    return METHODS if method == "all" else (method,)


def _load(config_path: Optional[str]) -> HarnessConfig:
    return parse_config(config_path)


def _write_records(records: Sequence[SweepRecord], out_path: Optional[str]) -> None:
    if out_path is None:
        buffer = io.StringIO()
        emit_csv(records, buffer)
        click.echo(buffer.getvalue(), nl=False)
    else:
        emit_csv(records, out_path)


def _run_sweeps(config: HarnessConfig, sweeps: Sequence[str], method: str, out_path: Optional[str],
                **overrides) -> None:
    records: List[SweepRecord] = []
    for sweep in sweeps:
        spec = config.experiment(sweep, methods=_methods(method), **overrides)
        records.extend(ExperimentRunner.from_spec(spec).run_sweep(spec))
    _write_records(records, out_path)


@click.group()
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Override LOG_LEVEL")
def cli(log_level: Optional[str]):
    """Intelligent-surface anti-sensing: solver, sweeps and echo simulation."""
    if log_level:
        logger.set_level(log_level)


@cli.command()
@_common_options
@_exit_codes
def solve(config_path, out_path, seed, trials, method, estimator):
    """Solve one scenario and print a summary per method."""
    config = _load(config_path)
    scenario = config.resolved_scenario()
    runner = ExperimentRunner(config.grid_step_deg, config.exhaustive_radial_steps,
                              config.exhaustive_angular_steps)

    results = []
    for name in _methods(method):
        result = runner.run_point(
            scenario,
            name,
            estimator or config.estimator,
            trials or config.trials,
            config.seed if seed is None else seed
        )
        if not result.feasible:
            raise InfeasibleScenarioError(
                f"SNR floor of {linear_to_db(scenario.snr_floor):.3f} dB cannot be met"
            )
        results.append(result)

        click.echo(f"[{name}]")
        click.echo(f"  nu              = {result.nu.real:.9e} {result.nu.imag:+.9e}j")
        click.echo(f"  candidate_index = {result.candidate_index}")
        click.echo(f"  snr_db          = {result.snr_db:.6f}")
        click.echo(f"  aoa_error_deg   = {result.error_deg:.6f}")
        click.echo(f"  objective       = {result.utility:.9e}")

    if out_path is not None:
        emit_csv(build_records("solve", 0.0, results), out_path)


@cli.command("sweep-location")
@_common_options
@click.option("--axis", type=click.Choice(["y", "x", "both"]), default="both", show_default=True,
              help="Move the surface along y, x, or both in turn")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel sweep points")
@_exit_codes
def sweep_location(config_path, out_path, seed, trials, method, estimator, axis, workers):
    """AoA error versus the surface location."""
    sweeps = {"y": ["is_location_y"], "x": ["is_location_x"], "both": ["is_location_y", "is_location_x"]}[axis]
    _run_sweeps(_load(config_path), sweeps, method, out_path,
                seed=seed, trials=trials, estimator=estimator, workers=workers)


@cli.command("sweep-ny")
@_common_options
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel sweep points")
@_exit_codes
def sweep_ny(config_path, out_path, seed, trials, method, estimator, workers):
    """AoA error versus the number of surface elements per row."""
    _run_sweeps(_load(config_path), ["ny"], method, out_path,
                seed=seed, trials=trials, estimator=estimator, workers=workers)


@cli.command("sweep-snr")
@_common_options
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel sweep points")
@_exit_codes
def sweep_snr(config_path, out_path, seed, trials, method, estimator, workers):
    """AoA error versus the required SNR enhancement over the no-surface link."""
    _run_sweeps(_load(config_path), ["snr_enhancement_db"], method, out_path,
                seed=seed, trials=trials, estimator=estimator, workers=workers)


@cli.command("echo-sim")
@_common_options
@click.option("--no-is", "no_is", is_flag=True, default=False, help="Simulate without the surface")
@_exit_codes
def echo_sim(config_path, out_path, seed, trials, method, estimator, no_is):
    """Monte Carlo ML estimation on simulated echoes for a fixed surface design."""
    config = _load(config_path)
    scenario = config.resolved_scenario()
    channels = derive_channels(scenario)
    name = "proposed" if method == "all" else method
    seed = config.seed if seed is None else seed
    trials = trials or config.trials
    grid_step = float(np.deg2rad(config.grid_step_deg))

    theta = None
    if not no_is:
        runner = ExperimentRunner(config.grid_step_deg, config.exhaustive_radial_steps,
                                  config.exhaustive_angular_steps)
        result = runner.run_point(scenario, name)
        if not result.feasible:
            raise InfeasibleScenarioError("SNR floor cannot be met")
        theta = recover_phases(result.nu, channels, scenario)

    summary = monte_carlo_aoa_error(channels, theta, scenario, trials, seed, grid_step)
    click.echo(f"method          = {'none' if no_is else name}")
    click.echo(f"trials          = {summary.trials}")
    click.echo(f"mean_error_deg  = {summary.mean_error_deg:.6f}")
    click.echo(f"std_error_deg   = {summary.std_error_deg:.6f}")

    if out_path is not None:
        rows = [
            (trial, float(np.degrees(psi)), float(error), float(alpha.real), float(alpha.imag))
            for trial, (psi, error, alpha) in enumerate(zip(summary.psi_hats, summary.errors_deg, summary.alpha_hats))
        ]
        write_table(ECHO_FIELDS, rows, out_path)


def run(argv: Optional[Sequence[str]] = None) -> None:
    """Console entry point; usage errors exit with the parse/validation code"""
    try:
        code = cli.main(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.UsageError as e:
        e.show()
        code = EXIT_PARSE
    except click.ClickException as e:
        e.show()
        code = e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        code = EXIT_PARSE
    sys.exit(code if isinstance(code, int) else EXIT_OK)


if __name__ == "__main__":
    run()
