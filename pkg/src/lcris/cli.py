"""Command-line entry points.

Every report command takes ``--scenario/--out/--seed``, writes a CSV with a
``#``-prefixed metadata header, and (unless ``--no-plot``) renders a figure
with the same stem. Exit codes: 0 when the optimization converged, 2 when
an iteration cap was hit, 1 on any error. Log verbosity comes from the
``LCRIS_LOG_LEVEL`` environment variable (default WARNING).
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import experiments, plots
from . import scenario as sc
from .optimizer import OptStatus, neglect_baseline, optimize_phases

EXIT_ITERATION_CAP = 2


def _setup_logging() -> None:
    level = os.environ.get("LCRIS_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load(scenario_path: str, seed: int | None) -> sc.Scenario:
    try:
        scn = sc.load_scenario(scenario_path)
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    if seed is not None:
        scn = dataclasses.replace(scn, seed=seed)
    return scn


def _write_outputs(table: experiments.ResultTable, out: str, plot: bool, **render_kwargs):
    path = table.write(out)
    click.echo(f"wrote {path}")
    if plot:
        fig_path = plots.render(table, Path(out).with_suffix(".png"), **render_kwargs)
        click.echo(f"wrote {fig_path}")


def _exit_for(status: OptStatus):
    if status is not OptStatus.CONVERGED:
        sys.exit(EXIT_ITERATION_CAP)


scenario_option = click.option("--scenario", "scenario_path", required=True,
                               type=click.Path(exists=True, dir_okay=False),
                               help="Scenario JSON document.")
out_option = click.option("--out", required=True, type=click.Path(dir_okay=False),
                          help="Output CSV path.")
seed_option = click.option("--seed", type=int, default=None,
                           help="Override the scenario seed.")
plot_option = click.option("--plot/--no-plot", default=True,
                           help="Render a figure next to the CSV.")


@click.group()
@click.version_option(version=__version__, prog_name="lcris")
def cli():
    """Temperature-aware secrecy phase design for liquid-crystal RIS."""
    _setup_logging()


@cli.command("lc-curve")
@scenario_option
@out_option
@seed_option
@plot_option
@click.option("--t-min", type=float, default=0.0, show_default=True)
@click.option("--t-max", type=float, default=None,
              help="Default: clearing temperature minus 1 degC.")
@click.option("--t-step", type=float, default=1.0, show_default=True)
def lc_curve(scenario_path, out, seed, plot, t_min, t_max, t_step):
    """Phase budget versus temperature for the scenario's LC cell."""
    scn = _load(scenario_path, seed)
    if t_max is None:
        t_max = scn.lc.clearing_temp_c - 1.0
    t_range = np.arange(t_min, t_max + t_step / 2.0, t_step)
    table = experiments.run_lc_curve(
        scn.lc, t_range,
        metadata={"scenario_hash": sc.scenario_hash(scn), "seed": str(scn.seed)},
    )
    _write_outputs(table, out, plot)


@cli.command()
@scenario_option
@out_option
@seed_option
def optimize(scenario_path, out, seed):
    """Run the phase design and write the solve report as JSON."""
    scn = _load(scenario_path, seed)
    report = optimize_phases(scn)
    doc = {
        "tool": f"lcris {__version__}",
        "scenario_hash": sc.scenario_hash(scn),
        "seed": scn.seed,
        "status": report.status.value,
        "final_gamma": report.final_gamma,
        "secrecy_rate_bits": report.secrecy_rate_bits,
        "n_false": report.n_false,
        "final_phases_rad": [float(w) for w in report.final_phases.omega],
        "gamma_trace": report.gamma_trace,
        "gap_trace": report.gap_trace,
        "n_false_trace": report.n_false_trace,
    }
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    click.echo(f"wrote {path} (status: {report.status.value}, "
               f"SR = {report.secrecy_rate_bits:.4g} bits/s/Hz)")
    _exit_for(report.status)


@cli.command()
@scenario_option
@out_option
@seed_option
@plot_option
def convergence(scenario_path, out, seed, plot):
    """Per-iteration rank-one gap and phase-budget violation trace."""
    scn = _load(scenario_path, seed)
    report = optimize_phases(scn)
    table = experiments.convergence_table(report, scn)
    _write_outputs(table, out, plot)
    _exit_for(report.status)


@cli.command()
@scenario_option
@out_option
@seed_option
@plot_option
@click.option("--method", type=click.Choice(["optimized", "neglect"]),
              default="optimized", show_default=True,
              help="Whose phases to evaluate on the plane.")
def heatmap(scenario_path, out, seed, plot, method):
    """Received-power map on the evaluation plane."""
    scn = _load(scenario_path, seed)
    run = optimize_phases if method == "optimized" else neglect_baseline
    report = run(scn)
    table = experiments.run_heatmap(scn, report.final_phases)
    boxes = [
        (*scn.user_box.x_m, *scn.user_box.y_m),
        (*scn.eve_box.x_m, *scn.eve_box.y_m),
    ]
    _write_outputs(table, out, plot, boxes=boxes)
    _exit_for(report.status)


@cli.command()
@scenario_option
@out_option
@seed_option
@plot_option
@click.option("--orientation", type=click.Choice(["h", "v"]), required=True,
              help="Eavesdropper placement: h = same x, v = same y as the user box.")
@click.option("--distances", required=True,
              help="Comma-separated nearest-point separations in meters.")
def sweep(scenario_path, out, seed, plot, orientation, distances):
    """Secrecy rate versus user-eavesdropper separation."""
    scn = _load(scenario_path, seed)
    try:
        dist_values = [float(tok) for tok in distances.split(",") if tok.strip()]
    except ValueError as exc:
        raise click.ClickException(f"bad --distances list: {exc}") from exc
    if not dist_values:
        raise click.ClickException("--distances must contain at least one value")
    orient = "horizontal" if orientation == "h" else "vertical"
    table = experiments.run_distance_sweep(scn, orient, dist_values)
    _write_outputs(table, out, plot)
    statuses = table.metadata["status_optimized"] + "," + table.metadata["status_neglect"]
    if any(s != OptStatus.CONVERGED.value for s in statuses.split(",")):
        sys.exit(EXIT_ITERATION_CAP)


def main():
    # Map argument-parsing failures onto the generic error code; 2 is
    # reserved for iteration-cap termination.
    click.UsageError.exit_code = 1
    cli(prog_name="lcris")


if __name__ == "__main__":
    main()
