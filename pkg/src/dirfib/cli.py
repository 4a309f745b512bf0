"""Command-line verification surface.

Subcommands: run a JSON scenario and print a JSON report; explain a
report in prose.  Exit codes: 0 all verdicts as expected, 1 unexpected
verdict, 2 usage or parse error.
"""

from __future__ import annotations

import json
import sys

import click

from .scenario import (
    ScenarioError, dump_samples, explain as explain_report, load_scenario,
    report_dict, run_scenario,
)


@click.group()
def main():
    """Sampled certification of directed lifting constructions."""


@main.command()
@click.argument("scenario", type=click.Path())
@click.option("--grid", type=int, default=None,
              help="Override grid resolution.")
@click.option("--tol", type=float, default=None,
              help="Override default tolerance.")
@click.option("--parallel", is_flag=True,
              help="Run tasks in a thread pool (tasks are pure).")
@click.option("--dump", "dump_dir", type=click.Path(file_okay=False),
              default=None, help="Write sample CSVs into this directory.")
def run(scenario, grid, tol, parallel, dump_dir):
    """Execute every task in SCENARIO and print a JSON report."""
    try:
        data = load_scenario(scenario)
    except ScenarioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    results = run_scenario(data, grid, tol, parallel)
    grid_n = grid or int(data.get("grid", {}).get("resolution", 101))
    eff_tol = tol if tol is not None else float(data.get("tolerance", 1e-9))
    report = report_dict(results, grid_n, eff_tol)
    if dump_dir:
        import os
        os.makedirs(dump_dir, exist_ok=True)
        for r in results:
            dump_samples(r, dump_dir)
    click.echo(json.dumps(report, indent=2, sort_keys=True))
    sys.exit(0 if report["summary"]["unexpected"] == 0 else 1)


@main.command()
@click.argument("report", type=click.Path())
def explain(report):
    """Narrate a previously written JSON report."""
    try:
        with open(report) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot read report: {exc}", err=True)
        sys.exit(2)
    click.echo(explain_report(data))


if __name__ == "__main__":
    main()
