"""Command line interface: batch studies, aggregation, figures, and the service."""

from __future__ import annotations

import json
import os
from pathlib import Path

import click

from .service import DATA_DIR_ENV
from .studies import (
    StudySpec,
    read_summary,
    run_study,
    summarize as aggregate_rows,
    write_aggregate,
)


@click.group()
def main():
    """Cost-aware Bayesian optimization for iterative prototyping."""


@main.group()
def bench():
    """Run and inspect the simulation studies."""


@bench.command("run")
@click.option("--study", "study_id", type=click.IntRange(1, 6), required=True)
@click.option("--function", default="rosenbrock", show_default=True,
              help="ground-truth function (studies 1-3, 5, 6)")
@click.option("--trials", type=int, default=None, help="trials per condition and method")
@click.option("--iterations", type=int, default=None, help="post-initialization iterations")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="./results",
              show_default=True)
@click.option("--parallel", type=int, default=1, show_default=True)
@click.option("--sigma", type=float, default=None, help="relaxation bandwidth override")
@click.option("--w-create", type=float, default=None, help="constant create weight override")
@click.option("--budgets", default=None, help="comma-separated budget list (study 2)")
@click.option("--hardware-creates", default=None,
              help="comma-separated hardware create costs (study 3)")
@click.option("--software-creates", default=None,
              help="comma-separated software create costs (study 3)")
@click.option("--alphas", default=None, help="comma-separated believed-cost biases (study 6)")
@click.option("--bias-category", default=None,
              type=click.Choice(["tweak", "swap", "create"]), help="biased class (study 6)")
def bench_run(study_id, function, trials, iterations, seed, out_dir, parallel, sigma,
              w_create, budgets, hardware_creates, software_creates, alphas, bias_category):
    """Run one study and write trace + summary CSVs."""
    kwargs = {"study_id": study_id, "function": function, "seed": seed}
    if trials is not None:
        kwargs["trials"] = trials
    if iterations is not None:
        kwargs["iterations"] = iterations
    if sigma is not None:
        kwargs["sigma"] = sigma
    if w_create is not None:
        kwargs["w_create"] = w_create
    if budgets:
        kwargs["budgets"] = tuple(float(b) for b in budgets.split(","))
    if hardware_creates:
        kwargs["hardware_create_costs"] = tuple(float(c) for c in hardware_creates.split(","))
    if software_creates:
        kwargs["software_create_costs"] = tuple(float(c) for c in software_creates.split(","))
    if alphas:
        kwargs["alpha_grid"] = tuple(float(a) for a in alphas.split(","))
    if bias_category:
        kwargs["bias_categories"] = (bias_category,)
    spec = StudySpec(**kwargs)
    result = run_study(spec, out_dir, parallelism=parallel)
    click.echo(f"wrote {len(result.trace_paths)} trace files and {result.summary_path}")


@main.command()
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="directory for aggregate CSVs (default: same as --in)")
def summarize(in_dir, out_dir):
    """Aggregate per-trial summary CSVs into per-condition descriptive tables."""
    in_path = Path(in_dir)
    out_path = Path(out_dir) if out_dir else in_path
    out_path.mkdir(parents=True, exist_ok=True)
    summaries = sorted(in_path.glob("summary_*.csv"))
    if not summaries:
        click.echo("no summary_*.csv files found")
        return
    for path in summaries:
        rows = aggregate_rows(read_summary(path))
        dest = out_path / path.name.replace("summary_", "aggregate_")
        write_aggregate(rows, dest)
        click.echo(f"{dest}")
        header = ["condition", "method", "trials", "final_regret_mean",
                  "final_cumulative_cost_mean"]
        click.echo("  " + "  ".join(f"{h:>26}" for h in header))
        for r in rows:
            click.echo("  " + "  ".join(f"{_fmt(r[h]):>26}" for h in header))


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


@main.command()
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="directory for figures (default: <in>/figures)")
def report(in_dir, out_dir):
    """Render overview figures (PNG) from a study's CSV output."""
    from .report import render_study_figures

    in_path = Path(in_dir)
    out_path = Path(out_dir) if out_dir else in_path / "figures"
    paths = render_study_figures(in_path, out_path)
    for p in paths:
        click.echo(str(p))


@main.command()
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", type=click.Path(file_okay=False), default=None,
              help=f"session event-log directory (or ${DATA_DIR_ENV})")
@click.option("--static-dir", type=click.Path(file_okay=False), default=None,
              help="built web UI to serve at /")
def serve(port, host, data_dir, static_dir):
    """Run the session service."""
    import uvicorn

    from .service import create_app

    data = data_dir or os.environ.get(DATA_DIR_ENV, "./frugalbo-data")
    app = create_app(data_dir=data, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


@main.command("joystick-template")
def joystick_template():
    """Print the joystick session payload (the POST /sessions body)."""
    from .templates import joystick_session_payload

    click.echo(json.dumps(joystick_session_payload(), indent=2))


if __name__ == "__main__":
    main()
