"""Command-line interface.

Exit codes: 0 on success, 1 when a computation or validation check fails,
2 for usage and I/O errors.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from .checks import run_all
from .exceptions import DataError, SdbfError
from .multinomial import MultinomialBayesFactor
from .mvt import MvtBayesFactor
from .report import write_report

EXIT_CHECK_FAILURE = 1
EXIT_USAGE = 2


def _read_csv_matrix(path):
    """Parse a headerless comma-separated numeric matrix.

    Raises :class:`DataError` naming the first offending line.
    """
    rows = []
    width = None
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"could not read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            row = [float(p) for p in parts]
        except ValueError:
            raise DataError(f"{path}: line {lineno}: not a numeric row: {line.strip()!r}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(
                f"{path}: line {lineno}: expected {width} columns, found {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.array(rows)


def _parse_counts(ctx, param, value):
    parts = value.split(",")
    if len(parts) != 4:
        raise click.BadParameter("expected four comma-separated counts, e.g. 315,101,108,32")
    try:
        counts = [int(p) for p in parts]
    except ValueError:
        raise click.BadParameter(f"counts must be integers, got {value!r}") from None
    if any(c < 0 for c in counts):
        raise click.BadParameter("counts must be nonnegative")
    if sum(counts) <= 0:
        raise click.BadParameter("total count must be positive")
    return counts


def _write_outputs(report, out_path):
    document = write_report(report, out_path)
    bf = document["bayes_factor"]
    click.echo(
        f"bf_cu = {bf['value']:.6g} (se {bf['std_error']:.3g}); report written to {out_path}"
    )


@click.group()
def main():
    """Constrained Bayes factor analyses with reproducible JSON reports."""


@main.command()
@click.option(
    "--data",
    "data_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Headerless CSV with two numeric columns (one row per observation).",
)
@click.option("--seed", required=True, type=int, help="Master seed for all random streams.")
@click.option("--draws", default=100_000, show_default=True, type=int, help="Retained draws per chain.")
@click.option("--burnin", default=None, type=int, help="Burn-in length (default: max(2000, draws/10)).")
@click.option(
    "--out",
    "out_path",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="Path of the JSON report to write.",
)
@click.option(
    "--emit-density-grid",
    is_flag=True,
    help="Also write <out>.density.csv with the estimated density curves.",
)
@click.option(
    "--conditional-prior",
    type=click.Choice(["exact", "cauchy"]),
    default="exact",
    show_default=True,
    help="Conditional prior of the common effect: exact Student t, or the "
    "Cauchy approximation matching the reference implementation.",
)
@click.option(
    "--kde-mode",
    type=click.Choice(["exact", "grid"]),
    default="exact",
    show_default=True,
    help="Pointwise KDE evaluation mode.",
)
def mvt(data_path, seed, draws, burnin, out_path, emit_density_grid, conditional_prior, kde_mode):
    """Test equal-and-positive standardized effects on bivariate data."""
    try:
        data = _read_csv_matrix(data_path)
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    estimator = MvtBayesFactor(
        n_draws=draws,
        n_burnin=burnin,
        conditional_prior=conditional_prior,
        kde_mode=kde_mode,
        seed=seed,
    )
    try:
        estimator.fit(data)
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    except SdbfError as exc:
        click.echo(f"error: sampler failed: {exc}", err=True)
        sys.exit(EXIT_CHECK_FAILURE)
    _write_outputs(estimator.report_, out_path)
    if emit_density_grid:
        grid_path = out_path.with_suffix(out_path.suffix + ".density.csv")
        names, columns = estimator.density_grid()
        table = np.column_stack(columns)
        np.savetxt(grid_path, table, delimiter=",", header=",".join(names), comments="")
        click.echo(f"density grid written to {grid_path}")


@main.command()
@click.option(
    "--counts",
    required=True,
    callback=_parse_counts,
    help="Four comma-separated category counts, e.g. 315,101,108,32.",
)
@click.option("--seed", required=True, type=int, help="Master seed for all random streams.")
@click.option(
    "--draws",
    default=10_000_000,
    show_default=True,
    type=int,
    help="Monte Carlo draws per ingredient.",
)
@click.option(
    "--out",
    "out_path",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="Path of the JSON report to write.",
)
@click.option(
    "--kde-mode",
    type=click.Choice(["exact", "grid"]),
    default="exact",
    show_default=True,
    help="Pointwise KDE evaluation mode.",
)
def multinomial(counts, seed, draws, out_path, kde_mode):
    """Test an order-and-equality hypothesis on four multinomial counts."""
    estimator = MultinomialBayesFactor(n_mc=draws, kde_mode=kde_mode, seed=seed)
    try:
        estimator.fit(counts)
    except (DataError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    except SdbfError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CHECK_FAILURE)
    _write_outputs(estimator.report_, out_path)


@main.command()
@click.option("--fast", is_flag=True, help="Smaller draw counts with widened tolerances.")
@click.option("--inject-fault", default=None, hidden=True)
def validate(fast, inject_fault):
    """Run the oracle and property suite; nonzero exit on any failure."""
    results = run_all(fast=fast, inject_fault=inject_fault)
    for result in results:
        click.echo(result.line())
    n_failed = sum(not r.passed for r in results)
    click.echo(f"{len(results) - n_failed}/{len(results)} checks passed")
    if n_failed:
        sys.exit(EXIT_CHECK_FAILURE)


if __name__ == "__main__":
    main()
