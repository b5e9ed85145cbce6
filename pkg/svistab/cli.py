"""CLI entry point for svistab."""

import asyncio
from pathlib import Path

import typer
from rich.console import Console

from .config import resolve_tolerances
from .errors import SpecError, SviError
from .exporters import dumps_report, emit_csv, export_json, series_names
from .runner import build_report, exit_code, run_analyses, select_analyses
from .spec import CERTIFY_OPS, OP_PARAMS, build_instances, load_spec

app = typer.Typer(
    name="svistab",
    help="Stability estimates and theorem checks for parameterized set-valued inclusions.",
    add_completion=False,
)
console = Console(stderr=True)

ANALYZE_OPS = frozenset(OP_PARAMS) - CERTIFY_OPS

SPEC_OPTION = typer.Option(..., "-s", "--spec", help="Problem-spec JSON file")
OUT_OPTION = typer.Option(None, "-o", "--out", help="Report JSON path (stdout if omitted and no --csv)")
SEED_OPTION = typer.Option(None, "--seed", help="Seed overriding the spec file and instance seeds")
JOBS_OPTION = typer.Option(1, "-j", "--jobs", help="Analyses run concurrently")
ONLY_OPTION = typer.Option(None, "--only", help="Run only this analysis id (repeatable)")
CSV_OPTION = typer.Option(None, "--csv", help="Write this series to stdout as CSV")
TIMINGS_OPTION = typer.Option(False, "--timings", help="Record per-analysis wall time (report is then not reproducible)")
QUIET_OPTION = typer.Option(False, "-q", "--quiet", help="Suppress progress output")


def _fail(e: SviError) -> None:
    if isinstance(e, SpecError):
        console.print(f"[red]Error: {e.args[0]}[/red]")
        for loc, msg in e.diagnostics:
            console.print(f"[red]  {loc}: {msg}[/red]")
    else:
        console.print(f"[red]Error: {e}[/red]")
    raise typer.Exit(1)


def _run(
    spec_path: Path,
    out: Path | None,
    seed: int | None,
    jobs: int,
    only: list[str] | None,
    csv: str | None,
    timings: bool,
    quiet: bool,
    ops: frozenset[str] | None,
    need_csv: bool = False,
) -> None:
    try:
        spec, raw = load_spec(spec_path)
        instances = build_instances(spec, seed)
        tolerances = resolve_tolerances(spec.tolerances)
        analyses = select_analyses(spec, only, ops)
    except SviError as e:
        _fail(e)

    if not analyses:
        console.print("[yellow]No analyses selected.[/yellow]")

    if not quiet:
        console.print(f"\n[bold]svistab[/bold] - {len(analyses)} analyses from {spec_path}\n")

    try:
        results = asyncio.run(run_analyses(analyses, instances, jobs, quiet))
    except SviError as e:
        _fail(e)

    report = build_report(results, raw, spec.seed if seed is None else seed, tolerances, timings)

    if need_csv and csv is None:
        names = series_names(report)
        if len(names) != 1:
            console.print(f"[red]Error: choose a series with --csv; available: {names}[/red]")
            raise typer.Exit(1)
        csv = names[0]

    if out is not None:
        export_json(report, out, quiet)
    elif csv is None:
        typer.echo(dumps_report(report), nl=False)

    if csv is not None:
        try:
            typer.echo(emit_csv(report, csv), nl=False)
        except SviError as e:
            _fail(e)

    code = exit_code(results)
    if not quiet:
        verdicts = report["summary"]["verdicts"]
        summary = ", ".join(f"{k}: {v}" for k, v in verdicts.items()) or "no certifications"
        if code == 0:
            console.print(f"\n[bold green]Done![/bold green] {summary}\n")
        else:
            console.print(f"\n[bold yellow]Finished with exit code {code}[/bold yellow] ({summary})\n")
    raise typer.Exit(code)


@app.command()
def analyze(
    spec: Path = SPEC_OPTION,
    out: Path = OUT_OPTION,
    seed: int = SEED_OPTION,
    jobs: int = JOBS_OPTION,
    only: list[str] = ONLY_OPTION,
    csv: str = CSV_OPTION,
    timings: bool = TIMINGS_OPTION,
    quiet: bool = QUIET_OPTION,
):
    """
    Run the estimator analyses (moduli, slopes, values) of a spec file.

    Example:
        svistab analyze --spec cubic.json --out report.json
    """
    _run(spec, out, seed, jobs, only, csv, timings, quiet, ANALYZE_OPS)


@app.command()
def certify(
    spec: Path = SPEC_OPTION,
    out: Path = OUT_OPTION,
    seed: int = SEED_OPTION,
    jobs: int = JOBS_OPTION,
    only: list[str] = ONLY_OPTION,
    csv: str = CSV_OPTION,
    timings: bool = TIMINGS_OPTION,
    quiet: bool = QUIET_OPTION,
):
    """
    Run the theorem checks of a spec file.

    Exits 2 when any check is violated.
    """
    _run(spec, out, seed, jobs, only, csv, timings, quiet, CERTIFY_OPS)


@app.command()
def sweep(
    spec: Path = SPEC_OPTION,
    out: Path = OUT_OPTION,
    seed: int = SEED_OPTION,
    jobs: int = JOBS_OPTION,
    only: list[str] = ONLY_OPTION,
    csv: str = CSV_OPTION,
    quiet: bool = QUIET_OPTION,
):
    """
    Run analyses and print one series as CSV, e.g. (p, val(p)) or (delta, ratio) levels.
    """
    _run(spec, out, seed, jobs, only, csv, False, quiet, None, need_csv=True)


@app.command()
def validate(
    spec: Path = SPEC_OPTION,
):
    """Check a spec file against the schema and build its instances."""
    try:
        parsed, _ = load_spec(spec)
        build_instances(parsed)
    except SviError as e:
        _fail(e)
    console.print(
        f"[bold green]Valid:[/bold green] {len(parsed.instances)} instances, {len(parsed.analyses)} analyses"
    )


if __name__ == "__main__":
    app()
