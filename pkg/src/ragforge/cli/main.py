"""Command-line interface for ragforge."""
import json
import logging
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from ragforge.config import PipelineConfig, get_config, set_config
from ragforge.errors import ArtifactMissingError, RagforgeError
from ragforge.evaluation.report import MetricReport, render_report
from ragforge.fixtures import write_fixture
from ragforge.jsonl import read_json
from ragforge.pipeline import Pipeline, Stage, Workspace
from ragforge.retrieval import all_configs, load_queries, run_matrix, save_results


app = typer.Typer(
    name="ragforge",
    help="Metadata-enrichment pipeline and retrieval evaluation harness",
    no_args_is_help=True,
)
console = Console()


def setup_logging(verbose: bool = False, level: str = "INFO"):
    """Configure logging."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def _load_config(config_path: Optional[Path]) -> PipelineConfig:
    try:
        config = PipelineConfig.load(config_path)
    except RagforgeError as e:
        console.print(f"[red]{e}[/red]")
        raise typer.Exit(1)
    set_config(config)
    return config


@app.command()
def run(
    stage: str = typer.Argument(..., help="Stage to run: ingest, chunk, enrich, embed, index, retrieve, groundtruth, evaluate or all"),
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Config file path"),
    force: bool = typer.Option(False, "--force", "-f", help="Re-run even if up to date"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
):
    """
    Run one pipeline stage, or all of them in order.

    A stage whose inputs and settings are unchanged since its last run is
    skipped.
    """
    config = _load_config(config_path)
    setup_logging(verbose, config.general.log_level)

    valid = [s.value for s in Stage] + ["all"]
    if stage not in valid:
        console.print(f"[red]Unknown stage: {stage}[/red] (expected one of {', '.join(valid)})")
        raise typer.Exit(1)

    stages = list(Stage) if stage == "all" else [Stage(stage)]
    pipeline = Pipeline(config, force=force)
    try:
        for current in stages:
            with Progress(
                SpinnerColumn(),
                TextColumn("[progress.description]{task.description}"),
                console=console,
            ) as progress:
                progress.add_task(f"Running {current.value}...", total=None)
                result = pipeline.run(current)
            if result.skipped:
                console.print(f"[dim]- {current.value}: up to date[/dim]")
            else:
                console.print(f"[green]✓ {current.value}:[/green] {result.message}")
    except RagforgeError as e:
        console.print(f"[red]✗ {e}[/red]")
        raise typer.Exit(1)


@app.command()
def report(
    workspace: Path = typer.Argument(..., help="Workspace directory"),
    k: Optional[int] = typer.Option(None, "--k", "-k", help="Only show tables for this k"),
    as_json: bool = typer.Option(False, "--json", help="Print report.json instead of tables"),
):
    """Show the evaluation report of a workspace."""
    path = Workspace(workspace).report_json
    try:
        if not path.exists():
            raise ArtifactMissingError(Stage.EVALUATE.value, path)
        data = read_json(path)
        metric_report = MetricReport.from_dict(data)
    except (RagforgeError, ValueError) as e:
        console.print(f"[red]{e}[/red]")
        raise typer.Exit(1)

    if as_json:
        console.print_json(json.dumps(data))
        return
    if k is not None and k not in metric_report.k_values:
        console.print(f"[red]k={k} not in report (k values: {metric_report.k_values})[/red]")
        raise typer.Exit(1)
    render_report(metric_report, console, k)


@app.command()
def retrieve(
    cell: str = typer.Option("all", "--config", help="Configuration cell (e.g. semantic+prefix_fusion) or all"),
    k: int = typer.Option(10, "--k", "-k", help="Results per query"),
    queries_path: Optional[Path] = typer.Option(None, "--queries", "-q", help="Queries JSONL (default: workspace queries)"),
    workspace: Optional[Path] = typer.Option(None, "--workspace", "-w", help="Workspace directory"),
    config_path: Optional[Path] = typer.Option(None, "--config-file", help="Pipeline config file path"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write results JSONL here"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
):
    """Run queries against built indexes."""
    config = _load_config(config_path)
    setup_logging(verbose, config.general.log_level)
    if workspace:
        config.general.workspace_dir = str(workspace.expanduser().resolve())

    configs = all_configs(k)
    if cell != "all":
        configs = [c for c in configs if c.cell == cell]
        if not configs:
            console.print(f"[red]Unknown configuration: {cell}[/red]")
            raise typer.Exit(1)

    pipeline = Pipeline(config)
    try:
        queries = load_queries(queries_path or pipeline.workspace.queries)
        results = run_matrix(
            queries,
            pipeline.load_indexes(),
            pipeline.embedder,
            pipeline.load_tfidf_models(),
            configs=configs,
            parallelism=config.general.parallelism,
            allow_subset=True,
        )
    except RagforgeError as e:
        console.print(f"[red]{e}[/red]")
        raise typer.Exit(1)

    texts = {query.query_id: query.text for query in queries}
    for result in results:
        table = Table(title=f"{result.config}: {texts[result.query_id]}")
        table.add_column("Rank", style="cyan", justify="right")
        table.add_column("Chunk", style="cyan")
        table.add_column("Score", style="green", justify="right")
        for hit in result.hits:
            table.add_row(str(hit.rank), hit.chunk_id, f"{hit.score:.4f}")
        console.print(table)

    if output:
        count = save_results(output, results)
        console.print(f"\n[green]✓ Wrote {count} results to {output}[/green]")


@app.command()
def fixture(
    directory: Path = typer.Argument(..., help="Directory to write the synthetic corpus into"),
):
    """Write the bundled synthetic corpus, queries and a mock config."""
    summary = write_fixture(directory)
    console.print(f"[green]✓ {summary.documents} documents, {summary.queries} queries in {summary.root}[/green]")
    console.print(f"Run it with: [cyan]ragforge run all --config {summary.config_path}[/cyan]")


@app.command()
def config(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Config file path"),
):
    """Show the resolved configuration (secrets masked)."""
    if config_path:
        _load_config(config_path)
    cfg = get_config()

    console.print(Panel.fit("[bold]ragforge Configuration[/bold]"))
    console.print(f"\nWorkspace: {cfg.get_workspace_dir()}")
    console.print("\nSources:")
    for source in cfg.corpus.sources:
        path = cfg.resolve_path(source.path)
        exists = "✓" if path.exists() else "✗"
        console.print(f"  [{exists}] {source.source_tag}: {path}")
    console.print_json(json.dumps(cfg.masked_dump()))


if __name__ == "__main__":
    app()
