"""Command-line interface: one subcommand per pipeline stage.

Configuration flags are generated from the option registry and sit on the
group, before the subcommand:

    stressorlens --config run.ini --lda-seed 7 train

Each command prints a single machine-parseable key=value summary line.
Exit codes: 2 when a prerequisite artifact is missing, 1 on computation
or configuration errors.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import click

from . import pipeline
from .config import OPTION_SPECS, PipelineConfig, load_config
from .errors import MissingArtifactError, StressorlensError
from .snapshots import SnapshotStore

_FLAG_PARAMS = {
    spec.flag.lstrip("-").replace("-", "_"): spec for spec in OPTION_SPECS
}


@dataclass
class CliContext:
    cfg: PipelineConfig
    store: SnapshotStore


def format_summary(summary: dict) -> str:
    parts = []
    for key, value in summary.items():
        text = str(value)
        if text == "" or any(c in text for c in (" ", '"', "=")):
            text = '"' + text.replace('"', '\\"') + '"'
        parts.append(f"{key}={text}")
    return " ".join(parts)


def _config_flags(fn):
    for spec in reversed(OPTION_SPECS):
        fn = click.option(
            spec.flag,
            default=None,
            metavar="VALUE",
            help=f"[{spec.section}] {spec.key}: {spec.help}",
        )(fn)
    return fn


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="INI configuration file")
@_config_flags
@click.pass_context
def main(ctx, config_path, **flags):
    """Topic-trend analysis pipeline for a support-forum corpus."""
    overrides = {}
    for param, value in flags.items():
        if value is not None:
            spec = _FLAG_PARAMS[param]
            overrides[(spec.section, spec.key)] = value
    try:
        cfg = load_config(config_path, overrides=overrides)
    except StressorlensError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    ctx.obj = CliContext(cfg=cfg, store=SnapshotStore(cfg.run_dir))


def _run(ctx, fn, *args, **kwargs):
    obj: CliContext = ctx.obj
    try:
        result = fn(obj.cfg, obj.store, *args, **kwargs)
    except MissingArtifactError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (StressorlensError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(format_summary(result.summary))
    return result


@main.command()
@click.pass_context
def ingest(ctx):
    """Read the raw corpus, clean it, and open a new snapshot chain."""
    _run(ctx, pipeline.run_ingest)


@main.command()
@click.pass_context
def train(ctx):
    """Fit the vocabulary, TF-IDF features, and topic model."""
    _run(ctx, pipeline.run_train)


@main.command("impute-flairs")
@click.pass_context
def impute_flairs(ctx):
    """Train the flair classifier and label every unlabelled post."""
    _run(ctx, pipeline.run_impute)


@main.command()
@click.pass_context
def subset(ctx):
    """Keep only the mental-health-support posts for analysis."""
    _run(ctx, pipeline.run_subset)


@main.command("lexicon-label")
@click.pass_context
def lexicon_label(ctx):
    """Annotate analysis posts with lexicon topics."""
    _run(ctx, pipeline.run_lexicon_label)


@main.command()
@click.pass_context
def trends(ctx):
    """Aggregate monthly topic series and cross-method correlations."""
    _run(ctx, pipeline.run_trends)


@main.command()
@click.pass_context
def correlate(ctx):
    """Print the cross-method Pearson r for the configured topic pairs."""
    _run(ctx, pipeline.run_correlate)


@main.command()
@click.option("--topic", type=int, required=True, help="topic index")
@click.option("--seed", type=int, default=0, show_default=True,
              help="seed for the random picks")
@click.pass_context
def samples(ctx, topic, seed):
    """Show 3 top-ranked plus 3 random review posts for a topic."""
    _run(ctx, pipeline.run_samples, topic, seed)


@main.command("export-dashboard")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="output directory (default <run_dir>/exports)")
@click.pass_context
def export_dashboard(ctx, out_dir):
    """Write the CSV bundle and dashboard.json for the web UI."""
    _run(ctx, pipeline.run_export_dashboard, out_dir)


@main.command()
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="directory of built web UI assets to serve at /")
@click.pass_context
def serve(ctx, static_dir):
    """Run the curation and dashboard HTTP service."""
    import uvicorn

    from .service import create_app

    obj: CliContext = ctx.obj
    try:
        app = create_app(obj.cfg, obj.store, static_dir=static_dir)
    except MissingArtifactError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(format_summary({
        "stage": "serve",
        "host": obj.cfg.host,
        "port": obj.cfg.port,
        "snapshot": app.state.current_snapshot_id,
    }))
    uvicorn.run(app, host=obj.cfg.host, port=obj.cfg.port, log_level="warning")


if __name__ == "__main__":
    main()
