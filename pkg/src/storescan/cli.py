"""Command-line driver for corpus scans."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .detector import DetectorConfig
from .report import emit_report, scan_corpus
from .rules import RuleFormatError, default_ruleset, load_ruleset


@click.group()
@click.version_option(package_name="storescan")
def main():
    """Scan disassembled Android apps for app-private writes to shared storage."""


@main.command()
@click.argument(
    "corpus_root",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
)
@click.option("--depth", default=3, show_default=True, help="Call-chain depth bound.")
@click.option(
    "--rules",
    "rules_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Ruleset file overriding the built-in vocabularies.",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["json", "text"]),
    default="json",
    show_default=True,
    help="Report format.",
)
@click.option(
    "--output",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Write the report to a file instead of stdout.",
)
@click.option(
    "--fail-on-detect",
    is_flag=True,
    help="Exit with status 1 when at least one app is flagged.",
)
@click.option(
    "--dump-callgraph",
    is_flag=True,
    help="Dump each app's call graph to stderr as a sorted edge list.",
)
def scan(corpus_root, depth, rules_file, fmt, output, fail_on_detect, dump_callgraph):
    """Scan CORPUS_ROOT, one app per immediate subdirectory."""
    if depth < 1:
        raise click.BadParameter("must be >= 1", param_hint="'--depth'")
    try:
        rules = load_ruleset(rules_file) if rules_file else default_ruleset()
    except (RuleFormatError, OSError) as exc:
        click.echo(f"error: bad ruleset: {exc}", err=True)
        sys.exit(2)
    config = DetectorConfig(depth=depth, rules=rules)

    graph_sink = click.get_text_stream("stderr") if dump_callgraph else None
    try:
        report = scan_corpus(corpus_root, config, graph_sink=graph_sink)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    rendered = emit_report(report, fmt)
    if output is not None:
        output.write_text(rendered, encoding="utf-8")
    else:
        click.echo(rendered, nl=False)

    if fail_on_detect and report.totals.apps_flagged > 0:
        sys.exit(1)


if __name__ == "__main__":
    main()
