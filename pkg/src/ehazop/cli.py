"""Headless entry points.

Exit codes: 0 success, 1 validation failure, 2 corrupt input, 3 I/O trouble.
All outputs are byte-identical across runs on identical inputs; nothing here
prints timestamps or colors.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .engine import Session
from .errors import (
    ArgumentError,
    CorruptJournalError,
    DigestMismatchError,
    JournalLockedError,
    ModelValidationError,
    ParseError,
    UnknownReferenceError,
    UnsupportedVersionError,
)
from .model import EnumerationConfig, enumerate_cells
from .prompts import default_catalog, generate_prompt
from .reporting import REPORT_FORMATS, render_report
from .storage import load_study, read_journal

EXIT_VALIDATION = 1
EXIT_CORRUPT = 2
EXIT_IO = 3


def _cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ModelValidationError, ArgumentError, UnknownReferenceError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except (ParseError, UnsupportedVersionError, CorruptJournalError, DigestMismatchError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CORRUPT)
        except JournalLockedError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


@click.group()
def main():
    """Guideword-driven ethical hazard analysis for assistive robots."""


@main.command()
@click.argument("study_file", type=click.Path())
@_cli_errors
def validate(study_file):
    """Check a study file; exit 0 and print OK when it is valid."""
    try:
        load_study(study_file)
    except ModelValidationError as exc:
        for violation in exc.violations:
            click.echo(str(violation), err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo("OK")


@main.command()
@click.argument("study_file", type=click.Path())
@click.option("--pairs", is_flag=True, help="Also enumerate function pairs.")
@click.option(
    "--characteristics/--no-characteristics",
    default=True,
    help="Include characteristic-bearing subjects.",
)
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON array instead of lines.")
@_cli_errors
def cells(study_file, pairs, characteristics, as_json):
    """Enumerate examination cells with their what-if prompts."""
    doc = load_study(study_file)
    base = doc.enumeration_config
    config = EnumerationConfig(
        include_single_functions=base.include_single_functions,
        include_function_pairs=True if pairs else base.include_function_pairs,
        include_function_characteristic=base.include_function_characteristic and characteristics,
        include_generic_characteristic=base.include_generic_characteristic and characteristics,
    )
    catalog = default_catalog()
    enumerated = enumerate_cells(doc.system, config)
    if as_json:
        items = [
            {
                "id": cell.id,
                "guideword": cell.guideword.value,
                "subject": cell.subject.key,
                "prompt": generate_prompt(cell, doc.system, catalog),
            }
            for cell in enumerated
        ]
        click.echo(json.dumps(items, indent=2, ensure_ascii=False))
        return
    for cell in enumerated:
        click.echo(f"{cell.id}\t{generate_prompt(cell, doc.system, catalog)}")


@main.command()
@click.argument("journal_file", type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Emit the summary as JSON.")
@_cli_errors
def replay(journal_file, as_json):
    """Fold a journal and print its headline totals."""
    data = read_journal(journal_file)
    session = Session.replay(data.study, data.events)
    findings = session.findings()
    novel = sum(1 for f in findings if f.is_novel)
    percent = 100 * session.coverage().explored_fraction
    if as_json:
        click.echo(
            json.dumps(
                {
                    "findings": len(findings),
                    "novel": novel,
                    "coverage_percent": round(percent, 1),
                },
                sort_keys=True,
            )
        )
        return
    click.echo(f"findings={len(findings)} novel={novel} coverage={percent:.1f}%")


@main.command()
@click.argument("journal_file", type=click.Path())
@click.option("--subject", default="all", show_default=True, help="Subject group key, or 'all'.")
@click.option("--format", "fmt", type=click.Choice(REPORT_FORMATS), default="csv", show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Write to a file instead of stdout.")
@_cli_errors
def report(journal_file, subject, fmt, out):
    """Render hazard tables from a journal."""
    data = read_journal(journal_file)
    session = Session.replay(data.study, data.events)
    text = render_report(session, subject, fmt)
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")


@main.command()
@click.argument("path", type=click.Path())
@click.option("--host", envvar="EHAZOP_HOST", default="127.0.0.1", show_default=True)
@click.option("--port", envvar="EHAZOP_PORT", default=8321, show_default=True, type=int)
@click.option(
    "--journal",
    "journal_out",
    type=click.Path(),
    default=None,
    help="When serving a .study, persist the new session's journal here.",
)
@_cli_errors
def serve(path, host, port, journal_out):
    """Serve the workshop API for a study or an existing journal."""
    import uvicorn

    from .service import create_app, preload

    app = create_app()
    info = preload(app, path, journal_path=journal_out)
    click.echo(
        f"session={info['session_id']} study={info['study_id'][:12]} cells={info['cell_count']}"
    )
    click.echo(f"listening on http://{host}:{port}/v1")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
