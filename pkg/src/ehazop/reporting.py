"""Render session state: hazard tables, summaries, traceability graphs.

Everything here is a pure function of a session snapshot, and every renderer
is byte-deterministic so outputs can be pinned as golden files. The delimited
table header is normative: ``Guide word,Ethical hazard,Notes``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import ArgumentError
from .engine import Finding, Session
from .model import GUIDEWORDS

CSV_HEADER = ("Guide word", "Ethical hazard", "Notes")

REPORT_FORMATS = ("csv", "txt", "md")


def characteristic_label(characteristic_id: str) -> str:
    return characteristic_id.replace("_", " ").capitalize()


def guideword_label(finding: Finding) -> str:
    """Table label for a finding's guideword.

    Function+characteristic cells render as e.g. "More + Autonomy"; generic
    characteristic cells keep the bare guideword, the characteristic being
    carried by the table's subject instead.
    """
    label = finding.guideword.display
    subject = finding.subject
    if subject.characteristic is not None and not subject.is_generic_characteristic:
        label = f"{label} + {characteristic_label(subject.characteristic)}"
    return label


def hazard_label(finding: Finding) -> str:
    """Surface form as submitted, starred iff the hazard is session-registered."""
    return finding.label + ("*" if finding.is_novel else "")


@dataclass(frozen=True)
class HazardTable:
    subject_label: str
    rows: tuple[tuple[str, str, str], ...]


def hazard_table(session: Session, subject_key: str) -> HazardTable:
    """One row per distinct finding on the subject group, in journal order."""
    findings = session.findings_for_subject(subject_key)
    rows = tuple((guideword_label(f), hazard_label(f), f.notes) for f in findings)
    return HazardTable(subject_label=subject_key, rows=rows)


def render_table_csv(table: HazardTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(table.rows)
    return out.getvalue()


def render_table_txt(table: HazardTable) -> str:
    headers = list(CSV_HEADER)
    widths = [len(h) for h in headers]
    for row in table.rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    def line(cells) -> str:
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()

    lines = [line(headers), line(["-" * w for w in widths])]
    lines.extend(line(row) for row in table.rows)
    return "\n".join(lines) + "\n"


def _md_escape(cell: str) -> str:
    return cell.replace("|", "\\|")


def render_table_md(table: HazardTable) -> str:
    lines = [
        "| " + " | ".join(CSV_HEADER) + " |",
        "| " + " | ".join("---" for _ in CSV_HEADER) + " |",
    ]
    for row in table.rows:
        lines.append("| " + " | ".join(_md_escape(cell) for cell in row) + " |")
    return "\n".join(lines) + "\n"


_TABLE_RENDERERS = {
    "csv": render_table_csv,
    "txt": render_table_txt,
    "md": render_table_md,
}


def render_table(table: HazardTable, fmt: str) -> str:
    try:
        renderer = _TABLE_RENDERERS[fmt]
    except KeyError:
        raise ArgumentError(
            f"unknown report format {fmt!r}; expected one of {', '.join(REPORT_FORMATS)}"
        ) from None
    return renderer(table)


def render_report(session: Session, subject_key: str, fmt: str) -> str:
    """CLI/service entry: one subject's table, or every populated subject.

    ``subject_key="all"`` renders each subject group that has findings, in
    enumeration order. The csv variant then grows a leading Subject column so
    the output stays machine-readable; txt and md emit one titled section per
    subject.
    """
    if fmt not in REPORT_FORMATS:
        raise ArgumentError(
            f"unknown report format {fmt!r}; expected one of {', '.join(REPORT_FORMATS)}"
        )
    if subject_key != "all":
        return render_table(hazard_table(session, subject_key), fmt)
    populated = [
        group for group in session.subject_groups() if session.findings_for_subject(group)
    ]
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("Subject",) + CSV_HEADER)
        for group in populated:
            for row in hazard_table(session, group).rows:
                writer.writerow((group,) + row)
        return out.getvalue()
    sections = []
    for group in populated:
        table = hazard_table(session, group)
        if fmt == "md":
            sections.append(f"## {group}\n\n" + render_table_md(table))
        else:
            sections.append(f"{group}\n\n" + render_table_txt(table))
    return "\n".join(sections)


def summary(session: Session) -> dict:
    """Headline numbers: totals, frequencies, link count, coverage fraction."""
    findings = session.findings()
    per_hazard: dict[str, int] = {}
    for f in findings:
        per_hazard[f.hazard] = per_hazard.get(f.hazard, 0) + 1
    per_guideword = {gw.value: 0 for gw in GUIDEWORDS}
    for f in findings:
        per_guideword[f.guideword.value] += 1
    coverage = session.coverage()
    return {
        "total_findings": len(findings),
        "novel_findings": sum(1 for f in findings if f.is_novel),
        "per_hazard": dict(sorted(per_hazard.items())),
        "per_guideword": per_guideword,
        "link_count": len(session.links()),
        "coverage": coverage.explored_fraction,
    }


def trace_graph(session: Session) -> dict:
    """Findings as nodes, links as edges; deterministic given the journal."""
    nodes = [
        {
            "id": f.id,
            "label": f"{f.id}: {hazard_label(f)} ({f.cell_id})",
            "hazard": hazard_label(f),
            "cell": f.cell_id,
        }
        for f in session.findings()
    ]
    edges = [
        {"from": l.from_id, "to": l.to_id, "relation": l.relation.value, "note": l.note}
        for l in session.links()
    ]
    return {"nodes": nodes, "edges": edges}


def render_graph_text(graph: dict) -> str:
    lines = []
    for node in graph["nodes"]:
        lines.append(f"node {node['id']} {node['hazard']!r} {node['cell']}")
    for edge in graph["edges"]:
        lines.append(f"edge {edge['from']} {edge['to']} {edge['relation']}")
    return "\n".join(lines) + ("\n" if lines else "")


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_graph_dot(graph: dict) -> str:
    lines = ["digraph trace {"]
    for node in graph["nodes"]:
        lines.append(f"  {_dot_quote(node['id'])} [label={_dot_quote(node['label'])}];")
    for edge in graph["edges"]:
        lines.append(
            f"  {_dot_quote(edge['from'])} -> {_dot_quote(edge['to'])} "
            f"[label={_dot_quote(edge['relation'])}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_appendix(session: Session) -> str:
    """Long-form markdown: scenario paragraphs, which the tables deliberately omit."""
    lines = ["# Findings appendix", ""]
    for f in session.findings():
        lines.append(f"## {f.id}: {hazard_label(f)}")
        lines.append("")
        lines.append(f"- Cell: `{f.cell_id}`")
        lines.append(f"- Classification: {f.classification.value}")
        if f.distinct_presentation:
            lines.append("- Distinct presentation of an already-recorded hazard")
        linked = session.links_for(f.id)
        if linked:
            rendered = ", ".join(
                f"{l.relation.value} {l.to_id if l.from_id == f.id else l.from_id}"
                for l in linked
            )
            lines.append(f"- Links: {rendered}")
        lines.append("")
        if f.scenario:
            lines.append(f.scenario)
            lines.append("")
        if f.notes:
            lines.append(f"Notes: {f.notes}")
            lines.append("")
    return "\n".join(lines)
