"""Regenerate the bundled case-study journal deterministically.

Builds the session through the public engine API with a fixed clock, writes
src/ehazop/data/ari-case-study.journal, and prints the resulting totals.
Run from the repo root:

    python3 tools/make_fixture.py
"""

from __future__ import annotations

import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from ehazop.engine import Session  # noqa: E402
from ehazop.storage import JournalWriter, load_study, read_journal  # noqa: E402

DATA = REPO / "src" / "ehazop" / "data"
JOURNAL = DATA / "ari-case-study.journal"

BASE = datetime(2024, 5, 14, 9, 0, 0, tzinfo=timezone.utc)
STEP = timedelta(seconds=90)


def fixed_clock():
    tick = -1

    def clock() -> str:
        nonlocal tick
        tick += 1
        return (BASE + tick * STEP).strftime("%Y-%m-%dT%H:%M:%SZ")

    return clock


def build() -> None:
    study = load_study(DATA / "ari.study")
    if JOURNAL.exists():
        JOURNAL.unlink()
    writer = JournalWriter.create(JOURNAL, study)
    s = Session.start(study, clock=fixed_clock(), sink=writer.append)

    # Soc1 under MORE: four direct effects, then three knock-on ones.
    s.open_cell("MORE/Soc1")
    s.record_finding(
        "MORE/Soc1",
        "Lack of privacy",
        scenario="Constant camera monitoring means the user is watched far more than they assume.",
        notes="The user's privacy is compromised by Ari's monitoring",
        classification="SIMPLE",
    )
    s.record_finding(
        "MORE/Soc1",
        "Lack of informed consent",
        scenario="Monitoring was agreed at setup long ago; the user no longer remembers agreeing.",
        notes="The user did not consent to monitoring by Ari, or has forgotten this",
        classification="SIMPLE",
    )
    s.record_finding(
        "MORE/Soc1",
        "Loss of human autonomy",
        scenario="Because Ari always offers to place the call, the user never practises doing it alone.",
        notes="The user loses ability to set up or initiate video calls autonomously",
        classification="SIMPLE",
    )
    s.record_finding(
        "MORE/Soc1",
        "Loss of human control",
        scenario="Frequent call offers break the user's concentration during other activities.",
        notes="The user temporarily loses ability to concentrate or focus due to repeated interruptions",
        classification="SIMPLE",
    )
    s.record_finding(
        "MORE/Soc1",
        "Dehumanisation",
        scenario="Repeated prompts about their expression teach the user to treat it as a defect.",
        notes="The user begins to consider their own facial expressions problematic",
        classification="COMPLEX",
    )
    s.record_finding(
        "MORE/Soc1",
        "Robot addiction",
        scenario="The easy, always-available robot contact crowds out harder human contact.",
        notes="The user begins to prefer interacting with Ari to other people, as a result of these interruptions",
        classification="COMPLEX",
    )
    s.register_hazard(
        "erosion of confidence",
        "Prompting the user into doubting their own read of their feelings",
    )
    s.record_finding(
        "MORE/Soc1",
        "Erosion of confidence",
        scenario="Ari's loneliness prompts make the user second-guess whether they really feel fine.",
        notes="The user begins to question their own desires and feelings based on Ari's prompts",
        classification="COMPLEX",
    )
    s.mark_cell("MORE/Soc1", "EXPLORED")

    s.open_cell("MORE/Soc1/autonomy")
    s.record_finding(
        "MORE/Soc1/autonomy",
        "Deception",
        scenario="With more initiative than expected, Ari appears to watch and act even when idle.",
        notes="The user believes Ari is monitoring them when it is not",
    )
    s.mark_cell("MORE/Soc1/autonomy", "EXPLORED")

    # Everything raised here repeated earlier findings, so the cell closes empty.
    s.open_cell("LESS/Soc1/autonomy")
    s.add_note(
        "Hazards raised for this cell repeated F01-F07; none recorded separately.",
        cell_id="LESS/Soc1/autonomy",
    )
    s.mark_cell("LESS/Soc1/autonomy", "EXPLORED")

    s.open_cell("OPPOSITE/Soc1")
    s.record_finding(
        "OPPOSITE/Soc1",
        "Loss of trust",
        scenario="A mistimed call offer reads as manipulation and sours trust in every function.",
        notes="The user no longer trusts Ari for this or other functions.",
    )
    s.record_finding(
        "OPPOSITE/Soc1",
        "Lack of respect for cultural diversity and pluralism",
        scenario="Unprompted calls to relatives clash with norms the user's family holds about visits.",
        notes="The user's culture does not align with the social expectations Ari facilitates",
    )
    s.register_hazard(
        "lack of associative control",
        "The robot reshapes what the user links an activity with",
    )
    s.record_finding(
        "OPPOSITE/Soc1",
        "Lack of associative control",
        scenario="Socialising starts to feel like a robot-scheduled task rather than the user's own impulse.",
        notes="The user's mental associations with socialising alter as a result of the Ari interactions",
    )
    s.mark_cell("OPPOSITE/Soc1", "EXPLORED")

    # Coa1 discussion ran free-flowing across two guidewords.
    s.open_cell("MORE/Coa1")
    s.record_finding(
        "MORE/Coa1",
        "Lack of privacy",
        scenario="Movement tracking runs continuously, beyond the exercise sessions the user pictured.",
        notes="The user's privacy is compromised by Ari's monitoring of movement",
        classification="SIMPLE",
    )
    s.record_finding(
        "MORE/Coa1",
        "Lack of informed consent",
        scenario="The user understood coaching as on-request, not standing surveillance of inactivity.",
        notes="The user did not consent to monitoring of movement by Ari, or has forgotten this",
        classification="SIMPLE",
    )
    s.record_finding(
        "MORE/Coa1",
        "Loss of human autonomy",
        scenario="The user stops noticing stiffness themselves and waits for Ari to call it.",
        notes="The user loses ability to recognise body cues for exercise, or to perform these without coaching",
        classification="SIMPLE",
    )
    s.record_finding(
        "MORE/Coa1",
        "Loss of human control",
        scenario="Exercise prompts arrive mid-task and derail what the user was doing.",
        notes="The user loses ability to concentrate or focus due to repeated interruptions",
        classification="SIMPLE",
    )
    s.open_cell("OPPOSITE/Coa1")
    s.record_finding(
        "OPPOSITE/Coa1",
        "Lack of respect for cultural diversity and pluralism",
        scenario="The routine assumes floor exercises the user's habits and dress make awkward.",
        notes="The user's culture does not align with the values around movement that Ari facilitates",
    )
    s.record_finding(
        "MORE/Coa1",
        "Inappropriate trust (deception)",
        scenario="Coaching success leads the user to take Ari's word on symptoms it cannot assess.",
        notes="The user begins to trust Ari to facilitate wider medical activities",
    )
    s.add_note(
        "Part of the group would have logged this simply as deception; submitted wording kept.",
        finding_id="F17",
    )
    s.record_finding(
        "MORE/Coa1",
        "Dehumanisation",
        scenario="The user defers to the coaching voice as if it outranked their own judgement.",
        notes="The user begins to see Ari as an authority figure",
    )
    s.mark_cell("MORE/Coa1", "EXPLORED")
    s.mark_cell("OPPOSITE/Coa1", "EXPLORED")

    # Physical design considered generically, against every function.
    s.open_cell("MORE/*/physical_design")
    s.record_finding(
        "MORE/*/physical_design",
        "Dehumanisation",
        scenario="At full height the robot reads as a figure to obey, not a tool.",
        notes="The user begins to see Ari as an authority figure due to its physical size",
    )
    s.open_cell("LESS/*/physical_design")
    s.record_finding(
        "LESS/*/physical_design",
        "Deception",
        scenario="A small, toy-like build invites the user to dismiss its medication reminders.",
        notes="The user does not engage seriously with Ari due to its physical size",
    )
    s.open_cell("OPPOSITE/*/physical_design")
    s.record_finding(
        "OPPOSITE/*/physical_design",
        "Deception",
        scenario="A sleek industrial build suggests skills Ari does not have.",
        notes="The user expects Ari to possess different capability",
        distinct_presentation=True,
    )
    s.link_findings("F21", "F20", "PRESENTS_AS", note="Same hazard name, different presentation of the robot")
    s.link_findings("F17", "F18", "LEADS_TO")
    s.link_findings("F07", "F17", "RELATED")
    s.link_findings("F19", "F18", "RELATED")
    s.mark_cell("MORE/*/physical_design", "EXPLORED")
    s.mark_cell("LESS/*/physical_design", "EXPLORED")
    s.mark_cell("OPPOSITE/*/physical_design", "EXPLORED")

    writer.close()

    data = read_journal(JOURNAL)
    replayed = Session.replay(data.study, data.events)
    findings = replayed.findings()
    novel = [f for f in findings if f.is_novel]
    coverage = replayed.coverage()
    by_group = {}
    for f in findings:
        by_group[f.subject.group_key] = by_group.get(f.subject.group_key, 0) + 1
    print(f"events={len(data.events)} findings={len(findings)} novel={len(novel)}")
    print(f"per-group: {by_group}")
    print(f"explored={coverage.totals['EXPLORED']}/{coverage.cell_count}"
          f" ({100 * coverage.explored_fraction:.1f}%)")


if __name__ == "__main__":
    build()
