"""Random-but-valid command sequences for property tests.

drive() issues randomly chosen commands against a live session. Candidates the
engine rejects are part of the point: a rejected command must not append an
event, which drive() asserts after every attempt. The accepted events are the
sequence under test. fingerprint() is cheap enough to capture after every
event, so replays can be compared prefix by prefix without deep snapshots.
"""

from __future__ import annotations

import random
import zlib

from ehazop.engine import MARKABLE_STATUSES, Session, dedup_key
from ehazop.errors import EhazopError
from ehazop.model import (
    Characteristic,
    CharacteristicKind,
    EnumerationConfig,
    FunctionClass,
    FunctionSpec,
    SystemModel,
)
from ehazop.storage import StudyDocument, event_to_line, journal_header_line
from ehazop.taxonomy import BASE_CATALOG_NAMES

CONFIG_FIELDS = (
    "include_single_functions",
    "include_function_pairs",
    "include_function_characteristic",
    "include_generic_characteristic",
)

CLASSIFICATIONS = ("SIMPLE", "COMPLEX", "UNCLASSIFIED")
RELATIONS = ("REINFORCES", "LEADS_TO", "PRESENTS_AS", "RELATED")


def config_from_mask(mask: int) -> EnumerationConfig:
    """Mask bit i turns on CONFIG_FIELDS[i]; mask 0 is invalid by design."""
    return EnumerationConfig(
        **{name: bool(mask & (1 << i)) for i, name in enumerate(CONFIG_FIELDS)}
    )


def random_model(rng: random.Random, max_functions: int = 6, max_characteristics: int = 4) -> SystemModel:
    n_f = rng.randint(1, max_functions)
    n_c = rng.randint(0, max_characteristics)
    functions = tuple(
        FunctionSpec(f"Fn{i}", rng.choice(tuple(FunctionClass)), f"function {i} behaviour")
        for i in range(1, n_f + 1)
    )
    characteristics = tuple(
        Characteristic(f"char{i}", rng.choice(tuple(CharacteristicKind)), f"characteristic {i}")
        for i in range(1, n_c + 1)
    )
    return SystemModel(
        name=f"M{rng.randrange(10_000)}", functions=functions, characteristics=characteristics
    )


def random_study(rng: random.Random, max_functions: int = 4, max_characteristics: int = 2) -> StudyDocument:
    # single functions stay on so the examination space is never empty
    model = random_model(rng, max_functions, max_characteristics)
    config = EnumerationConfig(
        include_single_functions=True,
        include_function_pairs=rng.random() < 0.3,
        include_function_characteristic=rng.random() < 0.7,
        include_generic_characteristic=rng.random() < 0.7,
    )
    return StudyDocument(system=model, enumeration_config=config)


def fingerprint(session: Session) -> tuple:
    """Cheap state image: counts plus a crc over the per-cell status map."""
    statuses = session._statuses
    status_crc = zlib.crc32("".join(st.value[0] for st in statuses.values()).encode())
    findings = session.findings()
    return (
        session.last_seq(),
        len(findings),
        findings[-1].id if findings else "",
        len(session.links()),
        len(session.notes()),
        len(session.taxonomy.entries),
        session.closed,
        status_crc,
    )


def _hazard_candidate(session: Session, rng: random.Random) -> str:
    roll = rng.random()
    if roll < 0.55:
        name = rng.choice(BASE_CATALOG_NAMES)
        if rng.random() < 0.2:
            name = name.upper()
        if rng.random() < 0.1:
            name = f"  {name} *"
        return name
    registered = session.taxonomy.session_registered()
    if registered and roll < 0.85:
        return rng.choice(registered).canonical_name
    return f"made-up hazard {rng.randint(1, 12)}"


def drive(session: Session, rng: random.Random, max_events: int, collect=None) -> Session:
    cell_ids = [cell.id for cell in session.cells]
    attempts = 0
    while session.last_seq() < max_events and attempts < max_events * 4 and not session.closed:
        attempts += 1
        before = session.last_seq()
        roll = rng.random()
        try:
            if roll < 0.16:
                session.open_cell(rng.choice(cell_ids))
            elif roll < 0.55:
                session.record_finding(
                    rng.choice(cell_ids),
                    _hazard_candidate(session, rng),
                    scenario=f"scenario {attempts}",
                    notes=f"note {attempts}" if rng.random() < 0.5 else "",
                    classification=rng.choice(CLASSIFICATIONS),
                    distinct_presentation=rng.random() < 0.12,
                )
            elif roll < 0.64:
                session.register_hazard(
                    f"made-up hazard {rng.randint(1, 12)}", "raised in the room"
                )
            elif roll < 0.78:
                session.mark_cell(rng.choice(cell_ids), rng.choice(MARKABLE_STATUSES))
            elif roll < 0.87:
                findings = session.findings()
                if len(findings) >= 2:
                    a, b = rng.sample(range(len(findings)), 2)
                    session.link_findings(
                        findings[a].id, findings[b].id, rng.choice(RELATIONS)
                    )
            elif roll < 0.97:
                findings = session.findings()
                target = rng.random()
                session.add_note(
                    f"free note {attempts}",
                    finding_id=rng.choice(findings).id if findings and target < 0.4 else None,
                    cell_id=rng.choice(cell_ids) if target > 0.7 else None,
                )
            elif rng.random() < 0.25:
                session.close()
        except EhazopError:
            assert session.last_seq() == before, "rejected command appended an event"
            continue
        if collect is not None and session.last_seq() > before:
            collect(session)
    return session


def fold_with_fingerprints(study: StudyDocument, events) -> tuple[Session, list]:
    """Replay's own fold, one event at a time, fingerprinting after each."""
    session = Session(study)
    prints = []
    for event in events:
        session._apply(event)
        prints.append(fingerprint(session))
    return session, prints


def journal_text(study: StudyDocument, events) -> str:
    """Byte-equal to what JournalWriter produces for the same study and events."""
    lines = [journal_header_line(study)]
    lines.extend(event_to_line(event) for event in events)
    return "\n".join(lines) + "\n"


def assert_dedup_invariant(session: Session) -> None:
    seen: dict = {}
    for finding in session.findings():
        if finding.distinct_presentation:
            continue
        key = dedup_key(finding.subject, finding.hazard)
        assert key not in seen, f"{finding.id} and {seen[key]} share dedup key {key}"
        seen[key] = finding.id
