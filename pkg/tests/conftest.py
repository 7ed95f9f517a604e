import shutil
from pathlib import Path

import pytest

import ehazop
from ehazop.engine import Session
from ehazop.storage import load_study, read_journal

DATA_DIR = Path(ehazop.__file__).parent / "data"
GOLDEN_DIR = DATA_DIR / "golden"


@pytest.fixture(scope="session")
def ari_study():
    return load_study(DATA_DIR / "ari.study")


@pytest.fixture(scope="session")
def bundled_journal_path():
    return DATA_DIR / "ari-case-study.journal"


@pytest.fixture
def fixture_journal(tmp_path, bundled_journal_path):
    # a private copy: some tests append to it or tamper with it
    dest = tmp_path / "case.journal"
    shutil.copy(bundled_journal_path, dest)
    return dest


@pytest.fixture
def replayed(bundled_journal_path):
    data = read_journal(bundled_journal_path)
    return Session.replay(data.study, data.events)


def golden_text(name: str) -> str:
    return (GOLDEN_DIR / name).read_text(encoding="utf-8")
