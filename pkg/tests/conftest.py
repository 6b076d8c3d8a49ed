from __future__ import annotations

import json
from pathlib import Path

import pytest

from bibcoupling import PublicationRecord, ingest_corpus

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def corpus50() -> list[PublicationRecord]:
    result = ingest_corpus(DATA_DIR / "corpus50.jsonl", "jsonl")
    assert not result.diagnostics
    return result.records


@pytest.fixture(scope="session")
def variants_corpus() -> list[PublicationRecord]:
    result = ingest_corpus(DATA_DIR / "variants_corpus.jsonl", "jsonl")
    assert not result.diagnostics
    return result.records


@pytest.fixture(scope="session")
def variants_groups() -> dict[str, int]:
    return json.loads((DATA_DIR / "variants_groups.json").read_text(encoding="utf-8"))


def make_record(pub_id: str, refs=(), authors=(), year=2012, title="a title",
                abstract="", pages=10, venue="Journal") -> PublicationRecord:
    return PublicationRecord(
        pub_id=pub_id,
        venue=venue,
        year=year,
        title=title,
        abstract=abstract,
        page_count=pages,
        authors=tuple(authors),
        raw_references=tuple(refs),
    )
