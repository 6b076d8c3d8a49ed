"""Corpus ingestion, author disambiguation and per-corpus summary statistics.

A corpus is a list of immutable :class:`PublicationRecord` objects read from
JSONL (canonical) or CSV (convenience). Authors are collapsed to
(surname, forename initials) keys; homonym collisions are accepted as a
low-probability event, so the unique-author count is a lower bound.
"""

from __future__ import annotations

import csv
import json
import statistics
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence


class CorpusError(ValueError):
    """Unrecoverable problem with a corpus file (bad format, duplicate ids)."""


class UnusableNameError(ValueError):
    """Raised for author names without any alphabetic character."""


@dataclass(frozen=True)
class PublicationRecord:
    """One article: metadata, title/abstract text and raw reference strings."""

    pub_id: str
    venue: str
    year: int
    title: str
    abstract: str = ""
    page_count: int | None = None
    authors: tuple[str, ...] = ()
    raw_references: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        """Concatenated title and abstract, the unit of textual similarity."""
        if self.abstract:
            return f"{self.title} {self.abstract}"
        return self.title


class AuthorKey(NamedTuple):
    """Disambiguation key: lowercased surname plus forename initials."""

    surname: str
    initials: str


# Explicit folds for letters NFKD cannot decompose to ASCII. Anything not
# covered here or by NFKD passes through lowercased.
_FOLD_SPECIALS = {
    "ß": "ss", "ẞ": "ss",
    "æ": "ae", "Æ": "ae",
    "œ": "oe", "Œ": "oe",
    "ø": "o", "Ø": "o",
    "đ": "d", "Đ": "d",
    "ð": "d", "Ð": "d",
    "þ": "th", "Þ": "th",
    "ł": "l", "Ł": "l",
    "ı": "i",
    "ŋ": "n", "Ŋ": "n",
}


def fold_diacritics(text: str) -> str:
    """Replace accented characters by their ASCII base form where one exists."""
    out: list[str] = []
    for ch in text:
        if ch in _FOLD_SPECIALS:
            out.append(_FOLD_SPECIALS[ch])
            continue
        decomposed = unicodedata.normalize("NFKD", ch)
        stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
        out.append(stripped if stripped else ch)
    return "".join(out)


def normalize_author(raw_name: str) -> AuthorKey:
    """Collapse a raw author name to an :class:`AuthorKey`.

    If the name contains a comma the surname is everything before the first
    comma, otherwise the last whitespace token. Initials are the first letter
    of every remaining forename token (periods split tokens, so "J.A." and
    "John A." agree). Everything is lowercased with diacritics folded.
    """
    if not raw_name or not raw_name.strip():
        raise UnusableNameError("empty author name")
    if not any(ch.isalpha() for ch in raw_name):
        raise UnusableNameError(f"author name without letters: {raw_name!r}")
    folded = fold_diacritics(raw_name).lower()
    if "," in folded:
        surname_part, _, forename_part = folded.partition(",")
        surname = " ".join(surname_part.split())
    else:
        tokens = folded.split()
        surname = tokens[-1]
        forename_part = " ".join(tokens[:-1])
    initials = []
    for token in forename_part.replace(".", " ").split():
        for ch in token:
            if ch.isalpha():
                initials.append(ch)
                break
    return AuthorKey(surname=surname, initials="".join(initials))


def unique_authors(corpus: Sequence[PublicationRecord]) -> dict[AuthorKey, set[str]]:
    """Map every usable author mention to its key; values are citing pub_ids."""
    index: dict[AuthorKey, set[str]] = {}
    for rec in corpus:
        for name in rec.authors:
            try:
                key = normalize_author(name)
            except UnusableNameError:
                continue
            index.setdefault(key, set()).add(rec.pub_id)
    return index


def author_mention_counts(corpus: Sequence[PublicationRecord]) -> tuple[int, int, int]:
    """Return (author mentions, unique author keys, unusable mentions)."""
    mentions = 0
    unusable = 0
    keys: set[AuthorKey] = set()
    for rec in corpus:
        for name in rec.authors:
            mentions += 1
            try:
                keys.add(normalize_author(name))
            except UnusableNameError:
                unusable += 1
    return mentions, len(keys), unusable


@dataclass(frozen=True)
class CorpusSummary:
    """Corpus-level statistics in the shape of the usual summary tables."""

    n_articles: int
    n_references: int
    mean_references: float
    median_references: float
    mean_authors: float
    median_authors: float
    mean_pages: float | None
    median_pages: float | None
    mean_references_per_page: float | None
    median_references_per_page: float | None
    articles_per_year: dict[int, int]
    n_author_mentions: int
    n_unique_authors: int
    n_unusable_author_names: int
    n_articles_without_pages: int

    def to_json_dict(self) -> dict:
        return {
            "n_articles": self.n_articles,
            "n_references": self.n_references,
            "mean_references": self.mean_references,
            "median_references": self.median_references,
            "mean_authors": self.mean_authors,
            "median_authors": self.median_authors,
            "mean_pages": self.mean_pages,
            "median_pages": self.median_pages,
            "mean_references_per_page": self.mean_references_per_page,
            "median_references_per_page": self.median_references_per_page,
            "articles_per_year": {str(y): n for y, n in sorted(self.articles_per_year.items())},
            "n_author_mentions": self.n_author_mentions,
            "n_unique_authors": self.n_unique_authors,
            "n_unusable_author_names": self.n_unusable_author_names,
            "n_articles_without_pages": self.n_articles_without_pages,
        }

    def to_table_rows(self) -> list[tuple[str, str]]:
        """Rows for the summary CSV: one statistic per row, M(m) style."""

        def mm(mean: float | None, med: float | None) -> str:
            if mean is None or med is None:
                return "-"
            return f"{mean:.6g}({med:.6g})"

        rows = [
            ("Number of articles", str(self.n_articles)),
            ("Number of references", str(self.n_references)),
            ("M(m) references per article", mm(self.mean_references, self.median_references)),
            ("M(m) authors per article", mm(self.mean_authors, self.median_authors)),
            ("M(m) pages per article", mm(self.mean_pages, self.median_pages)),
            ("M(m) references per page",
             mm(self.mean_references_per_page, self.median_references_per_page)),
            ("Number of author mentions", str(self.n_author_mentions)),
            ("Number of unique authors", str(self.n_unique_authors)),
        ]
        for year in sorted(self.articles_per_year, reverse=True):
            rows.append((f"Number of articles {year}", str(self.articles_per_year[year])))
        if self.n_articles_without_pages:
            rows.append(("Articles excluded from page statistics",
                         str(self.n_articles_without_pages)))
        return rows


def summarize(corpus: Sequence[PublicationRecord]) -> CorpusSummary:
    """Compute summary statistics; articles without a page count are excluded
    from the page-based statistics only (and reported)."""
    if not corpus:
        raise CorpusError("cannot summarize an empty corpus")
    ref_counts = [len(rec.raw_references) for rec in corpus]
    author_counts = [len(rec.authors) for rec in corpus]
    paged = [rec for rec in corpus if rec.page_count is not None]
    pages = [rec.page_count for rec in paged]
    refs_per_page = [len(rec.raw_references) / rec.page_count
                     for rec in paged if rec.page_count]
    per_year: dict[int, int] = {}
    for rec in corpus:
        per_year[rec.year] = per_year.get(rec.year, 0) + 1
    mentions, uniques, unusable = author_mention_counts(corpus)
    return CorpusSummary(
        n_articles=len(corpus),
        n_references=sum(ref_counts),
        mean_references=statistics.mean(ref_counts),
        median_references=statistics.median(ref_counts),
        mean_authors=statistics.mean(author_counts),
        median_authors=statistics.median(author_counts),
        mean_pages=statistics.mean(pages) if pages else None,
        median_pages=statistics.median(pages) if pages else None,
        mean_references_per_page=statistics.mean(refs_per_page) if refs_per_page else None,
        median_references_per_page=statistics.median(refs_per_page) if refs_per_page else None,
        articles_per_year=per_year,
        n_author_mentions=mentions,
        n_unique_authors=uniques,
        n_unusable_author_names=unusable,
        n_articles_without_pages=len(corpus) - len(paged),
    )


@dataclass(frozen=True)
class IngestDiagnostic:
    """A skipped input row: line number (1-based) and the reason."""

    line: int
    message: str


@dataclass
class IngestResult:
    records: list[PublicationRecord] = field(default_factory=list)
    diagnostics: list[IngestDiagnostic] = field(default_factory=list)


_FIELDS = ("pub_id", "venue", "year", "title", "abstract", "pages", "authors", "references")


def _record_from_row(row: dict, line: int, list_sep: str | None) -> PublicationRecord:
    pub_id = str(row.get("pub_id") or "").strip()
    title = str(row.get("title") or "").strip()
    if not pub_id:
        raise ValueError("missing pub_id")
    if not title:
        raise ValueError("missing title")
    year_raw = row.get("year")
    try:
        year = int(year_raw)
    except (TypeError, ValueError):
        raise ValueError(f"bad year: {year_raw!r}") from None
    pages_raw = row.get("pages")
    if pages_raw is None or pages_raw == "":
        pages = None
    else:
        try:
            pages = int(pages_raw)
        except (TypeError, ValueError):
            raise ValueError(f"bad pages: {pages_raw!r}") from None
        if pages < 0:
            raise ValueError(f"negative pages: {pages}")

    def as_list(value) -> tuple[str, ...]:
        if value is None or value == "":
            return ()
        if isinstance(value, str):
            assert list_sep is not None
            return tuple(part for part in value.split(list_sep) if part)
        return tuple(str(item) for item in value)

    return PublicationRecord(
        pub_id=pub_id,
        venue=str(row.get("venue") or ""),
        year=year,
        title=title,
        abstract=str(row.get("abstract") or ""),
        page_count=pages,
        authors=as_list(row.get("authors")),
        raw_references=as_list(row.get("references")),
    )


def ingest_corpus(path: str | Path, fmt: str = "jsonl") -> IngestResult:
    """Read a corpus file. Malformed rows are skipped with a diagnostic;
    a duplicate pub_id aborts with :class:`CorpusError`."""
    path = Path(path)
    if fmt not in ("jsonl", "csv"):
        raise CorpusError(f"unknown corpus format: {fmt!r}")
    if not path.is_file():
        raise CorpusError(f"corpus file not found: {path}")
    result = IngestResult()
    seen: set[str] = set()

    def add(row: dict, line: int, list_sep: str | None) -> None:
        try:
            rec = _record_from_row(row, line, list_sep)
        except ValueError as exc:
            result.diagnostics.append(IngestDiagnostic(line, str(exc)))
            return
        if rec.pub_id in seen:
            raise CorpusError(f"duplicate pub_id {rec.pub_id!r} at line {line}")
        seen.add(rec.pub_id)
        result.records.append(rec)

    if fmt == "jsonl":
        with path.open(encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    result.diagnostics.append(IngestDiagnostic(line_no, f"bad JSON: {exc}"))
                    continue
                if not isinstance(row, dict):
                    result.diagnostics.append(IngestDiagnostic(line_no, "row is not an object"))
                    continue
                add(row, line_no, None)
    else:
        with path.open(encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            for line_no, row in enumerate(reader, start=2):
                add(row, line_no, ";")
    return result


def export_corpus(records: Iterable[PublicationRecord], path: str | Path,
                  fmt: str = "jsonl") -> None:
    """Write records back out in the ingest schema (lossless round-trip)."""
    path = Path(path)
    if fmt == "jsonl":
        with path.open("w", encoding="utf-8", newline="\n") as handle:
            for rec in records:
                handle.write(json.dumps(_row_from_record(rec), ensure_ascii=False))
                handle.write("\n")
    elif fmt == "csv":
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(_FIELDS)
            for rec in records:
                row = _row_from_record(rec)
                writer.writerow([
                    row["pub_id"], row["venue"], row["year"], row["title"],
                    row["abstract"],
                    "" if row["pages"] is None else row["pages"],
                    ";".join(row["authors"]),
                    ";".join(row["references"]),
                ])
    else:
        raise CorpusError(f"unknown corpus format: {fmt!r}")


def _row_from_record(rec: PublicationRecord) -> dict:
    return {
        "pub_id": rec.pub_id,
        "venue": rec.venue,
        "year": rec.year,
        "title": rec.title,
        "abstract": rec.abstract,
        "pages": rec.page_count,
        "authors": list(rec.authors),
        "references": list(rec.raw_references),
    }


def authorship_map(corpus: Sequence[PublicationRecord]) -> dict[str, list[AuthorKey]]:
    """pub_id -> author keys, skipping unusable names. Used by topic reports."""
    mapping: dict[str, list[AuthorKey]] = {}
    for rec in corpus:
        keys: list[AuthorKey] = []
        for name in rec.authors:
            try:
                keys.append(normalize_author(name))
            except UnusableNameError:
                continue
        mapping[rec.pub_id] = keys
    return mapping
