"""Deduplication of raw reference strings into cited-source clusters.

Two references point at the same source when (1) their first-author surnames
match exactly, (2) their author blocks have Jaro-Winkler similarity >= 0.9,
and (3) the remaining reference text has Jaro-Winkler similarity strictly
above a per-corpus threshold. Matching pairs are chained into clusters by
transitive closure; condition (1) doubles as the blocking key, so the
quadratic comparison only runs within same-surname blocks.

The author/rest split is a heuristic grammar for surname-first reference
styles ("Kessler M.M., Bibliographic coupling ..."); misparses are tolerated
because the downstream matching is fuzzy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .records import AuthorKey, PublicationRecord, fold_diacritics


class CalibrationError(ValueError):
    """No threshold satisfies the calibration conditions."""

    def __init__(self, message: str, best: "CalibrationReport | None" = None):
        super().__init__(message)
        self.best = best


def jaro_similarity(a: str, b: str) -> float:
    """Jaro similarity: match window floor(max len / 2) - 1, transpositions
    counted as half the mismatched matched positions (rounded down)."""
    if a == b:
        return 1.0
    len_a, len_b = len(a), len(b)
    if len_a == 0 or len_b == 0:
        return 0.0
    window = max(max(len_a, len_b) // 2 - 1, 0)
    matched_a = [False] * len_a
    matched_b = [False] * len_b
    matches = 0
    for i, ch in enumerate(a):
        start = max(0, i - window)
        end = min(i + window + 1, len_b)
        for j in range(start, end):
            if matched_b[j] or b[j] != ch:
                continue
            matched_a[i] = True
            matched_b[j] = True
            matches += 1
            break
    if matches == 0:
        return 0.0
    mismatches = 0
    k = 0
    for i in range(len_a):
        if not matched_a[i]:
            continue
        while not matched_b[k]:
            k += 1
        if a[i] != b[k]:
            mismatches += 1
        k += 1
    transpositions = mismatches // 2
    return (matches / len_a + matches / len_b
            + (matches - transpositions) / matches) / 3.0


def jaro_winkler(a: str, b: str, prefix_weight: float = 0.1) -> float:
    """Jaro similarity boosted by the common prefix (capped at 4 characters):
    JW = J + L * p * (1 - J). Symmetric, in [0, 1], equal to 1 iff a == b."""
    jaro = jaro_similarity(a, b)
    prefix = 0
    for ch_a, ch_b in zip(a[:4], b[:4]):
        if ch_a != ch_b:
            break
        prefix += 1
    return jaro + prefix * prefix_weight * (1.0 - jaro)


@dataclass(frozen=True)
class ParsedReference:
    """A raw reference split into its author block and the remaining text."""

    ref_id: str
    owner_pub: str
    author_block: str
    author_keys: tuple[AuthorKey, ...]
    rest: str

    @property
    def first_surname(self) -> str:
        return self.author_keys[0].surname


# Lowercase connectives allowed inside multi-word surnames.
_PARTICLES = {
    "van", "von", "de", "der", "den", "del", "della", "da", "di", "dos", "du",
    "la", "le", "el", "al", "bin", "ibn", "ter", "ten", "op", "d", "mac", "mc",
    "st", "y", "e",
}

_SEPARATOR_RE = re.compile(r"\s*(?:,|;|&|\band\b)\s*")
_SURNAME_TOKEN_RE = re.compile(r"[^\W\d_][\w'’\-]*", re.UNICODE)


def _initials_letters(token: str) -> str | None:
    """Letters of an initials token like "M.M.", "J.-L." or "M"; None if the
    token is not an initials token."""
    letters = [ch for ch in token if ch.isalpha()]
    if not letters or len(letters) > 4:
        return None
    if not all(ch.isupper() for ch in letters):
        return None
    if len(letters) > 1 and not ("." in token or "-" in token):
        return None
    if any(ch not in ".-’'" and not ch.isalpha() for ch in token):
        return None
    return "".join(letters)


def _parse_name_segment(segment: str) -> AuthorKey | None:
    """Match "Surname [Particle Surname ...] I.I." and build its key."""
    tokens = segment.split()
    if len(tokens) < 2:
        return None
    initials_tokens: list[str] = []
    idx = len(tokens)
    while idx > 1:
        letters = _initials_letters(tokens[idx - 1])
        if letters is None:
            break
        initials_tokens.append(letters)
        idx -= 1
    if not initials_tokens:
        return None
    surname_tokens = tokens[:idx]
    if not surname_tokens:
        return None
    # Every surname token must carry an uppercase letter or be a particle,
    # and at least one must be capitalized; this keeps lowercase title
    # words ("structure of ...") from being absorbed as author names.
    any_capitalised = False
    for tok in surname_tokens:
        if not _SURNAME_TOKEN_RE.fullmatch(tok):
            return None
        if any(ch.isupper() for ch in tok):
            any_capitalised = True
        elif tok.lower() not in _PARTICLES:
            return None
    if not any_capitalised:
        return None
    surname = fold_diacritics(" ".join(surname_tokens)).lower()
    initials = fold_diacritics("".join(reversed(initials_tokens))).lower()
    return AuthorKey(surname=surname, initials=initials)


def split_reference(raw: str, ref_id: str = "", owner_pub: str = "") -> ParsedReference | None:
    """Split a raw reference into author block and rest; None when no leading
    author pattern is found (the reference is discarded)."""
    if not raw:
        raise ValueError("split_reference requires a non-empty string")
    keys: list[AuthorKey] = []
    cursor = 0
    block_end = 0
    while cursor < len(raw):
        match = _SEPARATOR_RE.search(raw, cursor)
        seg_end = match.start() if match else len(raw)
        segment = raw[cursor:seg_end].strip()
        key = _parse_name_segment(segment) if segment else None
        if key is None:
            break
        keys.append(key)
        block_end = seg_end
        cursor = match.end() if match else len(raw)
    if not keys:
        return None
    author_block = raw[:block_end].strip()
    rest = raw[block_end:].strip(" \t,;&").strip()
    if rest.startswith("and "):  # residue of a name-list separator, not a title word
        rest = rest[4:].strip()
    return ParsedReference(
        ref_id=ref_id,
        owner_pub=owner_pub,
        author_block=author_block,
        author_keys=tuple(keys),
        rest=rest,
    )


def parse_corpus_references(
    corpus: Sequence[PublicationRecord],
) -> tuple[list[ParsedReference], int]:
    """Parse every raw reference of the corpus; returns (parsed, discarded)."""
    parsed: list[ParsedReference] = []
    discarded = 0
    for rec in corpus:
        for i, raw in enumerate(rec.raw_references):
            if not raw.strip():
                discarded += 1
                continue
            ref = split_reference(raw, ref_id=f"{rec.pub_id}:r{i}", owner_pub=rec.pub_id)
            if ref is None:
                discarded += 1
            else:
                parsed.append(ref)
    return parsed, discarded


@dataclass(frozen=True)
class SourceCluster:
    """A deduplicated cited source: member references and distinct citers."""

    cluster_id: str
    members: frozenset[str]
    citation_count: int


AUTHOR_BLOCK_THRESHOLD = 0.9


def merge_references(refs: Sequence[ParsedReference],
                     rest_threshold: float) -> list[SourceCluster]:
    """Cluster references by the three-condition match: exact first-author
    surname, author-block JW >= 0.9, rest JW strictly above rest_threshold.
    Clusters are the connected components of the match relation."""
    if not 0.0 < rest_threshold < 1.0:
        raise ValueError(f"rest_threshold must lie in (0, 1): {rest_threshold}")
    parent = list(range(len(refs)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            if rj < ri:
                ri, rj = rj, ri
            parent[rj] = ri

    blocks: dict[str, list[int]] = {}
    for idx, ref in enumerate(refs):
        blocks.setdefault(ref.first_surname, []).append(idx)
    for indices in blocks.values():
        for pos, i in enumerate(indices):
            ref_i = refs[i]
            block_i = ref_i.author_block.casefold()
            rest_i = ref_i.rest.casefold()
            for j in indices[pos + 1:]:
                ref_j = refs[j]
                if jaro_winkler(block_i, ref_j.author_block.casefold()) < AUTHOR_BLOCK_THRESHOLD:
                    continue
                if jaro_winkler(rest_i, ref_j.rest.casefold()) > rest_threshold:
                    union(i, j)

    groups: dict[int, list[int]] = {}
    for idx in range(len(refs)):
        groups.setdefault(find(idx), []).append(idx)
    ordered = sorted(groups.values(), key=lambda g: min(refs[i].ref_id for i in g))
    clusters = []
    for number, group in enumerate(ordered):
        members = frozenset(refs[i].ref_id for i in group)
        citers = {refs[i].owner_pub for i in group}
        clusters.append(SourceCluster(
            cluster_id=f"c{number:06d}",
            members=members,
            citation_count=len(citers),
        ))
    return clusters


def reference_sets(refs: Sequence[ParsedReference],
                   clusters: Sequence[SourceCluster]) -> dict[str, frozenset[str]]:
    """pub_id -> set of cited cluster ids (unique sources, not mentions)."""
    owner = {ref.ref_id: ref.owner_pub for ref in refs}
    by_pub: dict[str, set[str]] = {}
    for cluster in clusters:
        for ref_id in cluster.members:
            by_pub.setdefault(owner[ref_id], set()).add(cluster.cluster_id)
    return {pub: frozenset(ids) for pub, ids in by_pub.items()}


@dataclass(frozen=True)
class CalibrationReport:
    """Calibrated rest-text threshold with the window accuracies around it."""

    threshold: float
    accuracy_above: float
    accuracy_below: float
    n_above: int
    n_below: int
    truncated_window: bool

    def to_json_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "accuracy_above": self.accuracy_above,
            "accuracy_below": self.accuracy_below,
            "n_above": self.n_above,
            "n_below": self.n_below,
            "truncated_window": self.truncated_window,
        }


WINDOW = 100


def calibrate_threshold(
    candidate_pairs: Sequence[tuple[tuple[str, str], float]],
    labels: Mapping[tuple[str, str], bool],
) -> CalibrationReport:
    """Pick the rest-text threshold from human-labeled candidate pairs.

    For a candidate cut t, the "above" window holds the up-to-100 labeled
    pairs with scores strictly greater than t nearest to it (these would be
    merged), the "below" window the up-to-100 pairs with scores <= t. A cut
    is viable when above-accuracy > 0.5 and below-accuracy < 0.5; among
    viable cuts the one separating the windows best (largest accuracy gap)
    wins, ties going to the smallest threshold. Candidate cuts are the
    distinct observed scores.
    """
    if len(candidate_pairs) < 2 * WINDOW:
        raise ValueError(f"calibration needs at least {2 * WINDOW} labeled pairs, "
                         f"got {len(candidate_pairs)}")
    scores = [score for _, score in candidate_pairs]
    if any(scores[i] < scores[i + 1] for i in range(len(scores) - 1)):
        raise ValueError("candidate pairs must be sorted by score descending")

    def label_of(pair: tuple[str, str]) -> bool:
        if pair in labels:
            return labels[pair]
        swapped = (pair[1], pair[0])
        if swapped in labels:
            return labels[swapped]
        raise ValueError(f"missing label for pair {pair!r}")

    flags = [label_of(pair) for pair, _ in candidate_pairs]
    n = len(flags)

    def accuracy(lo: int, hi: int) -> float:
        span = flags[lo:hi]
        return sum(span) / len(span)

    best: CalibrationReport | None = None
    fallback: CalibrationReport | None = None
    fallback_gap = float("-inf")
    # candidate_pairs are descending, so for a cut at score s the pairs
    # strictly above sit before the first index with score <= s.
    idx = 0
    while idx < n:
        # idx is the first occurrence of this score value: everything before
        # it is strictly above the cut, everything from it on is at or below.
        cut = scores[idx]
        last_at_cut = idx
        while last_at_cut + 1 < n and scores[last_at_cut + 1] == cut:
            last_at_cut += 1
        above_lo = max(0, idx - WINDOW)
        below_hi = min(n, idx + WINDOW)
        n_above = idx - above_lo
        n_below = below_hi - idx
        if n_above and n_below:
            acc_above = accuracy(above_lo, idx)
            acc_below = accuracy(idx, below_hi)
            report = CalibrationReport(
                threshold=cut,
                accuracy_above=acc_above,
                accuracy_below=acc_below,
                n_above=n_above,
                n_below=n_below,
                truncated_window=n_above < WINDOW or n_below < WINDOW,
            )
            gap = acc_above - acc_below
            viable = acc_above > 0.5 and acc_below < 0.5
            if viable and (best is None or gap > best.accuracy_above - best.accuracy_below
                           or (gap == best.accuracy_above - best.accuracy_below
                               and cut < best.threshold)):
                best = report
            if gap > fallback_gap:
                fallback_gap = gap
                fallback = report
        idx = last_at_cut + 1
    if best is None:
        raise CalibrationError("no threshold separates the labeled pairs", best=fallback)
    return best


def write_clusters_jsonl(clusters: Iterable[SourceCluster], path) -> None:
    import json

    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for cluster in clusters:
            handle.write(json.dumps({
                "cluster_id": cluster.cluster_id,
                "members": sorted(cluster.members),
                "citation_count": cluster.citation_count,
            }, ensure_ascii=False))
            handle.write("\n")


def read_clusters_jsonl(path) -> list[SourceCluster]:
    import json

    clusters = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            row = json.loads(line)
            clusters.append(SourceCluster(
                cluster_id=row["cluster_id"],
                members=frozenset(row["members"]),
                citation_count=int(row["citation_count"]),
            ))
    return clusters
