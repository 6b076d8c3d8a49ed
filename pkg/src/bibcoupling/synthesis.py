"""Synthetic specialism corpora with planted topic structure.

The generator realizes the rural/urban dichotomy as a planted partition: a
rural corpus has many small topics with few authors and sparse coauthorship,
an urban corpus few large topics with many authors, at equal total size. Each
topic owns a private reference pool and vocabulary; an optional shared core
pool and shared vocabulary create cross-topic structure. Everything flows
from the single seed, so equal specs produce byte-identical corpora.

This is validation scaffolding: it makes no attempt to model any real
specialism, only to give downstream measurements structure they must recover.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field, replace

from .records import PublicationRecord


class GeneratorError(ValueError):
    """Invalid generator specification or an infeasible draw."""


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of one synthetic specialism."""

    n_topics: int
    pubs_per_topic: int
    refs_per_pub: int
    topic_pool_size: int
    shared_core_size: int = 0
    p_core: float = 0.0
    authors_per_topic: int = 10
    coauthors_mean: float = 2.0
    coauthors_max: int = 6
    author_mobility: float = 0.0
    vocab_per_topic: int = 150
    shared_vocab: int = 0
    p_shared_vocab: float = 0.0
    title_len: tuple[int, int] = (6, 12)
    abstract_len: tuple[int, int] = (60, 120)
    page_len: tuple[int, int] = (8, 24)
    seed: int = 0

    def validate(self) -> None:
        if self.n_topics < 1 or self.pubs_per_topic < 1:
            raise GeneratorError("need at least one topic and one publication per topic")
        if self.refs_per_pub < 0 or self.topic_pool_size < 0:
            raise GeneratorError("reference counts cannot be negative")
        for name in ("p_core", "author_mobility", "p_shared_vocab"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise GeneratorError(f"{name} must lie in [0, 1]: {value}")
        if self.p_core == 0.0 and self.topic_pool_size < self.refs_per_pub:
            raise GeneratorError("topic pool smaller than refs_per_pub with p_core = 0")
        if self.p_core > 0.0 and self.shared_core_size == 0:
            raise GeneratorError("p_core > 0 requires a non-empty shared core pool")
        if self.authors_per_topic < 1:
            raise GeneratorError("need at least one author per topic")
        if self.coauthors_mean < 1.0 or self.coauthors_max < 1:
            raise GeneratorError("coauthor distribution must allow at least one author")
        for name in ("title_len", "abstract_len", "page_len"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise GeneratorError(f"{name} must be a non-empty range: ({lo}, {hi})")

    @property
    def n_publications(self) -> int:
        return self.n_topics * self.pubs_per_topic

    def to_json_dict(self) -> dict:
        data = asdict(self)
        for name in ("title_len", "abstract_len", "page_len"):
            data[name] = list(data[name])
        return data

    @staticmethod
    def from_dict(data: dict) -> "GeneratorSpec":
        kwargs = dict(data)
        for name in ("title_len", "abstract_len", "page_len"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return GeneratorSpec(**kwargs)


@dataclass
class GeneratedCorpus:
    records: list[PublicationRecord]
    topic_labels: dict[str, int] = field(default_factory=dict)


def _reference_string(prefix: str, topic: int | None, number: int) -> str:
    """A reference string the splitter can parse: author block, then rest."""
    if topic is None:
        surname = f"Coreauthor{number:03d}"
        rest = f"Shared source {number} cited across the field, (1985) Core Journal"
    else:
        surname = f"{prefix}{topic:02d}x{number:03d}"
        rest = f"Source {number} of topic {topic}, (199{number % 10}) Journal of Topic {topic}"
    return f"{surname} A.B., {rest}"


def _truncated_geometric(rng: random.Random, mean: float, cap: int) -> int:
    """Geometric count with the given untruncated mean, clamped to [1, cap]."""
    if mean <= 1.0:
        return 1
    success = 1.0 / mean
    count = 1
    while count < cap and rng.random() >= success:
        count += 1
    return count


def generate(spec: GeneratorSpec) -> GeneratedCorpus:
    """Generate one corpus plus its ground-truth topic labels."""
    spec.validate()
    rng = random.Random(spec.seed)

    topic_refs = [
        [_reference_string("Refauthor", t, m) for m in range(spec.topic_pool_size)]
        for t in range(spec.n_topics)
    ]
    core_refs = [_reference_string("", None, m) for m in range(spec.shared_core_size)]
    topic_vocab = [
        [f"t{t:02d}w{m:03d}" for m in range(spec.vocab_per_topic)]
        for t in range(spec.n_topics)
    ]
    shared_vocab = [f"sharedw{m:03d}" for m in range(spec.shared_vocab)]
    author_names = [
        [f"Scholar{t:02d}n{j:03d}, A." for j in range(spec.authors_per_topic)]
        for t in range(spec.n_topics)
    ]

    def draw_references(topic: int) -> tuple[str, ...]:
        chosen: list[str] = []
        taken: set[str] = set()
        for _ in range(spec.refs_per_pub):
            from_core = spec.p_core > 0.0 and rng.random() < spec.p_core
            pool = core_refs if from_core else topic_refs[topic]
            available = [ref for ref in pool if ref not in taken]
            if not available:
                where = "shared core" if from_core else f"topic {topic}"
                raise GeneratorError(
                    f"infeasible draw: {where} pool exhausted before "
                    f"{spec.refs_per_pub} references were drawn")
            pick = available[rng.randrange(len(available))]
            chosen.append(pick)
            taken.add(pick)
        return tuple(chosen)

    def draw_authors(topic: int) -> tuple[str, ...]:
        count = _truncated_geometric(rng, spec.coauthors_mean, spec.coauthors_max)
        picked: list[str] = []
        taken: set[str] = set()
        attempts = 0
        while len(picked) < count and attempts < count * 30:
            attempts += 1
            home = topic
            if spec.n_topics > 1 and rng.random() < spec.author_mobility:
                offset = rng.randrange(spec.n_topics - 1)
                home = (topic + 1 + offset) % spec.n_topics
            name = author_names[home][rng.randrange(spec.authors_per_topic)]
            if name not in taken:
                taken.add(name)
                picked.append(name)
        return tuple(picked)

    def draw_text(topic: int, length: int) -> str:
        words = []
        for _ in range(length):
            if shared_vocab and rng.random() < spec.p_shared_vocab:
                words.append(shared_vocab[rng.randrange(len(shared_vocab))])
            else:
                words.append(topic_vocab[topic][rng.randrange(spec.vocab_per_topic)])
        return " ".join(words)

    records: list[PublicationRecord] = []
    labels: dict[str, int] = {}
    for i in range(spec.n_publications):
        topic = i // spec.pubs_per_topic
        pub_id = f"P{i:05d}"
        title = draw_text(topic, rng.randint(*spec.title_len))
        abstract = draw_text(topic, rng.randint(*spec.abstract_len))
        records.append(PublicationRecord(
            pub_id=pub_id,
            venue=f"journal-{i % 3 + 1}",
            year=2011 + i % 5,
            title=title,
            abstract=abstract,
            page_count=rng.randint(*spec.page_len),
            authors=draw_authors(topic),
            raw_references=draw_references(topic),
        ))
        labels[pub_id] = topic
    return GeneratedCorpus(records=records, topic_labels=labels)


# Preset constants: equal totals (400 publications), identical per-pair
# reference and text statistics, so the only difference downstream is how
# many topics the corpus splits into and how many people work in each.
_PRESETS = {
    "rural": GeneratorSpec(
        n_topics=40,
        pubs_per_topic=10,
        refs_per_pub=20,
        topic_pool_size=80,
        authors_per_topic=12,
        coauthors_mean=1.2,
        coauthors_max=4,
        author_mobility=0.05,
        vocab_per_topic=200,
        shared_vocab=6,
        p_shared_vocab=0.25,
        title_len=(8, 14),
        abstract_len=(80, 150),
        page_len=(14, 30),
    ),
    "urban": GeneratorSpec(
        n_topics=4,
        pubs_per_topic=100,
        refs_per_pub=20,
        topic_pool_size=80,
        authors_per_topic=120,
        coauthors_mean=4.0,
        coauthors_max=10,
        author_mobility=0.05,
        vocab_per_topic=200,
        shared_vocab=6,
        p_shared_vocab=0.25,
        title_len=(6, 12),
        abstract_len=(60, 120),
        page_len=(6, 16),
    ),
}


def presets(name: str, seed: int = 0) -> GeneratorSpec:
    """The documented rural or urban parameterization with the given seed."""
    if name not in _PRESETS:
        raise GeneratorError(f"unknown preset: {name!r} (expected rural or urban)")
    return replace(_PRESETS[name], seed=seed)


def star_core_corpus(n_publications: int = 200, refs_per_pub: int = 10) -> GeneratedCorpus:
    """Extreme corpus for removal experiments: every publication cites one
    shared core source plus references private to it, so the coupling network
    is complete until the core source disappears and empty afterwards."""
    if n_publications < 2 or refs_per_pub < 2:
        raise GeneratorError("star-core corpus needs >= 2 publications and >= 2 references")
    core = _reference_string("", None, 0)
    records = []
    labels = {}
    for i in range(n_publications):
        pub_id = f"P{i:05d}"
        private = tuple(
            f"Soloauthor{i:04d}x{k:02d} A.B., Private source {k} of publication {i}, "
            f"(1992) Journal {i}"
            for k in range(refs_per_pub - 1)
        )
        records.append(PublicationRecord(
            pub_id=pub_id,
            venue="journal-1",
            year=2011 + i % 5,
            title=f"star corpus publication {i:05d}",
            abstract="",
            page_count=10,
            authors=(f"Scholar00n{i % 40:03d}, A.",),
            raw_references=(core,) + private,
        ))
        labels[pub_id] = 0
    return GeneratedCorpus(records=records, topic_labels=labels)
