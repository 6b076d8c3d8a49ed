"""Bibliographic coupling networks and topic-granularity analysis."""

__version__ = "0.1.0"

from .records import (  # noqa: F401
    AuthorKey,
    CorpusError,
    CorpusSummary,
    IngestResult,
    PublicationRecord,
    UnusableNameError,
    authorship_map,
    export_corpus,
    fold_diacritics,
    ingest_corpus,
    normalize_author,
    summarize,
    unique_authors,
)
from .linkage import (  # noqa: F401
    CalibrationError,
    CalibrationReport,
    ParsedReference,
    SourceCluster,
    calibrate_threshold,
    jaro_similarity,
    jaro_winkler,
    merge_references,
    parse_corpus_references,
    reference_sets,
    split_reference,
)
from .networks import (  # noqa: F401
    CouplingNetwork,
    NetworkError,
    NetworkStats,
    TokenStats,
    bm25_directed,
    build_network,
    build_reference_network,
    build_text_network,
    build_token_stats,
    compute_idf,
    idf_value,
    network_stats,
    reference_coupling_weight,
    symmetrize,
    tokenize,
)
from .connectivity import (  # noqa: F401
    ConnectivityCurve,
    Topic,
    TopicReport,
    connected_components,
    connectivity_curve,
    extract_topics,
    filter_edges,
    quantile_threshold_grid,
    reference_threshold_grid,
    topic_report,
)
from .removal import (  # noqa: F401
    CitationNetwork,
    RemovalCurve,
    build_citation_network,
    removal_experiment,
    removal_order_targeted,
)
from .synthesis import (  # noqa: F401
    GeneratedCorpus,
    GeneratorError,
    GeneratorSpec,
    generate,
    presets,
    star_core_corpus,
)
