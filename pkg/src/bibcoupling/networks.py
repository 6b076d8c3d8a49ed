"""Weighted bibliographic coupling networks over a publication corpus.

Two flavours: reference overlap (cosine similarity of the unique cited-source
sets) and textual similarity (BM25 over title+abstract, symmetrized by
averaging the two directed scores). Zero-similarity pairs get no edge, so an
isolated node is simply a degree-0 node.

Construction is exhaustive over unordered pairs; the bulk paths run as sparse
matrix products which is plenty at the few-thousand-node scale this targets.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse

from . import graphs
from .records import PublicationRecord

BM25_K1 = 2.0
BM25_B = 0.75

NETWORK_KINDS = ("reference", "text")


class NetworkError(ValueError):
    """Invalid network construction request (bad kind, empty year window)."""


@dataclass(frozen=True)
class CouplingNetwork:
    """Undirected weighted graph over publications; at most one edge per
    unordered pair, all weights strictly positive."""

    kind: str
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    year_window: tuple[int, int]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def node_index(self) -> dict[str, int]:
        return {pub: i for i, pub in enumerate(self.nodes)}

    def indexed_edges(self) -> list[tuple[int, int, float]]:
        index = self.node_index()
        return [(index[u], index[v], w) for u, v, w in self.edges]


def reference_coupling_weight(refs_i: frozenset | set, refs_j: frozenset | set) -> float:
    """Cosine similarity of two unique cited-source sets:
    |intersection| / (sqrt(|refs_i|) * sqrt(|refs_j|)).

    Computed as shared / sqrt(|refs_i| * |refs_j|) so identical sets score
    exactly 1.0 (the set sizes are integers, so the product under the root
    is exact, unlike the product of two rounded roots).
    """
    if not refs_i or not refs_j:
        raise ValueError("reference coupling requires non-empty reference sets")
    shared = len(refs_i & refs_j)
    return shared / math.sqrt(len(refs_i) * len(refs_j))


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip non-alphanumeric characters and
    drop tokens of at most one character. Order and multiplicity preserved."""
    tokens = []
    for chunk in text.lower().split():
        token = "".join(ch for ch in chunk if ch.isalnum())
        if len(token) > 1:
            tokens.append(token)
    return tokens


@dataclass(frozen=True)
class TokenStats:
    """Corpus-level token statistics for BM25.

    Document lengths count only tokens whose IDF is not negative: a clipped
    token contributes nothing to any score, including length normalization,
    so dropping it from every document changes nothing.
    """

    n_docs: int
    doc_freq: dict[str, int]
    idf: dict[str, float]
    doc_lengths: dict[str, int]
    avg_doc_length: float


def idf_value(n_docs: int, doc_freq: int) -> float | None:
    """Natural-log IDF: ln((N - p + 0.5) / (p + 0.5)); None (excluded) when
    strictly below zero, which filters very common tokens."""
    value = math.log((n_docs - doc_freq + 0.5) / (doc_freq + 0.5))
    if value < 0.0:
        return None
    return value


def compute_idf(stats: "TokenStats", token: str) -> float | None:
    """IDF of a vocabulary token, None when excluded (strictly below zero)."""
    if token not in stats.doc_freq:
        raise KeyError(f"token not in the corpus vocabulary: {token!r}")
    return idf_value(stats.n_docs, stats.doc_freq[token])


def build_token_stats(corpus: Sequence[PublicationRecord]) -> TokenStats:
    token_lists = {rec.pub_id: tokenize(rec.text) for rec in corpus}
    doc_freq: dict[str, int] = {}
    for tokens in token_lists.values():
        for token in set(tokens):
            doc_freq[token] = doc_freq.get(token, 0) + 1
    n_docs = len(corpus)
    idf = {}
    for token, freq in doc_freq.items():
        value = idf_value(n_docs, freq)
        if value is not None:
            idf[token] = value
    doc_lengths = {
        pub: sum(1 for token in tokens if token in idf)
        for pub, tokens in token_lists.items()
    }
    avg = sum(doc_lengths.values()) / n_docs if n_docs else 0.0
    return TokenStats(
        n_docs=n_docs,
        doc_freq=doc_freq,
        idf=idf,
        doc_lengths=doc_lengths,
        avg_doc_length=avg,
    )


def bm25_directed(doc_i: PublicationRecord, doc_j: PublicationRecord,
                  stats: TokenStats, k1: float = BM25_K1, b: float = BM25_B) -> float:
    """Directed BM25 similarity: sum over the unique tokens of doc_i of
    IDF * tf_j*(k1+1) / (tf_j + k1*(1 - b + b*len_j/avg_len))."""
    tokens_j: dict[str, int] = {}
    for token in tokenize(doc_j.text):
        if token in stats.idf:
            tokens_j[token] = tokens_j.get(token, 0) + 1
    if not tokens_j:
        return 0.0
    length_norm = k1 * (1.0 - b + b * stats.doc_lengths[doc_j.pub_id] / stats.avg_doc_length)
    score = 0.0
    for token in set(tokenize(doc_i.text)):
        idf = stats.idf.get(token)
        if idf is None:
            continue
        tf = tokens_j.get(token, 0)
        if tf == 0:
            continue
        score += idf * tf * (k1 + 1.0) / (tf + length_norm)
    return score


def symmetrize(s_ij: float, s_ji: float) -> float:
    """Symmetric similarity: the mean of the two directed scores. No further
    normalization is applied."""
    return (s_ij + s_ji) / 2.0


def _window_filter(corpus: Sequence[PublicationRecord],
                   year_window: tuple[int, int]) -> list[PublicationRecord]:
    start, end = year_window
    if start > end:
        raise NetworkError(f"empty year window: {start}:{end}")
    selected = [rec for rec in corpus if start <= rec.year <= end]
    if not selected:
        raise NetworkError(f"no publications in year window {start}:{end}")
    return selected


def build_reference_network(
    corpus: Sequence[PublicationRecord],
    reference_sets: Mapping[str, frozenset[str]],
    year_window: tuple[int, int],
) -> CouplingNetwork:
    """Reference-overlap coupling over all publications in the window.
    Publications with no linked references stay as isolated nodes."""
    selected = _window_filter(corpus, year_window)
    nodes = tuple(sorted(rec.pub_id for rec in selected))
    cited = [reference_sets.get(pub, frozenset()) for pub in nodes]

    cluster_index: dict[str, int] = {}
    rows: list[int] = []
    cols: list[int] = []
    for i, refs in enumerate(cited):
        for cluster in refs:
            rows.append(i)
            cols.append(cluster_index.setdefault(cluster, len(cluster_index)))
    edges: list[tuple[str, str, float]] = []
    if cluster_index:
        incidence = sparse.csr_matrix(
            (np.ones(len(rows)), (rows, cols)),
            shape=(len(nodes), len(cluster_index)),
        )
        overlap = sparse.triu(incidence @ incidence.T, k=1).tocoo()
        sizes = np.array([len(refs) if refs else 1 for refs in cited], dtype=np.int64)
        weights = overlap.data / np.sqrt(sizes[overlap.row] * sizes[overlap.col])
        for i, j, w in zip(overlap.row, overlap.col, weights):
            edges.append((nodes[i], nodes[j], float(w)))
    edges.sort()
    return CouplingNetwork(
        kind="reference",
        nodes=nodes,
        edges=tuple(edges),
        year_window=year_window,
    )


def build_text_network(
    corpus: Sequence[PublicationRecord],
    year_window: tuple[int, int],
    k1: float = BM25_K1,
    b: float = BM25_B,
) -> CouplingNetwork:
    """Symmetrized BM25 coupling; token statistics are computed over exactly
    the publications inside the window."""
    selected = _window_filter(corpus, year_window)
    by_id = {rec.pub_id: rec for rec in selected}
    nodes = tuple(sorted(by_id))
    stats = build_token_stats([by_id[pub] for pub in nodes])

    vocab = {token: z for z, token in enumerate(sorted(stats.idf))}
    n = len(nodes)
    presence_rows: list[int] = []
    presence_cols: list[int] = []
    weight_rows: list[int] = []
    weight_cols: list[int] = []
    weight_vals: list[float] = []
    for j, pub in enumerate(nodes):
        counts: dict[str, int] = {}
        for token in tokenize(by_id[pub].text):
            if token in vocab:
                counts[token] = counts.get(token, 0) + 1
        length_norm = k1 * (1.0 - b + b * stats.doc_lengths[pub] / stats.avg_doc_length) \
            if stats.avg_doc_length else k1 * (1.0 - b)
        for token, tf in counts.items():
            z = vocab[token]
            presence_rows.append(j)
            presence_cols.append(z)
            weight_rows.append(j)
            weight_cols.append(z)
            weight_vals.append(stats.idf[token] * tf * (k1 + 1.0) / (tf + length_norm))

    edges: list[tuple[str, str, float]] = []
    if vocab:
        presence = sparse.csr_matrix(
            (np.ones(len(presence_rows)), (presence_rows, presence_cols)),
            shape=(n, len(vocab)),
        )
        weights = sparse.csr_matrix(
            (weight_vals, (weight_rows, weight_cols)),
            shape=(n, len(vocab)),
        )
        directed = presence @ weights.T  # directed[i, j] = s(i, j)
        symmetric = (directed + directed.T) * 0.5
        upper = sparse.triu(symmetric, k=1).tocoo()
        for i, j, w in zip(upper.row, upper.col, upper.data):
            if w > 0.0:
                edges.append((nodes[i], nodes[j], float(w)))
    edges.sort()
    return CouplingNetwork(
        kind="text",
        nodes=nodes,
        edges=tuple(edges),
        year_window=year_window,
    )


def build_network(
    corpus: Sequence[PublicationRecord],
    kind: str,
    year_window: tuple[int, int],
    reference_sets: Mapping[str, frozenset[str]] | None = None,
    k1: float = BM25_K1,
    b: float = BM25_B,
) -> CouplingNetwork:
    """Dispatch on network kind; reference networks need the linkage output."""
    if kind == "reference":
        if reference_sets is None:
            raise NetworkError("reference networks require linkage reference sets")
        return build_reference_network(corpus, reference_sets, year_window)
    if kind == "text":
        return build_text_network(corpus, year_window, k1=k1, b=b)
    raise NetworkError(f"unknown network kind: {kind!r}")


@dataclass(frozen=True)
class NetworkStats:
    """Whole-network statistics: density, giant-component diameter, global
    (binary) clustering and greedy modularity."""

    n_nodes: int
    n_isolated: int
    n_edges: int
    density: float
    diameter: int
    global_clustering: float
    modularity: float

    def to_json_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "n_isolated": self.n_isolated,
            "n_edges": self.n_edges,
            "density": self.density,
            "diameter": self.diameter,
            "global_clustering": self.global_clustering,
            "modularity": self.modularity,
        }


def network_stats(net: CouplingNetwork) -> NetworkStats:
    if net.n_nodes == 0:
        raise NetworkError("cannot compute statistics of an empty network")
    n = net.n_nodes
    indexed = net.indexed_edges()
    pairs = [(u, v) for u, v, _ in indexed]
    degree = [0] * n
    for u, v in pairs:
        degree[u] += 1
        degree[v] += 1
    n_isolated = sum(1 for d in degree if d == 0)
    density = 2.0 * len(pairs) / (n * (n - 1)) if n > 1 else 0.0

    comps = graphs.components(n, pairs)
    giant = max(comps, key=len)
    if len(giant) > 1:
        relabel = {node: i for i, node in enumerate(giant)}
        giant_nodes = set(giant)
        giant_edges = [(relabel[u], relabel[v]) for u, v in pairs
                       if u in giant_nodes and v in giant_nodes]
        diam = graphs.diameter(len(giant), giant_edges)
    else:
        diam = 0

    clustering = graphs.global_clustering(n, pairs)
    _, trace = graphs.greedy_modularity(n, indexed)
    return NetworkStats(
        n_nodes=n,
        n_isolated=n_isolated,
        n_edges=len(pairs),
        density=density,
        diameter=diam,
        global_clustering=clustering,
        modularity=trace[-1] + 0.0,
    )


def write_network(net: CouplingNetwork, csv_path: str | Path,
                  sidecar_path: str | Path) -> None:
    """Edge list CSV (src,dst,weight) plus a JSON sidecar with the node set,
    so isolated nodes survive the round trip."""
    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["src", "dst", "weight"])
        for u, v, w in net.edges:
            writer.writerow([u, v, repr(w)])
    sidecar = {
        "kind": net.kind,
        "year_window": list(net.year_window),
        "n_nodes": net.n_nodes,
        "node_ids": list(net.nodes),
    }
    with open(sidecar_path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(sidecar, handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def read_network(csv_path: str | Path, sidecar_path: str | Path) -> CouplingNetwork:
    with open(sidecar_path, encoding="utf-8") as handle:
        sidecar = json.load(handle)
    edges = []
    with open(csv_path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["src", "dst", "weight"]:
            raise NetworkError(f"unexpected edge list header: {header}")
        for row in reader:
            edges.append((row[0], row[1], float(row[2])))
    return CouplingNetwork(
        kind=sidecar["kind"],
        nodes=tuple(sidecar["node_ids"]),
        edges=tuple(edges),
        year_window=(int(sidecar["year_window"][0]), int(sidecar["year_window"][1])),
    )
