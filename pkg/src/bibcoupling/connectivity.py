"""Threshold-connectivity analysis of coupling networks.

Removing every edge with weight strictly below a threshold t and counting
connected components gives two curves over t: c(t), the number of components
over the number of publications, and g(t), the share of publications in the
largest component. A topic at threshold t is a connected component with at
least two publications; its people count is the set of unique authors over
its member publications.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import graphs
from .networks import CouplingNetwork
from .records import AuthorKey

TOPIC_REPORT_THRESHOLDS = (0.1, 0.2, 0.3)


def reference_threshold_grid(step: float = 0.01, top: float = 0.50) -> tuple[float, ...]:
    """Default grid for reference networks: 0.00, 0.01, ..., 0.50."""
    count = int(round(top / step))
    return tuple(round(i * step, 10) for i in range(count + 1))


def quantile_threshold_grid(net: CouplingNetwork, k: int = 20) -> tuple[float, ...]:
    """Quantile grid for unnormalized (text) weights: 0 plus the i/k-quantiles
    of the positive-weight distribution, deduplicated, ascending."""
    if k < 1:
        raise ValueError("quantile grid needs k >= 1")
    weights = sorted(w for _, _, w in net.edges)
    if not weights:
        return (0.0,)
    grid = [0.0]
    for i in range(1, k + 1):
        position = (i * (len(weights) - 1)) // k
        grid.append(weights[position])
    return tuple(sorted(set(grid)))


def filter_edges(net: CouplingNetwork, threshold: float) -> CouplingNetwork:
    """Keep exactly the edges with weight >= threshold; nodes unchanged."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    return CouplingNetwork(
        kind=net.kind,
        nodes=net.nodes,
        edges=tuple(e for e in net.edges if e[2] >= threshold),
        year_window=net.year_window,
    )


def connected_components(net: CouplingNetwork) -> list[frozenset[str]]:
    """Maximal components (isolated nodes are singletons), ordered by their
    smallest pub_id."""
    index_components = graphs.components(
        net.n_nodes, [(u, v) for u, v, _ in net.indexed_edges()])
    return [frozenset(net.nodes[i] for i in group) for group in index_components]


@dataclass(frozen=True)
class ConnectivityCurve:
    """Sampled t-edge-connectivity series: c(t) = components/N non-decreasing,
    g(t) = giant/N non-increasing."""

    thresholds: tuple[float, ...]
    c: tuple[float, ...]
    g: tuple[float, ...]
    n_components: tuple[int, ...]
    giant_size: tuple[int, ...]
    n_nodes: int

    def rows(self) -> list[tuple[float, float, float, int, int]]:
        return [
            (t, self.c[i], self.g[i], self.n_components[i], self.giant_size[i])
            for i, t in enumerate(self.thresholds)
        ]


def connectivity_curve(net: CouplingNetwork,
                       thresholds: Sequence[float]) -> ConnectivityCurve:
    """Evaluate c(t)/g(t) at every threshold. Incremental: thresholds are
    processed from the top, adding edges as t decreases, which is equivalent
    to filtering per threshold because filtering only removes edges."""
    if any(thresholds[i] > thresholds[i + 1] for i in range(len(thresholds) - 1)):
        raise ValueError("thresholds must be ascending")
    if not thresholds:
        raise ValueError("at least one threshold is required")
    n = net.n_nodes
    edges = sorted(net.indexed_edges(), key=lambda e: (-e[2], e[0], e[1]))
    uf = graphs.UnionFind(n)
    counts: list[int] = []
    giants: list[int] = []
    cursor = 0
    for t in reversed(thresholds):
        while cursor < len(edges) and edges[cursor][2] >= t:
            uf.union(edges[cursor][0], edges[cursor][1])
            cursor += 1
        counts.append(uf.n_components)
        giants.append(uf.giant_size)
    counts.reverse()
    giants.reverse()
    return ConnectivityCurve(
        thresholds=tuple(thresholds),
        c=tuple(count / n for count in counts),
        g=tuple(giant / n for giant in giants),
        n_components=tuple(counts),
        giant_size=tuple(giants),
        n_nodes=n,
    )


@dataclass(frozen=True)
class Topic:
    """A connected component with >= 2 publications at a given threshold."""

    threshold: float
    member_pubs: frozenset[str]
    active_authors: frozenset[AuthorKey]

    @property
    def size(self) -> int:
        return len(self.member_pubs)

    @property
    def people_to_problem(self) -> int:
        return len(self.active_authors)


def extract_topics(net: CouplingNetwork, threshold: float,
                   authorship: Mapping[str, Sequence[AuthorKey]]) -> list[Topic]:
    """Topics of the t-filtered network; an author appears in every topic one
    of their publications belongs to."""
    if threshold <= 0:
        raise ValueError("topic extraction requires a positive threshold")
    filtered = filter_edges(net, threshold)
    topics = []
    for component in connected_components(filtered):
        if len(component) < 2:
            continue
        authors: set[AuthorKey] = set()
        for pub in component:
            authors.update(authorship.get(pub, ()))
        topics.append(Topic(
            threshold=threshold,
            member_pubs=component,
            active_authors=frozenset(authors),
        ))
    return topics


@dataclass(frozen=True)
class TopicThresholdStats:
    threshold: float
    n_topics: int
    size_mean: float | None
    size_median: float | None
    people_mean: float | None
    people_median: float | None


@dataclass(frozen=True)
class TopicReport:
    """Topic size and people-to-problem statistics per threshold. Thresholds
    without any topic report absent statistics, not zeros."""

    per_threshold: tuple[TopicThresholdStats, ...]

    def rows(self) -> list[tuple]:
        return [
            (s.threshold, s.n_topics, s.size_mean, s.size_median,
             s.people_mean, s.people_median)
            for s in self.per_threshold
        ]


def topic_report(topics_by_threshold: Mapping[float, Sequence[Topic]]) -> TopicReport:
    entries = []
    for threshold in sorted(topics_by_threshold):
        topics = topics_by_threshold[threshold]
        if topics:
            sizes = [topic.size for topic in topics]
            people = [topic.people_to_problem for topic in topics]
            entries.append(TopicThresholdStats(
                threshold=threshold,
                n_topics=len(topics),
                size_mean=statistics.mean(sizes),
                size_median=statistics.median(sizes),
                people_mean=statistics.mean(people),
                people_median=statistics.median(people),
            ))
        else:
            entries.append(TopicThresholdStats(
                threshold=threshold,
                n_topics=0,
                size_mean=None,
                size_median=None,
                people_mean=None,
                people_median=None,
            ))
    return TopicReport(per_threshold=tuple(entries))


def write_curve_csv(curve: ConnectivityCurve, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "c", "g", "n_components", "giant_size"])
        for t, c, g, n_comp, giant in curve.rows():
            writer.writerow([repr(float(t)), repr(c), repr(g), n_comp, giant])


def write_topic_report_csv(report: TopicReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["threshold", "n_topics", "size_mean", "size_median",
                         "people_mean", "people_median"])
        for threshold, n_topics, s_mean, s_med, p_mean, p_med in report.rows():
            writer.writerow([
                repr(float(threshold)), n_topics,
                "" if s_mean is None else repr(float(s_mean)),
                "" if s_med is None else repr(float(s_med)),
                "" if p_mean is None else repr(float(p_mean)),
                "" if p_med is None else repr(float(p_med)),
            ])
