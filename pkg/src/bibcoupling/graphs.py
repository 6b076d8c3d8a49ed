"""Low-level graph routines shared by the network and connectivity modules.

Nodes are integers 0..n-1 here; the caller owns the mapping to pub_ids.
Everything is deterministic: edges are processed in sorted order and all
tie-breaks are by smallest index.
"""

from __future__ import annotations

import heapq
from typing import Iterable, Sequence

import numpy as np


class UnionFind:
    """Disjoint sets with path halving; roots are the smallest member index."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.n_components = n
        self.giant_size = 1 if n else 0

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri
        self.size[ri] += self.size[rj]
        self.n_components -= 1
        if self.size[ri] > self.giant_size:
            self.giant_size = self.size[ri]
        return True


def components(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    """Connected components as sorted index lists, ordered by smallest member.
    Isolated nodes are singleton components."""
    uf = UnionFind(n)
    for u, v in sorted(edges):
        uf.union(u, v)
    groups: dict[int, list[int]] = {}
    for node in range(n):
        groups.setdefault(uf.find(node), []).append(node)
    return [groups[root] for root in sorted(groups)]


def adjacency_csr(n: int, edges: Sequence[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    """Undirected adjacency in CSR form: (indptr, indices)."""
    degree = np.zeros(n + 1, dtype=np.int64)
    for u, v in edges:
        degree[u + 1] += 1
        degree[v + 1] += 1
    indptr = np.cumsum(degree)
    indices = np.empty(indptr[-1], dtype=np.int64)
    cursor = indptr[:-1].copy()
    for u, v in edges:
        indices[cursor[u]] = v
        cursor[u] += 1
        indices[cursor[v]] = u
        cursor[v] += 1
    return indptr, indices


def bfs_eccentricity(indptr: np.ndarray, indices: np.ndarray, n: int, source: int) -> int:
    """Largest BFS depth reached from source (graph assumed connected)."""
    visited = np.zeros(n, dtype=bool)
    visited[source] = True
    frontier = np.array([source], dtype=np.int64)
    depth = 0
    while frontier.size:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
        neighbours = indices[offsets + np.arange(total)]
        fresh = neighbours[~visited[neighbours]]
        if fresh.size == 0:
            break
        visited[fresh] = True
        frontier = np.unique(fresh)
        depth += 1
    return depth


def diameter(n: int, edges: Sequence[tuple[int, int]]) -> int:
    """Exact diameter of a connected graph via BFS from every node."""
    if n <= 1 or not edges:
        return 0
    indptr, indices = adjacency_csr(n, edges)
    return max(bfs_eccentricity(indptr, indices, n, s) for s in range(n))


def clustering_counts(n: int, edges: Sequence[tuple[int, int]]) -> tuple[int, int]:
    """(closed triple count = 3 * triangles, connected triple count)."""
    neighbours: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        neighbours[u].add(v)
        neighbours[v].add(u)
    triples = sum(len(nbrs) * (len(nbrs) - 1) // 2 for nbrs in neighbours)
    common = 0
    for u, v in edges:
        small, large = (neighbours[u], neighbours[v])
        if len(large) < len(small):
            small, large = large, small
        common += sum(1 for x in small if x in large)
    return common, triples


def global_clustering(n: int, edges: Sequence[tuple[int, int]]) -> float:
    closed, triples = clustering_counts(n, edges)
    if triples == 0:
        return 0.0
    return closed / triples


def greedy_modularity(
    n: int, edges: Sequence[tuple[int, int, float]]
) -> tuple[list[int], list[float]]:
    """Weighted greedy agglomerative modularity (CNM style).

    Starting from singleton communities, repeatedly merge the pair with the
    largest modularity gain until no merge has a strictly positive gain.
    Ties break on the smallest community index pair; the merged community
    keeps the smaller index. Returns (membership, modularity after each step),
    the trace starting at the singleton partition's modularity.
    """
    total_weight = sum(w for _, _, w in edges)
    if total_weight <= 0.0:
        return list(range(n)), [0.0]
    m2 = 2.0 * total_weight
    members: list[list[int]] = [[node] for node in range(n)]

    strength = [0.0] * n
    neighbour_weight: list[dict[int, float]] = [dict() for _ in range(n)]
    for u, v, w in sorted(edges):
        if u == v:
            continue
        strength[u] += w
        strength[v] += w
        neighbour_weight[u][v] = neighbour_weight[u].get(v, 0.0) + w
        neighbour_weight[v][u] = neighbour_weight[v].get(u, 0.0) + w

    internal = [0.0] * n
    alive = [True] * n
    q = sum(-((k / m2) ** 2) for k in strength)
    trace = [q]

    def gain(a: int, b: int) -> float:
        return (neighbour_weight[a][b] / total_weight
                - strength[a] * strength[b] / (2.0 * total_weight * total_weight))

    heap: list[tuple[float, int, int]] = []
    for a in range(n):
        for b in neighbour_weight[a]:
            if a < b:
                heap.append((-gain(a, b), a, b))
    heapq.heapify(heap)

    while heap:
        neg_dq, a, b = heapq.heappop(heap)
        if not (alive[a] and alive[b]) or b not in neighbour_weight[a]:
            continue
        current = gain(a, b)
        if -neg_dq != current:
            heapq.heappush(heap, (-current, a, b))
            continue
        if current <= 0.0:
            break
        # merge b into a (a < b by construction)
        internal[a] += internal[b] + neighbour_weight[a][b]
        strength[a] += strength[b]
        alive[b] = False
        del neighbour_weight[a][b]
        del neighbour_weight[b][a]
        for c, w in neighbour_weight[b].items():
            neighbour_weight[c].pop(b)
            merged = neighbour_weight[a].get(c, 0.0) + w
            neighbour_weight[a][c] = merged
            neighbour_weight[c][a] = merged
        neighbour_weight[b].clear()
        members[a].extend(members[b])
        members[b] = []
        q += current
        trace.append(q)
        lo_pairs = ((a, c) if a < c else (c, a) for c in neighbour_weight[a])
        for x, y in lo_pairs:
            heapq.heappush(heap, (-gain(x, y), x, y))

    membership = [0] * n
    for community, nodes in enumerate(members):
        for node in nodes:
            membership[node] = community
    return membership, trace


def modularity_of_partition(
    n: int, edges: Sequence[tuple[int, int, float]], membership: Sequence[int]
) -> float:
    """Modularity Q of an arbitrary partition on a weighted graph."""
    total_weight = sum(w for _, _, w in edges)
    if total_weight <= 0.0:
        return 0.0
    m2 = 2.0 * total_weight
    internal: dict[int, float] = {}
    strength: dict[int, float] = {}
    for u, v, w in edges:
        cu, cv = membership[u], membership[v]
        strength[cu] = strength.get(cu, 0.0) + w
        strength[cv] = strength.get(cv, 0.0) + w
        if cu == cv:
            internal[cu] = internal.get(cu, 0.0) + w
    q = 0.0
    seen = set()
    for community in list(internal) + list(strength):
        if community in seen:
            continue
        seen.add(community)
        q += internal.get(community, 0.0) / total_weight
        q -= (strength.get(community, 0.0) / m2) ** 2
    return q
