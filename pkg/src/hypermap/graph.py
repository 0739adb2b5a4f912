"""Immutable undirected topologies and the perturbations used in experiments.

Node identifiers are arbitrary non-negative integers. Internally a
:class:`Topology` stores them sorted, so "smaller index" and "smaller id"
coincide and every tie-break by node id can be done on indices.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

log = logging.getLogger(__name__)

UNREACHABLE = -1


class Topology:
    """Undirected simple graph in CSR form.

    Parameters
    ----------
    nodes : array of int
        Node identifiers; duplicates are collapsed.
    edges : (m, 2) array of int
        Edge list in terms of node identifiers. Self-loops and repeated
        edges are dropped; the counts are kept in ``dropped_self_loops`` and
        ``dropped_duplicates``.
    """

    def __init__(self, nodes, edges):
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        n = len(nodes)
        if len(edges):
            idx = np.searchsorted(nodes, edges)
            idx = np.minimum(idx, max(n - 1, 0))
            if n == 0 or np.any(nodes[idx] != edges):
                raise ValueError("edge references a node that is not in the node set")
        else:
            idx = edges
        loops = idx[:, 0] == idx[:, 1]
        self.dropped_self_loops = int(loops.sum())
        idx = idx[~loops]
        lo = np.minimum(idx[:, 0], idx[:, 1])
        hi = np.maximum(idx[:, 0], idx[:, 1])
        pairs = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(lo) else np.empty((0, 2), np.int64)
        self.dropped_duplicates = int(len(lo) - len(pairs))

        self.nodes = nodes
        self._edge_index = pairs  # (m, 2) index pairs, lo < hi, lexicographically sorted
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=self.indptr[1:])
        self.indices = cols.astype(np.int64)
        self.degrees = np.diff(self.indptr)
        for arr in (self.nodes, self._edge_index, self.indptr, self.indices, self.degrees):
            arr.setflags(write=False)
        self._index = {int(v): i for i, v in enumerate(nodes)}

    # construction helpers -------------------------------------------------
    @classmethod
    def from_edges(cls, edges, nodes=None):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if nodes is None:
            nodes = np.unique(edges)
        return cls(nodes, edges)

    def _from_index_pairs(self, keep_nodes: np.ndarray, pairs: np.ndarray) -> "Topology":
        return Topology(self.nodes[keep_nodes], self.nodes[pairs])

    # basic queries ----------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edge_index)

    def __len__(self):
        return self.n

    def __contains__(self, node) -> bool:
        return int(node) in self._index

    def __repr__(self):
        return f"Topology(n={self.n}, m={self.edge_count})"

    def index_of(self, node) -> int:
        try:
            return self._index[int(node)]
        except KeyError:
            raise KeyError(f"unknown node id {node}") from None

    def indices_of(self, nodes) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=np.int64)
        idx = np.searchsorted(self.nodes, nodes)
        idx = np.minimum(idx, max(self.n - 1, 0))
        if self.n == 0 or np.any(self.nodes[idx] != nodes):
            missing = nodes[self.nodes[idx] != nodes] if self.n else nodes
            raise KeyError(f"unknown node ids: {missing[:10].tolist()}")
        return idx

    def neighbor_indices(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def neighbors(self, node) -> np.ndarray:
        return self.nodes[self.neighbor_indices(self.index_of(node))]

    def degree(self, node) -> int:
        return int(self.degrees[self.index_of(node)])

    def degree_map(self) -> dict[int, int]:
        return {int(v): int(k) for v, k in zip(self.nodes, self.degrees)}

    def edge_indices(self) -> np.ndarray:
        """(m, 2) index pairs with i < j, sorted lexicographically."""
        return self._edge_index

    def edges(self) -> np.ndarray:
        """(m, 2) node-id pairs with u < v, sorted lexicographically."""
        return self.nodes[self._edge_index]

    def has_edge(self, u, v) -> bool:
        i, j = self.index_of(u), self.index_of(v)
        nb = self.neighbor_indices(i)
        k = np.searchsorted(nb, j)
        return bool(k < len(nb) and nb[k] == j)

    def to_csr(self) -> sparse.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def audit(self) -> None:
        """Raise if symmetry or simplicity is violated."""
        for i in range(self.n):
            nb = self.neighbor_indices(i)
            if np.any(nb == i):
                raise AssertionError(f"self-loop at {self.nodes[i]}")
            if np.any(np.diff(nb) <= 0):
                raise AssertionError(f"unsorted or repeated neighbours at {self.nodes[i]}")
        a = self.to_csr()
        if (a != a.T).nnz:
            raise AssertionError("adjacency is not symmetric")

    def same_as(self, other: "Topology") -> bool:
        return (np.array_equal(self.nodes, other.nodes)
                and np.array_equal(self._edge_index, other._edge_index))

    # derived graphs ---------------------------------------------------------
    def induced_subgraph(self, nodes) -> "Topology":
        keep = np.zeros(self.n, dtype=bool)
        keep[self.indices_of(nodes)] = True
        e = self._edge_index
        mask = keep[e[:, 0]] & keep[e[:, 1]]
        return self._from_index_pairs(np.flatnonzero(keep), e[mask])

    def without_edges(self, edge_mask: np.ndarray) -> "Topology":
        """Copy with the edges flagged in ``edge_mask`` (aligned with ``edge_indices()``) removed."""
        return self._from_index_pairs(np.arange(self.n), self._edge_index[~edge_mask])

    def with_edges(self, extra_edges) -> "Topology":
        extra = np.asarray(extra_edges, dtype=np.int64).reshape(-1, 2)
        return Topology(self.nodes, np.concatenate([self.edges(), extra]))


@dataclass(frozen=True)
class GraphStats:
    n_obs: int
    edge_count: int
    k_bar_obs: float
    k_max_obs: int
    mean_clustering: float
    gamma_hat: float | None


def local_clustering(g: Topology) -> np.ndarray:
    """Per-node clustering coefficient (0 for nodes of degree < 2)."""
    a = g.to_csr()
    tri = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0
    k = g.degrees.astype(float)
    denom = k * (k - 1) / 2.0
    out = np.zeros(g.n)
    ok = denom > 0
    out[ok] = tri[ok] / denom[ok]
    return out


def compute_stats(g: Topology, fit_gamma: bool = True, k_min_fit: int = 5) -> GraphStats:
    if g.n == 0:
        raise ValueError("empty topology")
    c = local_clustering(g)
    deg = g.degrees
    mask = deg > 1
    mean_c = float(c[mask].mean()) if mask.any() else 0.0
    gamma_hat = None
    if fit_gamma:
        from .params import estimate_gamma

        try:
            gamma_hat = estimate_gamma(deg, k_min_fit=k_min_fit)
        except ValueError:
            gamma_hat = None
    return GraphStats(
        n_obs=g.n,
        edge_count=g.edge_count,
        k_bar_obs=2.0 * g.edge_count / g.n,
        k_max_obs=int(deg.max()),
        mean_clustering=mean_c,
        gamma_hat=gamma_hat,
    )


def threshold_subgraph(g: Topology, k_threshold: int, degrees=None) -> Topology:
    """Nodes whose degree (in the full graph ``g``, or ``degrees``) is >= the threshold."""
    if k_threshold < 0:
        raise ValueError("threshold must be non-negative")
    deg = g.degrees if degrees is None else np.asarray(degrees)
    return g.induced_subgraph(g.nodes[deg >= k_threshold])


def bfs_distances_idx(g: Topology, source_idx) -> np.ndarray:
    """Hop counts from one or more source indices; ``UNREACHABLE`` (-1) marks unreachable nodes."""
    d = csgraph.shortest_path(g.to_csr(), method="D", unweighted=True, directed=False,
                              indices=source_idx)
    out = np.where(np.isinf(d), UNREACHABLE, d).astype(np.int64)
    return out


def bfs_distances(g: Topology, source) -> dict[int, int]:
    """Hop counts from ``source`` keyed by node id (unreachable -> -1)."""
    d = bfs_distances_idx(g, g.index_of(source))
    return {int(v): int(x) for v, x in zip(g.nodes, d)}


def components(g: Topology) -> np.ndarray:
    """Component label per node index."""
    _, labels = csgraph.connected_components(g.to_csr(), directed=False)
    return labels


def giant_component(g: Topology) -> tuple[np.ndarray, float]:
    """Largest component (node ids) and its share of ``g``'s nodes.

    Equal-size components are ordered by their smallest node id.
    """
    if g.n == 0:
        return np.empty(0, dtype=np.int64), 0.0
    labels = components(g)
    sizes = np.bincount(labels)
    first = np.full(len(sizes), g.n)
    np.minimum.at(first, labels, np.arange(g.n))
    candidates = np.flatnonzero(sizes == sizes.max())
    best = int(candidates[np.argmin(first[candidates])])
    members = g.nodes[labels == best]
    return members, len(members) / g.n


def giant_subgraph(g: Topology) -> Topology:
    members, _ = giant_component(g)
    return g.induced_subgraph(members)


def diameter_upper_bound(g: Topology) -> int:
    """Twice the eccentricity of a double-sweep node, bounding every component's diameter."""
    if g.n == 0:
        return 0
    start = int(np.argmax(g.degrees))
    d = bfs_distances_idx(g, start)
    far = int(np.argmax(d))
    d2 = bfs_distances_idx(g, far)
    ecc = max(int(d.max()), int(d2.max()), 1)
    return 2 * ecc


# perturbations ---------------------------------------------------------------
def _check_fraction(fraction):
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")


def remove_random_links(g: Topology, fraction: float, rng: np.random.Generator) -> Topology:
    _check_fraction(fraction)
    m = g.edge_count
    count = int(round(fraction * m))
    mask = np.zeros(m, dtype=bool)
    mask[rng.choice(m, size=count, replace=False)] = True
    return g.without_edges(mask)


def remove_random_nodes(g: Topology, fraction: float, rng: np.random.Generator) -> Topology:
    _check_fraction(fraction)
    count = int(round(fraction * g.n))
    drop = rng.choice(g.n, size=count, replace=False)
    keep = np.ones(g.n, dtype=bool)
    keep[drop] = False
    return g.induced_subgraph(g.nodes[keep])


def remove_top_hubs(g: Topology, count: int) -> Topology:
    """Drop the ``count`` highest-degree nodes (ties: lower id first)."""
    if count < 0:
        raise ValueError("count must be non-negative")
    order = np.lexsort((g.nodes, -g.degrees))
    keep = np.ones(g.n, dtype=bool)
    keep[order[:count]] = False
    return g.induced_subgraph(g.nodes[keep])


def ranked_links(g: Topology) -> np.ndarray:
    """Edge positions sorted by endpoint-degree product (descending, ties by edge id)."""
    e = g.edge_indices()
    prod = g.degrees[e[:, 0]].astype(np.int64) * g.degrees[e[:, 1]]
    ids = g.nodes[e]
    return np.lexsort((ids[:, 1], ids[:, 0], -prod))


def remove_ranked_links(g: Topology, fraction: float) -> Topology:
    _check_fraction(fraction)
    order = ranked_links(g)
    count = int(round(fraction * g.edge_count))
    mask = np.zeros(g.edge_count, dtype=bool)
    mask[order[:count]] = True
    return g.without_edges(mask)


def remove_links_above_threshold(g: Topology, fraction: float, k_min: int,
                                 rng: np.random.Generator) -> tuple[Topology, np.ndarray]:
    """Remove a random share of links whose endpoints both have degree > ``k_min``.

    Returns the reduced topology and the removed edges (node ids), so they
    can be added back later.
    """
    _check_fraction(fraction)
    e = g.edge_indices()
    eligible = np.flatnonzero((g.degrees[e[:, 0]] > k_min) & (g.degrees[e[:, 1]] > k_min))
    count = int(round(fraction * len(eligible)))
    chosen = np.sort(rng.choice(eligible, size=count, replace=False)) if count else np.empty(0, np.int64)
    mask = np.zeros(g.edge_count, dtype=bool)
    mask[chosen] = True
    return g.without_edges(mask), g.nodes[e[chosen]]
