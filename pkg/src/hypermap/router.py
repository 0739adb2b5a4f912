"""Greedy forwarding over hyperbolic maps and the experiments built on it.

A packet at node ``u`` heading for ``t`` goes to the neighbour of ``u``
closest to ``t`` in the map; it fails as soon as it visits a node twice
(or exceeds the hop cap). Success ratio and stretch are measured on
node pairs drawn from the giant component of the graph being mapped.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse import csgraph

from . import _kernels as K
from .geometry import geo_radii, great_circle_angle_arrays, hyperbolic_distance_3d_arrays
from .graph import (Topology, diameter_upper_bound, giant_component, remove_random_links,
                    remove_random_nodes, remove_ranked_links, remove_top_hubs,
                    remove_links_above_threshold)

log = logging.getLogger(__name__)

DELIVERED, LOOP, CAP = 0, 1, 2
STATUS_NAMES = {DELIVERED: "delivered", LOOP: "loop", CAP: "cap-exceeded"}
# destinations shared by this many pairs get a precomputed next-hop table
GROUP_MIN = 4


@dataclass
class RouteResult:
    status: str
    path: list

    @property
    def delivered(self) -> bool:
        return self.status == "delivered"

    @property
    def hops(self) -> int:
        return len(self.path) - 1


@dataclass
class RoutingReport:
    """Greedy routing summary.

    Hop means and stretch are taken over delivered pairs only, so
    ``mean_greedy_hops >= mean_shortest_hops`` always holds. Pairs whose
    endpoints are disconnected (or missing) in the routed graph are left
    out of ``pairs_evaluated`` and counted in ``pairs_skipped_unreachable``.
    """

    success_ratio: float
    mean_stretch: float
    mean_shortest_hops: float
    mean_greedy_hops: float
    pairs_evaluated: int
    pairs_skipped_unreachable: int
    delivered: int = 0
    loops: int = 0
    cap_exceeded: int = 0
    hop_cap: int = 0
    # per-pair detail (node ids, status code, greedy hops, BFS hops); not serialised
    detail: dict = field(default_factory=dict, repr=False, compare=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("detail")
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def same_numbers(self, other: "RoutingReport") -> bool:
        return self.as_dict() == other.as_dict()


def map_coordinates(g: Topology, emap):
    """(r, theta) arrays aligned with ``g.nodes``."""
    idx = emap.indices_of(g.nodes)
    r = np.ascontiguousarray(emap.r[idx])
    theta = np.ascontiguousarray(emap.theta[idx])
    if np.any(np.isnan(theta)):
        raise ValueError("map has unplaced nodes")
    return r, theta


def default_hop_cap(g: Topology) -> int:
    return max(2 * diameter_upper_bound(g), 2)


def greedy_route(g: Topology, emap, src, dst, hop_cap: int | None = None) -> RouteResult:
    """Forward from ``src`` to ``dst``; ties between equally close neighbours go to the lower id."""
    i, j = g.index_of(src), g.index_of(dst)
    if i == j:
        raise ValueError("source and destination coincide")
    r, theta = map_coordinates(g, emap)
    cap = hop_cap or default_hop_cap(g)
    visited = np.zeros(g.n, dtype=bool)
    path = np.empty(cap + 1, dtype=np.int64)
    status, hops = K.greedy_walk(i, j, r, theta, g.indptr, g.indices, cap, visited, path)
    return RouteResult(STATUS_NAMES[int(status)], g.nodes[path[:hops + 1]].tolist())


# -- pair sampling ----------------------------------------------------------------------
def sample_pairs(population, pairs, rng: np.random.Generator | None = None) -> np.ndarray:
    """Ordered (src, dst) pairs of distinct nodes from ``population`` (node ids).

    ``pairs="all"`` enumerates every ordered pair; an integer draws that
    many distinct pairs uniformly without replacement.
    """
    pop = np.asarray(population, dtype=np.int64)
    n = len(pop)
    total = n * (n - 1)
    if isinstance(pairs, str):
        if pairs != "all":
            raise ValueError(f"unknown pair spec {pairs!r}")
        s, t = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        keep = s != t
        return np.stack([pop[s[keep]], pop[t[keep]]], axis=1)
    m = int(pairs)
    if m > total:
        raise ValueError(f"asked for {m} pairs but only {total} exist")
    if rng is None:
        raise ValueError("sampling pairs needs an rng")
    code = rng.choice(total, size=m, replace=False)
    s = code // (n - 1)
    t = code % (n - 1)
    t = t + (t >= s)
    return np.stack([pop[s], pop[t]], axis=1)


def _bfs_hops(g: Topology, src_idx, dst_idx, chunk: int = 256) -> np.ndarray:
    """Hop counts for index pairs, -1 where unreachable; one BFS per distinct source."""
    out = np.full(len(src_idx), -1, dtype=np.int64)
    if len(src_idx) == 0:
        return out
    order = np.argsort(src_idx, kind="stable")
    uniq, start = np.unique(src_idx[order], return_index=True)
    bounds = np.append(start, len(order))
    adj = g.to_csr()
    for c in range(0, len(uniq), chunk):
        srcs = uniq[c:c + chunk]
        d = csgraph.shortest_path(adj, method="D", unweighted=True, directed=False, indices=srcs)
        for a in range(len(srcs)):
            sel = order[bounds[c + a]:bounds[c + a + 1]]
            row = d[a, dst_idx[sel]]
            out[sel] = np.where(np.isfinite(row), row, -1).astype(np.int64)
    return out


def _report(status, ghops, shops, skipped, cap, detail) -> RoutingReport:
    ok = status == DELIVERED
    ev = len(status)
    if ok.any():
        stretch = ghops[ok] / shops[ok]
        mean_stretch = float(np.mean(stretch))
        mean_short = float(np.mean(shops[ok]))
        mean_greedy = float(np.mean(ghops[ok]))
    else:
        mean_stretch = mean_short = mean_greedy = float("nan")
    return RoutingReport(success_ratio=float(ok.mean()) if ev else float("nan"), mean_stretch=mean_stretch,
                         mean_shortest_hops=mean_short, mean_greedy_hops=mean_greedy,
                         pairs_evaluated=int(ev), pairs_skipped_unreachable=int(skipped),
                         delivered=int(ok.sum()), loops=int(np.sum(status == LOOP)),
                         cap_exceeded=int(np.sum(status == CAP)), hop_cap=int(cap), detail=detail)


def _resolve_pairs(g, pairs, rng):
    if isinstance(pairs, np.ndarray) and pairs.ndim == 2:
        return pairs.astype(np.int64)
    members, _ = giant_component(g)
    return sample_pairs(members, pairs, rng)


def _usable(g: Topology, pair_ids):
    """Index pairs present in ``g``, plus the mask of usable rows."""
    present = np.isin(pair_ids, g.nodes).all(axis=1)
    idx = np.full(pair_ids.shape, -1, dtype=np.int64)
    if present.any():
        idx[present] = g.indices_of(pair_ids[present].ravel()).reshape(-1, 2)
    return idx, present


def evaluate_routing(g: Topology, emap, pairs="all", rng: np.random.Generator | None = None,
                     hop_cap: int | None = None) -> RoutingReport:
    """Success ratio and stretch of greedy forwarding on ``g`` with ``emap``.

    ``pairs`` is ``"all"``, a sample size (pairs drawn from the giant
    component of ``g``), or an explicit (m, 2) array of node ids.
    """
    pair_ids = _resolve_pairs(g, pairs, rng)
    r, theta = map_coordinates(g, emap)
    cap = hop_cap or default_hop_cap(g)
    idx, present = _usable(g, pair_ids)
    shops = np.full(len(pair_ids), -1, dtype=np.int64)
    shops[present] = _bfs_hops(g, idx[present, 0], idx[present, 1])
    ok = shops > 0
    status = np.full(len(pair_ids), -1, dtype=np.int64)
    ghops = np.zeros(len(pair_ids), dtype=np.int64)
    if ok.any():
        s, h = K.greedy_batch_grouped(idx[ok, 0], idx[ok, 1], r, theta, g.indptr, g.indices, cap,
                                      GROUP_MIN)
        status[ok], ghops[ok] = s, h
    detail = {"pairs": pair_ids, "status": status, "greedy_hops": ghops, "shortest_hops": shops}
    return _report(status[ok], ghops[ok], shops[ok], int((~ok).sum()), cap, detail)


# -- experiments ------------------------------------------------------------------------
@dataclass
class SweepPoint:
    level: float
    report: RoutingReport
    giant_fraction: float


PERTURBATIONS = ("random-links", "random-nodes", "top-hubs", "ranked-links")


def perturb(g: Topology, kind: str, level, rng: np.random.Generator) -> Topology:
    if kind == "random-links":
        return remove_random_links(g, level, rng)
    if kind == "random-nodes":
        return remove_random_nodes(g, level, rng)
    if kind == "top-hubs":
        return remove_top_hubs(g, int(level))
    if kind == "ranked-links":
        return remove_ranked_links(g, level)
    raise ValueError(f"unknown perturbation {kind!r}; expected one of {PERTURBATIONS}")


def robustness_sweep(g: Topology, emap, kind: str, levels, rng: np.random.Generator,
                     pairs=10_000, hop_cap: int | None = None) -> list[SweepPoint]:
    """Route on perturbed copies of ``g`` while keeping every coordinate fixed.

    One pair set is drawn from the giant component of the unperturbed
    graph and reused at every level; pairs that lose a node or become
    disconnected are counted as unreachable. The giant fraction is
    relative to the original node count.
    """
    pair_ids = _resolve_pairs(g, pairs, rng)
    cap = hop_cap or default_hop_cap(g)
    seeds = rng.integers(0, 2**63 - 1, size=len(levels))
    out = []
    for level, s in zip(levels, seeds):
        h = perturb(g, kind, level, np.random.default_rng(s))
        report = evaluate_routing(h, emap, pair_ids, hop_cap=cap)
        _, frac = giant_component(h)
        out.append(SweepPoint(float(level), report, frac * h.n / g.n))
        log.info("%s level %g: p_s=%.4f giant=%.3f", kind, level, report.success_ratio, out[-1].giant_fraction)
    return out


@dataclass
class MissingLinksPoint:
    fraction: float
    removed_links: int
    removed_share_of_all: float
    scenario1: RoutingReport
    scenario2: RoutingReport


def missing_links_experiment(g: Topology, fractions, embed, rng: np.random.Generator, k_min: int = 5,
                             pairs=10_000) -> list[MissingLinksPoint]:
    """Hide links among nodes of degree > ``k_min``, re-embed, route with and without them.

    ``embed`` maps a topology to an :class:`EmbeddedMap`. The reduced
    graph's giant component is embedded from scratch; scenario 1 routes on
    that reduced graph, scenario 2 on the full graph induced by the same
    nodes, over the same pairs.
    """
    from .graph import giant_subgraph

    out = []
    for f in fractions:
        if not 0 <= f <= 0.3:
            raise ValueError("fractions must lie in [0, 0.3]")
        reduced, removed = remove_links_above_threshold(g, f, k_min, rng)
        core = giant_subgraph(reduced)
        emap = embed(core)
        pair_ids = _resolve_pairs(core, pairs, rng)
        s1 = evaluate_routing(core, emap, pair_ids)
        full = g.induced_subgraph(core.nodes)
        s2 = evaluate_routing(full, emap, pair_ids)
        if s2.success_ratio < s1.success_ratio:
            log.warning("fraction %g: restoring links lowered p_s (%.4f -> %.4f)", f, s1.success_ratio,
                        s2.success_ratio)
        out.append(MissingLinksPoint(float(f), len(removed), len(removed) / max(g.edge_count, 1), s1, s2))
        log.info("missing %g: scenario1 %.4f scenario2 %.4f", f, s1.success_ratio, s2.success_ratio)
    return out


@dataclass
class GrowthStep:
    step: int
    nodes: int
    new_nodes: int
    report: RoutingReport
    emap: object = field(default=None, repr=False, compare=False)


def growth_replay(snapshots, g_final: Topology, embed, rng: np.random.Generator, pairs=10_000,
                  grid_size: int | None = None):
    """Embed the first snapshot, then only place newcomers at each later one.

    Each step works on the giant component of the graph induced by the
    snapshot's members (plus every node mapped earlier). Returns the
    per-step results (each holding that step's map) and the final map.
    """
    from .embedder import incremental_embed
    from .graph import giant_subgraph

    snaps = [np.unique(np.asarray(s, dtype=np.int64)) for s in snapshots]
    if not snaps:
        raise ValueError("need at least one snapshot")
    for t, s in enumerate(snaps):
        missing = s[~np.isin(s, g_final.nodes)]
        if len(missing):
            raise ValueError(f"snapshot {t} has nodes absent from the final graph: {missing[:10].tolist()}")
    g0 = giant_subgraph(g_final.induced_subgraph(snaps[0]))
    emap = embed(g0)
    steps = [GrowthStep(0, g0.n, g0.n, evaluate_routing(g0, emap, pairs, rng), emap)]
    for t, s in enumerate(snaps[1:], start=1):
        gt = giant_subgraph(g_final.induced_subgraph(np.union1d(s, emap.nodes)))
        if not np.isin(emap.nodes, gt.nodes).all():
            gt = g_final.induced_subgraph(np.union1d(gt.nodes, emap.nodes))
        new = np.setdiff1d(gt.nodes, emap.nodes)
        emap = incremental_embed(emap, gt, new, grid_size=grid_size)
        steps.append(GrowthStep(t, gt.n, len(new), evaluate_routing(gt, emap, pairs, rng), emap))
        log.info("growth step %d: %d nodes (+%d), p_s=%.4f", t, gt.n, len(new), steps[-1].report.success_ratio)
    return steps, emap


def geographic_route_eval(g: Topology, geo, mode: str = "spherical", pairs=10_000,
                          rng: np.random.Generator | None = None, hop_cap: int | None = None) -> RoutingReport:
    """Greedy forwarding on geographic positions.

    ``geo`` maps node id to (lat, lon) in degrees. ``spherical`` uses the
    great-circle angle; ``hyperbolized`` adds degree-derived radii
    (:func:`hypermap.geometry.geo_radii`) and uses the 3D hyperbolic
    distance.
    """
    missing = [int(v) for v in g.nodes if int(v) not in geo]
    if missing:
        raise ValueError(f"{len(missing)} node(s) lack coordinates, e.g. {missing[:10]}")
    if mode not in ("spherical", "hyperbolized"):
        raise ValueError(f"unknown mode {mode!r}")
    ll = np.array([tuple(geo[int(v)]) for v in g.nodes], dtype=float).reshape(-1, 2)
    lat, lon = ll[:, 0], ll[:, 1]
    radii = geo_radii(g.degrees) if mode == "hyperbolized" else None

    pair_ids = _resolve_pairs(g, pairs, rng)
    cap = hop_cap or default_hop_cap(g)
    idx, present = _usable(g, pair_ids)
    shops = np.full(len(pair_ids), -1, dtype=np.int64)
    shops[present] = _bfs_hops(g, idx[present, 0], idx[present, 1])
    ok = shops > 0
    status = np.full(len(pair_ids), -1, dtype=np.int64)
    ghops = np.zeros(len(pair_ids), dtype=np.int64)
    rows = np.flatnonzero(ok)
    dsts = idx[rows, 1]
    for d in np.unique(dsts):
        sel = rows[dsts == d]
        sigma = great_circle_angle_arrays(lat, lon, lat[d], lon[d])
        dist = sigma if radii is None else hyperbolic_distance_3d_arrays(radii, sigma, radii[d])
        dist = np.ascontiguousarray(dist, dtype=float)
        dist[d] = -1.0  # the destination beats any tie at distance 0
        s, h = K.greedy_table_batch(idx[sel, 0], int(d), dist, g.indptr, g.indices, cap)
        status[sel], ghops[sel] = s, h
    detail = {"pairs": pair_ids, "status": status, "greedy_hops": ghops, "shortest_hops": shops}
    return _report(status[ok], ghops[ok], shops[ok], int((~ok).sum()), cap, detail)


# -- betweenness ----------------------------------------------------------------------------
@dataclass
class BetweennessTable:
    """Share of evaluated paths passing through each node.

    A node's share is taken over the paths that do not start or end at
    it, so a star hub scores 1 on all pairs. With router weighting,
    ``per_router`` divides each value by the node's router count.
    """

    nodes: np.ndarray
    values: np.ndarray
    mode: str
    weighting: str
    paths: int
    router_counts: np.ndarray | None = None

    @property
    def per_router(self) -> np.ndarray:
        if self.router_counts is None:
            return self.values
        return self.values / self.router_counts

    def to_csv(self) -> str:
        lines = ["node,betweenness,per_router"]
        for v, b, pr in zip(self.nodes, self.values, self.per_router):
            lines.append(f"{int(v)},{b!r},{pr!r}")
        return "\n".join(lines) + "\n"


def router_count_proxy(degrees) -> np.ndarray:
    """ceil(k / 2) routers per node, a stand-in when no router counts are known."""
    return np.ceil(np.asarray(degrees) / 2.0).astype(np.int64)


def _weighted_pairs(members_idx, weights, m, rng):
    p = weights / weights.sum()
    src = rng.choice(members_idx, size=m, p=p)
    dst = rng.choice(members_idx, size=m, p=p)
    same = src == dst
    while same.any():
        dst[same] = rng.choice(members_idx, size=int(same.sum()), p=p)
        same = src == dst
    return src, dst


def betweenness(g: Topology, emap=None, mode: str = "shortest", weighting: str = "uniform",
                pairs=10_000, router_counts=None, rng: np.random.Generator | None = None,
                hop_cap: int | None = None) -> BetweennessTable:
    """Path-count betweenness from shortest or greedy paths between sampled pairs.

    ``pairs`` is ``"all"``, a sample size or an explicit (m, 2) array of
    node ids. Shortest paths are unique per pair: walking back from the destination,
    each step takes the lowest-id neighbour one hop closer to the source.
    Greedy mode counts delivered greedy paths only. Router weighting
    draws endpoints with probability proportional to router counts.
    """
    if mode not in ("shortest", "greedy"):
        raise ValueError(f"unknown mode {mode!r}")
    if weighting not in ("uniform", "router"):
        raise ValueError(f"unknown weighting {weighting!r}")
    rc = None
    if weighting == "router":
        if router_counts is None:
            raise ValueError("router weighting needs router counts")
        rc = np.array([router_counts[int(v)] for v in g.nodes], dtype=float) \
            if isinstance(router_counts, dict) else np.asarray(router_counts, dtype=float)
        if len(rc) != g.n or np.any(rc <= 0):
            raise ValueError("router counts must be positive, one per node")
    members, _ = giant_component(g)
    members_idx = g.indices_of(members)
    if weighting == "router":
        if isinstance(pairs, str):
            raise ValueError("router weighting needs a pair budget")
        src, dst = _weighted_pairs(members_idx, rc[members_idx], int(pairs), rng)
    else:
        ids = pairs.astype(np.int64) if isinstance(pairs, np.ndarray) else sample_pairs(members, pairs, rng)
        src, dst = g.indices_of(ids[:, 0]), g.indices_of(ids[:, 1])

    counts = np.zeros(g.n)
    if mode == "shortest":
        adj = g.to_csr()
        used = np.zeros(len(src), dtype=bool)
        order = np.argsort(src, kind="stable")
        uniq, start = np.unique(src[order], return_index=True)
        bounds = np.append(start, len(order))
        for a, s in enumerate(uniq):
            sel = order[bounds[a]:bounds[a + 1]]
            d = csgraph.shortest_path(adj, method="D", unweighted=True, directed=False, indices=[s])[0]
            d = np.where(np.isfinite(d), d, -1).astype(np.int64)
            sel = sel[d[dst[sel]] > 0]
            used[sel] = True
            K.shortest_back_count(d, dst[sel], np.ones(len(sel)), g.indptr, g.indices, counts)
    else:
        if emap is None:
            raise ValueError("greedy betweenness needs a map")
        r, theta = map_coordinates(g, emap)
        cap = hop_cap or default_hop_cap(g)
        status, _ = K.greedy_batch_count(src, dst, r, theta, g.indptr, g.indices, cap, counts)
        used = status == DELIVERED
    paths = int(used.sum())
    # paths that could pass through each node: those not ending at it
    ends = np.bincount(src[used], minlength=g.n) + np.bincount(dst[used], minlength=g.n)
    values = counts / np.maximum(paths - ends, 1)
    return BetweennessTable(g.nodes.copy(), values, mode, weighting, paths, rc)
