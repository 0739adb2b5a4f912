"""Maximum-likelihood angular embedding of an observed topology.

Expected degrees come from the closed-form MLE, angles from the
likelihood of the S1 model. High-degree nodes are embedded first, layer
by layer, with an optional kernel (LMH or SMH) refining every active
node; the remaining low-degree nodes copy a neighbour's angle.

Most heavy lifting happens in :mod:`hypermap._kernels`; this module keeps
the bookkeeping (schedules, activation, provenance) in plain numpy.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .geometry import TWO_PI, ModelParams, kappa_to_radius, wrap_angle
from .graph import Topology

log = logging.getLogger(__name__)

KERNEL_INFERRED = 0
INITIAL_GUESS = 1
NEIGHBOR_COPIED = 2
UNPLACED = -1
PROVENANCE_NAMES = {KERNEL_INFERRED: "kernel-inferred", INITIAL_GUESS: "initial-guess-only",
                    NEIGHBOR_COPIED: "neighbor-copied", UNPLACED: "unplaced"}

# degree thresholds used for the Internet map; default_schedule truncates them
INTERNET_THRESHOLDS = (300, 200, 160, 130, 110, 100, 90, 80, 70, 60, 50, 40, 30, 20,
                       10, 9, 8, 7, 6, 5, 4, 3)
MIN_GRID = 360


@dataclass
class EmbeddedMap:
    """Per-node (kappa, theta, r) plus the parameters that give them meaning.

    Arrays are aligned with ``nodes`` (sorted ids). ``theta`` is NaN for
    nodes that have not been placed yet, which only happens in partial
    maps while an embedding is under way.
    """

    params: ModelParams
    nodes: np.ndarray
    kappa: np.ndarray
    theta: np.ndarray
    provenance: np.ndarray
    alpha_fs: float = 1.0
    r: np.ndarray = field(init=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.int64)
        self.kappa = np.asarray(self.kappa, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        self.provenance = np.asarray(self.provenance, dtype=np.int8)
        n = len(self.nodes)
        if not (len(self.kappa) == len(self.theta) == len(self.provenance) == n):
            raise ValueError("map arrays must have one entry per node")
        if n and np.any(np.diff(self.nodes) <= 0):
            raise ValueError("map node ids must be sorted and unique")
        placed = ~np.isnan(self.theta)
        self.theta[placed] = wrap_angle(self.theta[placed])
        self.r = np.asarray(kappa_to_radius(self.kappa, self.params), dtype=float) if n else np.empty(0)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def complete(self) -> bool:
        return not np.any(np.isnan(self.theta))

    def indices_of(self, nodes) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=np.int64)
        idx = np.searchsorted(self.nodes, nodes)
        idx = np.minimum(idx, max(self.n - 1, 0))
        bad = (self.nodes[idx] != nodes) if self.n else np.ones(len(nodes), bool)
        if np.any(bad):
            raise KeyError(f"nodes missing from map: {nodes[bad][:10].tolist()}")
        return idx

    def aligned(self, nodes):
        """(kappa, theta) arrays reordered to ``nodes``."""
        idx = self.indices_of(nodes)
        return self.kappa[idx], self.theta[idx]

    def record(self, node) -> dict:
        i = int(self.indices_of([node])[0])
        return {"node": int(self.nodes[i]), "kappa": float(self.kappa[i]), "theta": float(self.theta[i]),
                "r": float(self.r[i]), "provenance": PROVENANCE_NAMES[int(self.provenance[i])]}

    def copy(self) -> "EmbeddedMap":
        return EmbeddedMap(self.params, self.nodes.copy(), self.kappa.copy(), self.theta.copy(),
                           self.provenance.copy(), self.alpha_fs)

    def restrict(self, nodes) -> "EmbeddedMap":
        idx = self.indices_of(np.sort(np.asarray(nodes, dtype=np.int64)))
        return EmbeddedMap(self.params, self.nodes[idx], self.kappa[idx], self.theta[idx],
                           self.provenance[idx], self.alpha_fs)


@dataclass(frozen=True)
class LayerSchedule:
    """Strictly decreasing degree thresholds and the last layer that runs the kernel."""

    thresholds: tuple
    critical_threshold: int

    def __post_init__(self):
        t = tuple(int(k) for k in self.thresholds)
        object.__setattr__(self, "thresholds", t)
        if not t:
            raise ValueError("schedule needs at least one threshold")
        if any(a <= b for a, b in zip(t, t[1:])):
            raise ValueError(f"thresholds must be strictly decreasing: {t}")
        if t[-1] < 3 and len(t) > 1:
            raise ValueError("last threshold must be >= 3")
        if self.critical_threshold not in t:
            raise ValueError(f"critical threshold {self.critical_threshold} is not one of {t}")

    def check_size(self, n: int) -> None:
        if self.thresholds[0] < 0.5 * math.sqrt(n):
            warnings.warn(f"first threshold {self.thresholds[0]} is well below sqrt(N) = {math.sqrt(n):.0f}",
                          RuntimeWarning, stacklevel=3)


def default_schedule(degrees, critical_threshold: int | None = 20) -> LayerSchedule:
    """Internet threshold list cut to the graph at hand.

    Thresholds above ``sqrt(N)`` or reached by fewer than two nodes are
    dropped. The critical layer is the smallest kept threshold that is at
    least ``critical_threshold`` (the first one if none is).
    """
    deg = np.asarray(degrees)
    root = math.sqrt(len(deg))
    kept = [k for k in INTERNET_THRESHOLDS if k <= root and np.count_nonzero(deg >= k) >= 2]
    if not kept:
        kept = [3]
    if critical_threshold is None:
        critical_threshold = 20
    above = [k for k in kept if k >= critical_threshold]
    crit = above[-1] if above else kept[0]
    return LayerSchedule(tuple(kept), crit)


def mle_kappa(k, gamma: float, beta: float, k_bar: float, alpha_fs: float = 1.0):
    """``max(k_bar (gamma-2)/(gamma-1), (k - gamma/beta) / alpha_fs)``."""
    if not 0 < alpha_fs <= 1:
        raise ValueError("alpha_fs must lie in (0, 1]")
    k = np.asarray(k, dtype=float)
    out = np.maximum(k_bar * (gamma - 2.0) / (gamma - 1.0), (k - gamma / beta) / alpha_fs)
    return float(out) if out.ndim == 0 else out


def _grid(size: int) -> np.ndarray:
    return np.arange(size) * (TWO_PI / size)


# -- likelihood ---------------------------------------------------------------------
def _arrays_for(g: Topology, emap: EmbeddedMap):
    kappa, theta = emap.aligned(g.nodes)
    return np.ascontiguousarray(kappa), np.ascontiguousarray(theta)


def local_log_likelihood(node, theta_candidate: float, emap: EmbeddedMap, g: Topology, reference) -> float:
    """Sum of pair log-likelihoods between ``node`` at ``theta_candidate`` and ``reference``."""
    kappa, theta = _arrays_for(g, emap)
    i = g.index_of(node)
    ref = g.indices_of(np.asarray(reference, dtype=np.int64)).astype(np.int64)
    if np.any(np.isnan(theta[ref[ref != i]])):
        raise ValueError("reference nodes must have coordinates")
    p = emap.params
    return float(K.local_ll(i, float(theta_candidate), ref, theta, kappa, p.chi_coefficient, p.beta,
                            g.indptr, g.indices, np.zeros(g.n, dtype=bool)))


def global_log_likelihood(emap: EmbeddedMap, g: Topology) -> float:
    kappa, theta = _arrays_for(g, emap)
    if np.any(np.isnan(theta)):
        raise ValueError("every node needs coordinates")
    p = emap.params
    return float(K.global_ll(np.arange(g.n), theta, kappa, p.chi_coefficient, p.beta, g.indptr, g.indices,
                             np.zeros(g.n, dtype=bool)))


# -- kernels --------------------------------------------------------------------------
class _Work:
    """Mutable embedding state on topology indices."""

    def __init__(self, g: Topology, params: ModelParams, kappa, theta=None, provenance=None, skip=None):
        self.g = g
        self.skip = np.zeros(g.n, dtype=bool) if skip is None else np.asarray(skip, dtype=bool)
        self.params = params
        self.kappa = np.ascontiguousarray(kappa, dtype=float)
        self.theta = np.full(g.n, np.nan) if theta is None else np.array(theta, dtype=float)
        self.prov = np.full(g.n, UNPLACED, np.int8) if provenance is None else np.array(provenance, np.int8)
        self.coef = params.chi_coefficient
        self.beta = params.beta
        self.indptr = g.indptr
        self.indices = g.indices

    def global_ll(self, active):
        return K.global_ll(active, self.theta, self.kappa, self.coef, self.beta, self.indptr,
                           self.indices, self.skip)

    def lmh(self, active, rounds, grid_size=None, tol=1e-4, ref=None):
        ref = active if ref is None else ref
        if len(active) == 0 or len(ref) < 2 or rounds <= 0:
            return 0
        grid = _grid(grid_size or max(len(ref), MIN_GRID))
        deg = self.g.degrees[active]
        order = active[np.lexsort((active, -deg))]
        ll = self.global_ll(ref)
        done = 0
        for _ in range(rounds):
            moved = K.lmh_round(order, ref, grid, self.theta, self.kappa, self.coef, self.beta,
                                self.indptr, self.indices, self.skip)
            done += 1
            new = self.global_ll(ref)
            gain = new - ll
            ll = new
            if moved == 0 or gain < tol * abs(ll):
                break
        return done

    def smh(self, active, moves, rng, ref=None):
        ref = active if ref is None else ref
        if len(active) == 0 or len(ref) < 2 or moves <= 0:
            return 0
        picks = rng.integers(0, len(active), moves)
        proposals = rng.uniform(0.0, TWO_PI, moves)
        uniforms = rng.random(moves)
        return K.smh_moves(active, ref, picks, proposals, uniforms, self.theta, self.kappa, self.coef,
                           self.beta, self.indptr, self.indices, self.skip)

    def to_map(self, alpha_fs):
        return EmbeddedMap(self.params, self.g.nodes.copy(), self.kappa.copy(), self.theta.copy(),
                           self.prov.copy(), alpha_fs)


def _kernel_inputs(active, emap, g, fixed=()):
    kappa, theta = _arrays_for(g, emap)
    idx = np.sort(g.indices_of(np.asarray(active, dtype=np.int64))).astype(np.int64)
    fix = g.indices_of(np.asarray(fixed, dtype=np.int64)).astype(np.int64)
    ref = np.union1d(idx, fix).astype(np.int64)
    if np.any(np.isnan(theta[ref])):
        raise ValueError("active and fixed nodes must have coordinates")
    return kappa, theta, idx, ref


def _write_back(emap, g, work, idx):
    out = emap.copy()
    pos = out.indices_of(g.nodes[idx])
    out.theta[pos] = wrap_angle(work.theta[idx])
    out.provenance[pos] = KERNEL_INFERRED
    return out


def smh_kernel(active, emap: EmbeddedMap, g: Topology, rng: np.random.Generator,
               moves: int | None = None, fixed=()) -> EmbeddedMap:
    """Metropolis-Hastings moves of uniformly chosen active nodes to uniform angles.

    Likelihoods are taken against the active nodes plus ``fixed`` ones,
    which never move. ``moves`` defaults to ``|active|**2``. Returns a new map.
    """
    kappa, theta, idx, ref = _kernel_inputs(active, emap, g, fixed)
    work = _Work(g, emap.params, kappa, theta)
    if moves is None:
        moves = len(idx) ** 2
    work.smh(idx, int(moves), rng, ref)
    return _write_back(emap, g, work, idx)


def lmh_kernel(active, emap: EmbeddedMap, g: Topology, rounds: int | None = None,
               grid_size: int | None = None, tol: float = 1e-4, fixed=()) -> EmbeddedMap:
    """Rounds of argmax moves over an equally spaced angle grid.

    Every visit may keep the current angle, so the likelihood of the active
    set never decreases. ``rounds`` defaults to ``ceil(mean degree)`` and a
    round gaining less than ``tol`` (relative) ends the run early. ``fixed``
    nodes join the reference set without moving.
    """
    kappa, theta, idx, ref = _kernel_inputs(active, emap, g, fixed)
    work = _Work(g, emap.params, kappa, theta)
    if rounds is None:
        rounds = math.ceil(2.0 * g.edge_count / max(g.n, 1))
    work.lmh(idx, int(rounds), grid_size, tol, ref)
    return _write_back(emap, g, work, idx)


# -- wrappers ---------------------------------------------------------------------------
def _links_into(g: Topology, nodes, mask):
    """Number of neighbours of each of ``nodes`` inside ``mask``."""
    counts = np.zeros(len(nodes), dtype=np.int64)
    for a, i in enumerate(nodes):
        counts[a] = np.count_nonzero(mask[g.indices[g.indptr[i]:g.indptr[i + 1]]])
    return counts


def embed_wrapper2(g: Topology, params: ModelParams, schedule: LayerSchedule, rng: np.random.Generator,
                   kernel: str = "smh", alpha_fs: float = 1.0, grid_size: int | None = None,
                   rounds: int | None = None, smh_moves: int | None = None, smh_moves_per_node: int = 10,
                   place_rest: bool = True, top_links: str = "non-links", tol: float = 1e-4) -> EmbeddedMap:
    """Layered embedding; the kernel only runs down to the critical layer.

    Nodes of degree >= k1 get uniform random angles and their mutual links
    are deleted, so those pairs count as unconnected in every likelihood
    evaluation (``top_links="exclude"`` drops the pairs from the likelihood
    instead). At each later layer, nodes
    with at least two links into the previous active set are placed at the
    argmax of their likelihood against that set (others wait for a later
    layer). While the layer threshold is at or above the critical one, the
    kernel then refines all active nodes. Whatever is left at the end is
    handled by :func:`place_low_degree`.
    """
    if kernel not in ("lmh", "smh"):
        raise ValueError(f"unknown kernel {kernel!r}")
    deg = g.degrees
    if np.any(deg == 0):
        raise ValueError("nodes of degree 0 cannot be embedded")
    schedule.check_size(g.n)
    kappa = mle_kappa(deg, params.gamma, params.beta, params.k_bar, alpha_fs)
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))

    k1 = schedule.thresholds[0]
    top = deg >= k1
    if top_links == "exclude":
        work_g = g
        work = _Work(g, params, kappa, skip=top)
    elif top_links == "non-links":
        e = g.edge_indices()
        work_g = g.without_edges(top[e[:, 0]] & top[e[:, 1]])
        work = _Work(work_g, params, kappa)
    else:
        raise ValueError(f"unknown top_links mode {top_links!r}")
    if rounds is None:
        rounds = math.ceil(2.0 * g.edge_count / g.n)

    active_mask = top.copy()
    work.theta[top] = rng.uniform(0.0, TWO_PI, int(top.sum()))
    work.prov[top] = INITIAL_GUESS
    log.info("layer k=%d: %d nodes placed at random", k1, int(top.sum()))

    for k in schedule.thresholds[1:]:
        prev = np.flatnonzero(active_mask)
        cand = np.flatnonzero((deg >= k) & ~active_mask)
        links = _links_into(work_g, cand, active_mask)
        new = cand[links >= 2]
        if len(new):
            grid = _grid(grid_size or max(len(prev), MIN_GRID))
            work.theta[new] = K.place_batch(new, prev, grid, work.theta, work.kappa, work.coef,
                                            work.beta, work.indptr, work.indices, work.skip)
            work.prov[new] = INITIAL_GUESS
            active_mask[new] = True
        active = np.flatnonzero(active_mask)
        if k >= schedule.critical_threshold:
            if kernel == "lmh":
                work.lmh(active, rounds, grid_size, tol)
            else:
                work.smh(active, smh_moves_per_node * len(active) ** 2 if smh_moves is None else smh_moves, rng)
            work.prov[active] = KERNEL_INFERRED
        log.info("layer k=%d: %d new, %d postponed, %d active", k, len(new), len(cand) - len(new), len(active))

    emap = work.to_map(alpha_fs)
    if place_rest and not emap.complete:
        emap = place_low_degree(g, emap)
    return emap


def embed_wrapper1(g: Topology, params: ModelParams, schedule: LayerSchedule, rng: np.random.Generator,
                   kernel: str = "smh", alpha_fs: float = 1.0, **kw) -> EmbeddedMap:
    """Layered embedding with the kernel running after every layer."""
    full = LayerSchedule(schedule.thresholds, schedule.thresholds[-1])
    return embed_wrapper2(g, params, full, rng, kernel=kernel, alpha_fs=alpha_fs, **kw)


def place_low_degree(g: Topology, emap: EmbeddedMap) -> EmbeddedMap:
    """Unplaced nodes copy the angle of their highest-degree placed neighbour.

    Runs in waves: a node whose neighbours are all unplaced waits until a
    wave has placed one of them. Ties go to the lower node id.
    """
    out = emap.copy()
    pos = out.indices_of(g.nodes)
    theta = out.theta[pos]
    placed = ~np.isnan(theta)
    deg = g.degrees
    p = out.params
    while not placed.all():
        todo = np.flatnonzero(~placed)
        src = np.full(len(todo), -1)
        for a, i in enumerate(todo):
            nb = g.neighbor_indices(i)
            nb = nb[placed[nb]]
            if len(nb):
                # neighbour indices are sorted, so argmax picks the lowest id on ties
                src[a] = nb[np.argmax(deg[nb])]
        ok = src >= 0
        if not ok.any():
            missing = g.nodes[todo][:10].tolist()
            raise ValueError(f"{len(todo)} node(s) have no placed neighbour, e.g. {missing}")
        theta[todo[ok]] = theta[src[ok]]
        placed[todo[ok]] = True
        out.provenance[pos[todo[ok]]] = NEIGHBOR_COPIED
        out.kappa[pos[todo[ok]]] = mle_kappa(deg[todo[ok]], p.gamma, p.beta, p.k_bar, out.alpha_fs)
    out.theta[pos] = theta
    return EmbeddedMap(out.params, out.nodes, out.kappa, out.theta, out.provenance, out.alpha_fs)


def incremental_embed(existing: EmbeddedMap, g_new: Topology, new_nodes,
                      grid_size: int | None = None) -> EmbeddedMap:
    """Place ``new_nodes`` against a fixed map, highest degree first.

    Old coordinates are copied verbatim. Each new node is put at the
    likelihood argmax against every node placed so far (old nodes plus new
    ones handled earlier). Nodes with no placed neighbour at their turn
    are retried after the others; any still unreachable fall back to
    :func:`place_low_degree`.
    """
    new_nodes = np.unique(np.asarray(new_nodes, dtype=np.int64))
    if len(new_nodes) == 0:
        return existing.copy()
    if np.isin(new_nodes, existing.nodes).any():
        raise ValueError("new nodes already have coordinates")
    p = existing.params
    old_idx = g_new.indices_of(existing.nodes)
    new_idx = g_new.indices_of(new_nodes)
    if np.any(g_new.degrees[new_idx] == 0):
        raise ValueError("new nodes of degree 0 cannot be embedded")
    kappa = np.empty(g_new.n)
    theta = np.full(g_new.n, np.nan)
    prov = np.full(g_new.n, UNPLACED, np.int8)
    kappa[old_idx], theta[old_idx], prov[old_idx] = existing.kappa, existing.theta, existing.provenance
    kappa[new_idx] = mle_kappa(g_new.degrees[new_idx], p.gamma, p.beta, p.k_bar, existing.alpha_fs)

    placed = np.zeros(g_new.n, dtype=bool)
    placed[old_idx] = True
    order = new_idx[np.lexsort((new_idx, -g_new.degrees[new_idx]))]
    gs = -1 if grid_size is None else int(grid_size)
    while len(order):
        skipped = K.place_sequential(order, placed, gs, theta, kappa, p.chi_coefficient, p.beta,
                                     g_new.indptr, g_new.indices, np.zeros(g_new.n, dtype=bool))
        prov[order[~skipped]] = KERNEL_INFERRED
        if skipped.all():
            break
        order = order[skipped]

    # new nodes cannot be in the old array, so r of old nodes is recomputed from identical kappa
    out = EmbeddedMap(p, g_new.nodes.copy(), kappa, theta, prov, existing.alpha_fs)
    if not out.complete:
        out = place_low_degree(g_new, out)
    return out


# -- diagnostics ----------------------------------------------------------------------
def empirical_connection_curve(emap: EmbeddedMap, g: Topology, bin_count: int = 50,
                               max_pairs: int = 30000 * 29999 // 2, rng=None):
    """Connected fraction of node pairs per hyperbolic-distance bin on [0, 2R].

    All pairs are enumerated when there are at most ``max_pairs`` of them;
    otherwise ``max_pairs`` pairs are drawn uniformly with ``rng``.
    Returns (bin centres, connected fraction, pair count); empty bins give NaN.
    """
    from .geometry import hyperbolic_distance_arrays

    kappa, theta = _arrays_for(g, emap)
    r = np.asarray(kappa_to_radius(kappa, emap.params), dtype=float)
    radius = emap.params.disc_radius
    edges = np.linspace(0.0, 2.0 * radius, bin_count + 1)
    total = np.zeros(bin_count, dtype=np.int64)
    linked = np.zeros(bin_count, dtype=np.int64)
    n = g.n
    adj = g.to_csr()

    def accumulate(i, j, a):
        x = hyperbolic_distance_arrays(r[i], theta[i], r[j], theta[j])
        b = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, bin_count - 1)
        total[:] += np.bincount(b, minlength=bin_count)
        linked[:] += np.bincount(b[a], minlength=bin_count)

    if n * (n - 1) // 2 <= max_pairs:
        for i in range(n - 1):
            j = np.arange(i + 1, n)
            row = np.zeros(n, dtype=bool)
            row[g.neighbor_indices(i)] = True
            accumulate(i, j, row[j])
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        i = rng.integers(0, n, max_pairs)
        j = rng.integers(0, n - 1, max_pairs)
        j = j + (j >= i)
        accumulate(i, j, np.asarray(adj[i, j]).ravel() > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(total > 0, linked / np.maximum(total, 1), np.nan)
    return 0.5 * (edges[:-1] + edges[1:]), frac, total


def align_angles(theta_true, theta_inferred):
    """Rotate (and possibly reflect) ``theta_inferred`` onto ``theta_true``.

    Returns (aligned angles, reflected flag, rotation).
    """
    a = np.asarray(theta_true, dtype=float)
    b = np.asarray(theta_inferred, dtype=float)
    best = None
    for sign in (1.0, -1.0):
        z = np.sum(np.exp(1j * (a - sign * b)))
        if best is None or abs(z) > best[0]:
            best = (abs(z), sign, float(np.angle(z)))
    _, sign, phi = best
    return wrap_angle(sign * b + phi), sign < 0, phi


def circular_correlation(a, b) -> float:
    """Fisher-Lee circular correlation; invariant under a common rotation of either argument."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = len(a)
    if n < 2:
        raise ValueError("need at least two angles")
    sa, ca, sb, cb = np.sin(a), np.cos(a), np.sin(b), np.cos(b)
    # sum over i<j of sin(a_i - a_j) sin(b_i - b_j), written with O(n) sums
    num = (np.sum(ca * cb) * np.sum(sa * sb) - np.sum(ca * sb) * np.sum(sa * cb))
    da = n * n - np.sum(np.cos(2 * a)) ** 2 - np.sum(np.sin(2 * a)) ** 2
    db = n * n - np.sum(np.cos(2 * b)) ** 2 - np.sum(np.sin(2 * b)) ** 2
    # sum_{i<j} sin^2(x_i - x_j) = (n^2 - |sum e^{2ix}|^2) / 4
    return float(4.0 * num / math.sqrt(da * db))


def aligned_circular_correlation(theta_true, theta_inferred) -> float:
    aligned, _, _ = align_angles(theta_true, theta_inferred)
    return circular_correlation(theta_true, aligned)


def embed_topology(g: Topology, beta: float, rng: np.random.Generator, gamma: float | None = None,
                   kernel: str = "smh", critical_threshold: int = 20, schedule: LayerSchedule | None = None,
                   **kw):
    """Finite-size parameter fit followed by :func:`embed_wrapper2`.

    Returns ``(map, finite-size solution)``. ``gamma`` is fitted from the
    degree sequence when not given.
    """
    from .params import finite_size_from_topology

    fs = finite_size_from_topology(g, gamma)
    params = fs.model_params(beta)
    if schedule is None:
        schedule = default_schedule(g.degrees, critical_threshold)
    emap = embed_wrapper2(g, params, schedule, rng, kernel=kernel, alpha_fs=fs.alpha_fs, **kw)
    return emap, fs
