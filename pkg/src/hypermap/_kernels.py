"""Compiled inner loops for likelihood evaluation and greedy forwarding.

All functions work on integer node indices and plain arrays so they can
be jitted; the public wrappers live in :mod:`hypermap.embedder` and
:mod:`hypermap.router`.

Log-likelihood of one pair with effective distance chi and exponent beta::

    ln(1 - p) = -ln(1 + chi**-beta)
    ln p      = ln(1 - p) - beta ln chi
"""
import math

import numpy as np
from numba import njit

CHI_FLOOR = 1e-15
PI = math.pi


@njit(cache=True, inline="always")
def _log_miss_q(q, chi, beta):
    """ln(1 - p) from ``q = chi**-beta``, with cheap branches for both tails."""
    if q < 1e-5:
        return -q * (1.0 - 0.5 * q)
    if q < 1e15:
        return -math.log1p(q)
    return beta * math.log(chi) - 1.0 / q


@njit(cache=True, inline="always")
def pair_log_miss(chi, beta):
    """ln(1 - p) = -ln(1 + chi**-beta)."""
    if beta == 2.0:
        return _log_miss_q(1.0 / (chi * chi), chi, beta)
    return _log_miss_q(chi ** (-beta), chi, beta)


@njit(cache=True)
def candidate_log_likelihood(cands, ref_theta, ref_coef, ref_linked, beta):
    """Local log-likelihood at each candidate angle.

    ``ref_coef[j]`` is ``N k_bar / (beta sin(pi/beta) kappa_i kappa_j)`` so
    that ``chi = ref_coef[j] * dtheta``. beta = 2 gets its own loop since
    ``chi**-2`` needs no ``pow``.
    """
    n_c = cands.shape[0]
    m = ref_theta.shape[0]
    out = np.empty(n_c)
    square = beta == 2.0
    for c in range(n_c):
        th = cands[c]
        s = 0.0
        if square:
            for j in range(m):
                d = abs(th - ref_theta[j])
                d = PI - abs(PI - d)
                chi = ref_coef[j] * d
                if chi < CHI_FLOOR:
                    chi = CHI_FLOOR
                s += _log_miss_q(1.0 / (chi * chi), chi, beta)
        else:
            for j in range(m):
                d = abs(th - ref_theta[j])
                d = PI - abs(PI - d)
                chi = ref_coef[j] * d
                if chi < CHI_FLOOR:
                    chi = CHI_FLOOR
                s += _log_miss_q(chi ** (-beta), chi, beta)
        for j in range(m):
            if ref_linked[j]:
                d = abs(th - ref_theta[j])
                d = PI - abs(PI - d)
                chi = ref_coef[j] * d
                if chi < CHI_FLOOR:
                    chi = CHI_FLOOR
                s -= beta * math.log(chi)
        out[c] = s
    return out


@njit(cache=True)
def _gather_reference(i, ref, theta, kappa, coef, indptr, indices, mark, skip):
    """Reference arrays for node ``i``.

    ``i`` itself is left out, and so is every ``j`` with ``skip[i] and skip[j]``
    (pairs whose likelihood terms are switched off).
    """
    for p in range(indptr[i], indptr[i + 1]):
        mark[indices[p]] = True
    m = 0
    for j in ref:
        if j != i and not (skip[i] and skip[j]):
            m += 1
    r_theta = np.empty(m)
    r_coef = np.empty(m)
    r_link = np.zeros(m, dtype=np.bool_)
    k = 0
    for j in ref:
        if j == i or (skip[i] and skip[j]):
            continue
        r_theta[k] = theta[j]
        r_coef[k] = coef / (kappa[i] * kappa[j])
        r_link[k] = mark[j]
        k += 1
    for p in range(indptr[i], indptr[i + 1]):
        mark[indices[p]] = False
    return r_theta, r_coef, r_link


@njit(cache=True)
def local_ll(i, theta_i, ref, theta, kappa, coef, beta, indptr, indices, skip):
    mark = np.zeros(theta.shape[0], dtype=np.bool_)
    rt, rc, rl = _gather_reference(i, ref, theta, kappa, coef, indptr, indices, mark, skip)
    cands = np.empty(1)
    cands[0] = theta_i
    return candidate_log_likelihood(cands, rt, rc, rl, beta)[0]


@njit(cache=True)
def global_ll(nodes, theta, kappa, coef, beta, indptr, indices, skip):
    """Sum over unordered pairs of ``nodes``."""
    n = theta.shape[0]
    mark = np.zeros(n, dtype=np.bool_)
    total = 0.0
    m = nodes.shape[0]
    for a in range(m):
        i = nodes[a]
        for p in range(indptr[i], indptr[i + 1]):
            mark[indices[p]] = True
        for b in range(a + 1, m):
            j = nodes[b]
            if skip[i] and skip[j]:
                continue
            d = abs(theta[i] - theta[j])
            d = PI - abs(PI - d)
            chi = coef * d / (kappa[i] * kappa[j])
            if chi < CHI_FLOOR:
                chi = CHI_FLOOR
            total += pair_log_miss(chi, beta)
            if mark[j]:
                total -= beta * math.log(chi)
        for p in range(indptr[i], indptr[i + 1]):
            mark[indices[p]] = False
    return total


@njit(cache=True)
def place_batch(new_nodes, ref, grid, theta, kappa, coef, beta, indptr, indices, skip):
    """Argmax placement of every node in ``new_nodes`` against the fixed ``ref`` set.

    Results are returned, not written, so the reference stays fixed for the
    whole batch.
    """
    mark = np.zeros(theta.shape[0], dtype=np.bool_)
    out = np.empty(new_nodes.shape[0])
    for a in range(new_nodes.shape[0]):
        i = new_nodes[a]
        rt, rc, rl = _gather_reference(i, ref, theta, kappa, coef, indptr, indices, mark, skip)
        ll = candidate_log_likelihood(grid, rt, rc, rl, beta)
        out[a] = grid[np.argmax(ll)]
    return out


@njit(cache=True)
def place_sequential(order, placed_mask, grid_size, theta, kappa, coef, beta, indptr, indices, skip):
    """Place ``order`` one at a time, each against every node placed so far.

    Nodes with no placed neighbour at their turn are skipped (theta left
    untouched) and reported in the returned boolean array.
    """
    n = theta.shape[0]
    mark = np.zeros(n, dtype=np.bool_)
    skipped = np.zeros(order.shape[0], dtype=np.bool_)
    for a in range(order.shape[0]):
        i = order[a]
        linked = False
        for p in range(indptr[i], indptr[i + 1]):
            if placed_mask[indices[p]]:
                linked = True
                break
        if not linked:
            skipped[a] = True
            continue
        ref = np.flatnonzero(placed_mask)
        g = grid_size if grid_size > 0 else ref.shape[0]
        grid = np.arange(g) * (2.0 * PI / g)
        rt, rc, rl = _gather_reference(i, ref, theta, kappa, coef, indptr, indices, mark, skip)
        ll = candidate_log_likelihood(grid, rt, rc, rl, beta)
        theta[i] = grid[np.argmax(ll)]
        placed_mask[i] = True
    return skipped


@njit(cache=True)
def lmh_round(order, active, grid, theta, kappa, coef, beta, indptr, indices, skip):
    """One LMH round: each node in ``order`` moves to its best angle.

    The current angle is candidate 0, so a node only moves on a strict
    improvement and the total likelihood never decreases. Returns the
    number of nodes that moved.
    """
    mark = np.zeros(theta.shape[0], dtype=np.bool_)
    g = grid.shape[0]
    cands = np.empty(g + 1)
    cands[1:] = grid
    moved = 0
    for a in range(order.shape[0]):
        i = order[a]
        rt, rc, rl = _gather_reference(i, active, theta, kappa, coef, indptr, indices, mark, skip)
        cands[0] = theta[i]
        ll = candidate_log_likelihood(cands, rt, rc, rl, beta)
        best = np.argmax(ll)
        if best != 0:
            theta[i] = cands[best]
            moved += 1
    return moved


@njit(cache=True)
def smh_moves(movers, ref, picks, proposals, uniforms, theta, kappa, coef, beta, indptr, indices, skip):
    """Metropolis moves of ``movers[picks]`` against ``ref`` with pre-drawn randomness.

    Returns the accepted count.
    """
    mark = np.zeros(theta.shape[0], dtype=np.bool_)
    cands = np.empty(2)
    accepted = 0
    for s in range(picks.shape[0]):
        i = movers[picks[s]]
        rt, rc, rl = _gather_reference(i, ref, theta, kappa, coef, indptr, indices, mark, skip)
        cands[0] = theta[i]
        cands[1] = proposals[s]
        ll = candidate_log_likelihood(cands, rt, rc, rl, beta)
        delta = ll[1] - ll[0]
        if delta > 0.0 or uniforms[s] < math.exp(delta):
            theta[i] = proposals[s]
            accepted += 1
    return accepted


# -- greedy forwarding ---------------------------------------------------------------
@njit(cache=True, inline="always")
def _h2_dist(r1, t1, r2, t2):
    h = math.sin(0.5 * (t1 - t2))
    s = math.sinh(0.5 * (r1 - r2))
    return 2.0 * math.asinh(math.sqrt(s * s + math.sinh(r1) * math.sinh(r2) * h * h))


@njit(cache=True)
def greedy_walk(src, dst, r, theta, indptr, indices, hop_cap, visited, path):
    """Greedy forwarding from ``src`` to ``dst``.

    Returns (status, hops): status 0 delivered, 1 loop, 2 hop cap. ``path``
    receives the visited indices; ``visited`` must be all-False on entry
    and is restored before returning.
    """
    cur = src
    hops = 0
    path[0] = src
    visited[src] = True
    status = 2
    while hops < hop_cap:
        lo = indptr[cur]
        hi = indptr[cur + 1]
        nxt = -1
        # distance 0 to the destination beats every other neighbour
        for p in range(lo, hi):
            if indices[p] == dst:
                nxt = dst
                break
        if nxt < 0:
            best = math.inf
            for p in range(lo, hi):
                j = indices[p]
                d = _h2_dist(r[j], theta[j], r[dst], theta[dst])
                if d < best:
                    best = d
                    nxt = j
        if nxt < 0:
            status = 1
            break
        hops += 1
        path[hops] = nxt
        if nxt == dst:
            status = 0
            break
        if visited[nxt]:
            status = 1
            break
        visited[nxt] = True
        cur = nxt
    for k in range(hops + 1):
        visited[path[k]] = False
    return status, hops


@njit(cache=True)
def greedy_walk_table(src, dst, dist_to_dst, indptr, indices, hop_cap, visited, path):
    """Greedy forwarding with a precomputed distance-to-destination vector."""
    cur = src
    hops = 0
    path[0] = src
    visited[src] = True
    status = 2
    while hops < hop_cap:
        lo = indptr[cur]
        hi = indptr[cur + 1]
        nxt = -1
        for p in range(lo, hi):
            if indices[p] == dst:
                nxt = dst
                break
        if nxt < 0:
            best = math.inf
            for p in range(lo, hi):
                j = indices[p]
                if dist_to_dst[j] < best:
                    best = dist_to_dst[j]
                    nxt = j
        if nxt < 0:
            status = 1
            break
        hops += 1
        path[hops] = nxt
        if nxt == dst:
            status = 0
            break
        if visited[nxt]:
            status = 1
            break
        visited[nxt] = True
        cur = nxt
    for k in range(hops + 1):
        visited[path[k]] = False
    return status, hops


@njit(cache=True)
def greedy_batch(srcs, dsts, r, theta, indptr, indices, hop_cap):
    n = r.shape[0]
    visited = np.zeros(n, dtype=np.bool_)
    path = np.empty(hop_cap + 1, dtype=np.int64)
    status = np.empty(srcs.shape[0], dtype=np.int64)
    hops = np.empty(srcs.shape[0], dtype=np.int64)
    for k in range(srcs.shape[0]):
        s, h = greedy_walk(srcs[k], dsts[k], r, theta, indptr, indices, hop_cap, visited, path)
        status[k] = s
        hops[k] = h
    return status, hops


@njit(cache=True)
def greedy_batch_count(srcs, dsts, r, theta, indptr, indices, hop_cap, counts):
    """Like :func:`greedy_batch`; delivered paths add 1 to ``counts`` at every intermediate node."""
    n = r.shape[0]
    visited = np.zeros(n, dtype=np.bool_)
    path = np.empty(hop_cap + 1, dtype=np.int64)
    status = np.empty(srcs.shape[0], dtype=np.int64)
    hops = np.empty(srcs.shape[0], dtype=np.int64)
    for k in range(srcs.shape[0]):
        s, h = greedy_walk(srcs[k], dsts[k], r, theta, indptr, indices, hop_cap, visited, path)
        status[k] = s
        hops[k] = h
        if s == 0:
            for q in range(1, h):
                counts[path[q]] += 1.0
    return status, hops


@njit(cache=True)
def greedy_table_batch(srcs, dst, dist_to_dst, indptr, indices, hop_cap):
    """Greedy walks from every source to one destination using a distance table."""
    n = dist_to_dst.shape[0]
    visited = np.zeros(n, dtype=np.bool_)
    path = np.empty(hop_cap + 1, dtype=np.int64)
    status = np.empty(srcs.shape[0], dtype=np.int64)
    hops = np.empty(srcs.shape[0], dtype=np.int64)
    for k in range(srcs.shape[0]):
        s, h = greedy_walk_table(srcs[k], dst, dist_to_dst, indptr, indices, hop_cap, visited, path)
        status[k] = s
        hops[k] = h
    return status, hops


@njit(cache=True)
def shortest_back_count(dist, dsts, weights, indptr, indices, counts):
    """Walk back from each destination along the smallest-index predecessor.

    ``dist`` holds BFS hop counts from one source. Every intermediate node
    of each path gets ``weights[k]`` added to ``counts``.
    """
    for k in range(dsts.shape[0]):
        cur = dsts[k]
        while dist[cur] > 1:
            want = dist[cur] - 1
            nxt = -1
            for p in range(indptr[cur], indptr[cur + 1]):
                if dist[indices[p]] == want:
                    nxt = indices[p]
                    break
            counts[nxt] += weights[k]
            cur = nxt


@njit(cache=True)
def next_hop_table(dst, r, theta, indptr, indices):
    """Greedy next hop of every node towards ``dst`` (-1 for isolated nodes).

    Same distances and tie rule as :func:`greedy_walk`, so following the
    table reproduces its paths exactly.
    """
    n = r.shape[0]
    dist = np.empty(n)
    for j in range(n):
        dist[j] = _h2_dist(r[j], theta[j], r[dst], theta[dst])
    nxt = np.full(n, -1, dtype=np.int64)
    for u in range(n):
        best = math.inf
        for p in range(indptr[u], indptr[u + 1]):
            j = indices[p]
            if j == dst:
                nxt[u] = dst
                break
            if dist[j] < best:
                best = dist[j]
                nxt[u] = j
    return nxt


@njit(cache=True)
def _walk_table(src, dst, nxt, hop_cap, visited, path):
    cur = src
    hops = 0
    path[0] = src
    visited[src] = True
    status = 2
    while hops < hop_cap:
        step = nxt[cur]
        if step < 0:
            status = 1
            break
        hops += 1
        path[hops] = step
        if step == dst:
            status = 0
            break
        if visited[step]:
            status = 1
            break
        visited[step] = True
        cur = step
    for k in range(hops + 1):
        visited[path[k]] = False
    return status, hops


@njit(cache=True)
def greedy_batch_grouped(srcs, dsts, r, theta, indptr, indices, hop_cap, min_group):
    """:func:`greedy_batch` that switches to a next-hop table for destinations
    shared by at least ``min_group`` pairs (identical results, fewer distance evaluations)."""
    n = r.shape[0]
    m = srcs.shape[0]
    visited = np.zeros(n, dtype=np.bool_)
    path = np.empty(hop_cap + 1, dtype=np.int64)
    status = np.empty(m, dtype=np.int64)
    hops = np.empty(m, dtype=np.int64)
    order = np.argsort(dsts, kind="mergesort")
    a = 0
    while a < m:
        d = dsts[order[a]]
        b = a
        while b < m and dsts[order[b]] == d:
            b += 1
        if b - a >= min_group:
            nxt = next_hop_table(d, r, theta, indptr, indices)
            for q in range(a, b):
                k = order[q]
                s, h = _walk_table(srcs[k], d, nxt, hop_cap, visited, path)
                status[k] = s
                hops[k] = h
        else:
            for q in range(a, b):
                k = order[q]
                s, h = greedy_walk(srcs[k], d, r, theta, indptr, indices, hop_cap, visited, path)
                status[k] = s
                hops[k] = h
        a = b
    return status, hops
