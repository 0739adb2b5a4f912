import math

import mpmath
import numpy as np
import pytest

from conftest import complete_graph, path_graph, random_graph, star_graph
from hypermap import _kernels as K
from hypermap.embedder import (INITIAL_GUESS, KERNEL_INFERRED, NEIGHBOR_COPIED, UNPLACED, EmbeddedMap,
                               LayerSchedule, circular_correlation, default_schedule, embed_wrapper1,
                               embed_wrapper2, empirical_connection_curve, global_log_likelihood,
                               incremental_embed, lmh_kernel, local_log_likelihood, mle_kappa,
                               place_low_degree, smh_kernel)
from hypermap.geometry import ModelParams, angular_separation
from hypermap.graph import Topology

PARAMS = ModelParams(500, 6.0, 2.5, 2.0)


def make_map(g, params, rng, kappa=None, theta=None):
    n = g.n
    kappa = params.kappa0 * rng.uniform(1.0, 6.0, n) if kappa is None else kappa
    theta = rng.uniform(0, 2 * math.pi, n) if theta is None else theta
    return EmbeddedMap(params, g.nodes.copy(), kappa, theta, np.full(n, KERNEL_INFERRED))


def oracle_local(i, th, emap, g, reference, dps=50):
    """Direct pair sum in extended precision, straight from N, k_bar and beta."""
    p = emap.params
    adj = {tuple(e) for e in g.edges().tolist()}
    ki = emap.kappa[emap.indices_of([i])[0]]
    with mpmath.workdps(dps):
        total = mpmath.mpf(0)
        b = mpmath.mpf(p.beta)
        scale = mpmath.mpf(p.n_model) * mpmath.mpf(p.k_bar) / (b * mpmath.sin(mpmath.pi / b))
        for j in reference:
            if j == i:
                continue
            kj, tj = emap.kappa[emap.indices_of([j])[0]], emap.theta[emap.indices_of([j])[0]]
            d = abs(mpmath.mpf(th) - mpmath.mpf(tj)) % (2 * mpmath.pi)
            d = min(d, 2 * mpmath.pi - d)
            chi = scale * d / (mpmath.mpf(ki) * mpmath.mpf(kj))
            q = chi ** b
            linked = (min(i, j), max(i, j)) in adj
            total += -mpmath.log1p(q) if linked else mpmath.log(q) - mpmath.log1p(q)
        return float(total)


# -- kappa --------------------------------------------------------------------------------------
def test_mle_kappa_examples():
    assert mle_kappa(1, 2.1, 1.45, 9.86, 0.58) == pytest.approx(9.86 * 0.1 / 1.1)
    assert mle_kappa(1, 2.1, 1.45, 9.86, 0.58) == pytest.approx(0.896, abs=1e-3)
    assert mle_kappa(3, 2.1, 1.45, 9.86, 0.58) == pytest.approx((3 - 2.1 / 1.45) / 0.58)
    assert mle_kappa(3, 2.1, 1.45, 9.86, 0.58) == pytest.approx(2.676, abs=1e-3)


def test_mle_kappa_branches_meet_at_boundary():
    g, b, k = 2.5, 2.0, 9.0
    kb = (g - 1) / (g - 2) * (k - g / b)
    floor = kb * (g - 2) / (g - 1)
    assert mle_kappa(k, g, b, kb) == pytest.approx(floor, rel=1e-14)
    assert mle_kappa(k - 1e-9, g, b, kb) == pytest.approx(floor, rel=1e-9)
    with pytest.raises(ValueError):
        mle_kappa(3, 2.5, 2.0, 5.0, 0.0)


# -- likelihood ---------------------------------------------------------------------------------
def test_local_ll_empty_reference():
    g = path_graph(5)
    m = make_map(g, PARAMS, np.random.default_rng(0))
    assert local_log_likelihood(2, 1.0, m, g, []) == 0.0
    assert local_log_likelihood(2, 1.0, m, g, [2]) == 0.0


@pytest.mark.parametrize("n,seed", [(5, 0), (8, 1), (10, 2)])
def test_local_ll_matches_direct_sum(n, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(n, 0.4, seed=seed)
    m = make_map(g, ModelParams(40, 4.0, 2.3, 1.7), rng)
    for i in range(n):
        th = rng.uniform(0, 2 * math.pi)
        ref = list(range(n))
        assert local_log_likelihood(i, th, m, g, ref) == pytest.approx(oracle_local(i, th, m, g, ref), rel=1e-12)


def test_local_ll_single_neighbor_peaks_on_it():
    g = path_graph(2)
    m = make_map(g, PARAMS, np.random.default_rng(1), theta=np.array([0.0, 2.0]))
    cands = np.linspace(0, 2 * math.pi, 721)
    ll = [local_log_likelihood(0, c, m, g, [1]) for c in cands]
    assert cands[int(np.argmax(ll))] == pytest.approx(2.0, abs=2 * math.pi / 720)


def test_global_ll_brute_force_8_nodes():
    rng = np.random.default_rng(3)
    g = random_graph(8, 0.5, seed=3)
    m = make_map(g, ModelParams(60, 5.0, 2.2, 2.5), rng)
    brute = sum(oracle_local(i, m.theta[i], m, g, range(i + 1, 8)) for i in range(8))
    assert global_log_likelihood(m, g) == pytest.approx(brute, rel=1e-12)


def test_global_ll_half_sum_identity():
    rng = np.random.default_rng(4)
    g = random_graph(50, 0.1, seed=4)
    m = make_map(g, PARAMS, rng)
    half = 0.5 * sum(local_log_likelihood(i, m.theta[i], m, g, range(50)) for i in range(50))
    assert global_log_likelihood(m, g) == pytest.approx(half, rel=1e-9)


def test_global_ll_isolated_far_pairs_near_zero():
    g = Topology(range(4), [])
    m = make_map(g, ModelParams(10**6, 5.0, 2.5, 3.0), np.random.default_rng(0),
                 kappa=np.full(4, 2.0), theta=np.array([0.0, 1.5, 3.0, 4.5]))
    assert abs(global_log_likelihood(m, g)) < 1e-9


def test_global_ll_rotation_and_reflection_gauge():
    rng = np.random.default_rng(5)
    g = random_graph(60, 0.08, seed=5)
    m = make_map(g, PARAMS, rng)
    base = global_log_likelihood(m, g)
    for new in (m.theta + 1.234, -m.theta, 0.5 - m.theta):
        other = EmbeddedMap(m.params, m.nodes, m.kappa, new, m.provenance)
        assert global_log_likelihood(other, g) == pytest.approx(base, rel=1e-9)


# -- kernels ------------------------------------------------------------------------------------
def test_smh_zero_moves_leaves_map():
    g = random_graph(30, 0.2, seed=6)
    m = make_map(g, PARAMS, np.random.default_rng(6))
    out = smh_kernel(np.arange(30), m, g, np.random.default_rng(0), moves=0)
    assert np.array_equal(out.theta, m.theta)


def test_smh_concentrates_near_fixed_neighbor():
    g = path_graph(2)
    m = make_map(g, ModelParams(1000, 6.0, 2.5, 2.0), np.random.default_rng(0),
                 kappa=np.array([3.0, 3.0]), theta=np.array([4.0, 1.0]))
    out = smh_kernel([0], m, g, np.random.default_rng(7), moves=1000, fixed=[1])
    assert out.theta[1] == 1.0
    assert angular_separation(out.theta[0], 1.0) < 0.5


def test_smh_deterministic_given_rng():
    g = random_graph(40, 0.15, seed=8)
    m = make_map(g, PARAMS, np.random.default_rng(8))
    a = smh_kernel(np.arange(40), m, g, np.random.default_rng(1))
    b = smh_kernel(np.arange(40), m, g, np.random.default_rng(1))
    assert np.array_equal(a.theta, b.theta)


def test_lmh_single_neighbor_lands_on_grid_point():
    g = path_graph(2)
    grid = 360
    target = 2 * math.pi * 97 / grid
    m = make_map(g, ModelParams(1000, 6.0, 2.5, 2.0), np.random.default_rng(0),
                 kappa=np.array([3.0, 3.0]), theta=np.array([4.0, target]))
    out = lmh_kernel([0], m, g, rounds=1, grid_size=grid, fixed=[1])
    assert out.theta[0] == pytest.approx(target, abs=1e-12)


def test_lmh_visit_matches_exhaustive_fine_grid():
    rng = np.random.default_rng(9)
    n = 8
    g = random_graph(n, 0.45, seed=9)
    m = make_map(g, ModelParams(80, 4.0, 2.4, 2.0), rng)
    coarse = 64
    out = lmh_kernel(np.arange(n), m, g, rounds=1, grid_size=coarse, tol=0.0)
    first = int(np.lexsort((np.arange(n), -g.degrees))[0])
    # the first visited node sees every other node at its initial angle
    fine = np.arange(100_000) * (2 * math.pi / 100_000)
    kappa, theta = m.kappa, m.theta
    ll = np.zeros(len(fine))
    coef = m.params.chi_coefficient
    nb = set(g.neighbor_indices(first).tolist())
    for j in range(n):
        if j == first:
            continue
        chi = coef * angular_separation(fine, theta[j]) / (kappa[first] * kappa[j])
        chi = np.maximum(chi, 1e-15)
        q = chi ** -m.params.beta
        ll += -np.log1p(q) - (m.params.beta * np.log(chi) if j in nb else 0.0)
    best = fine[np.argmax(ll)]
    assert angular_separation(out.theta[first], best) <= 2 * math.pi / coarse


def test_lmh_never_decreases_likelihood_per_visit():
    rng = np.random.default_rng(10)
    g = random_graph(200, 0.03, seed=10)
    m = make_map(g, PARAMS, rng)
    kappa, theta = m.kappa.copy(), m.theta.copy()
    nodes = np.arange(200)
    grid = np.arange(360) * (2 * math.pi / 360)
    skip = np.zeros(200, dtype=bool)
    coef, beta = PARAMS.chi_coefficient, PARAMS.beta
    ll = K.global_ll(nodes, theta, kappa, coef, beta, g.indptr, g.indices, skip)
    for i in nodes:
        K.lmh_round(np.array([i]), nodes, grid, theta, kappa, coef, beta, g.indptr, g.indices, skip)
        new = K.global_ll(nodes, theta, kappa, coef, beta, g.indptr, g.indices, skip)
        assert new >= ll - 1e-9 * abs(ll)
        ll = new


# -- schedules and wrappers ----------------------------------------------------------------------
def test_schedule_validation():
    with pytest.raises(ValueError):
        LayerSchedule((10, 10, 5), 10)
    with pytest.raises(ValueError):
        LayerSchedule((10, 5, 2), 10)
    with pytest.raises(ValueError):
        LayerSchedule((10, 5), 7)
    with pytest.warns(RuntimeWarning):
        LayerSchedule((10, 5), 10).check_size(10_000)


def test_default_schedule_cut_to_graph():
    deg = np.r_[np.full(2, 40), np.full(50, 10), np.full(2000, 3)]
    s = default_schedule(deg, 20)
    assert s.thresholds[0] == 40 and s.thresholds[-1] == 3
    assert s.thresholds == (40, 30, 20, 10, 9, 8, 7, 6, 5, 4, 3)
    assert s.critical_threshold == 20
    assert default_schedule(deg, 100).critical_threshold == 40


def _s1_like(seed=0, n=400):
    from hypermap.generator import generate_s1
    from hypermap.graph import giant_subgraph
    net = generate_s1(n, 6.0, 2.5, 2.0, seed=seed)
    return giant_subgraph(net.topology)


def test_wrapper_single_layer_is_random_map():
    g = _s1_like()
    with pytest.warns(RuntimeWarning, match="below sqrt"):
        m = embed_wrapper2(g, ModelParams(g.n, 6.0, 2.5, 2.0), LayerSchedule((3,), 3),
                           np.random.default_rng(0), place_rest=False)
    top = g.degrees >= 3
    assert np.all(m.provenance[top] == INITIAL_GUESS)
    assert np.all(np.isnan(m.theta[~top]))
    ref = np.random.default_rng(0).uniform(0, 2 * math.pi, int(top.sum()))
    assert np.allclose(m.theta[top], ref)


def test_wrapper2_critical_at_top_is_pure_cascade():
    g = _s1_like(1)
    sched = default_schedule(g.degrees, None)
    sched = LayerSchedule(sched.thresholds, sched.thresholds[0])
    m = embed_wrapper2(g, ModelParams(g.n, 6.0, 2.5, 2.0), sched, np.random.default_rng(2))
    assert m.complete
    assert not np.any(m.provenance == KERNEL_INFERRED)
    assert set(np.unique(m.provenance)) <= {INITIAL_GUESS, NEIGHBOR_COPIED}


def test_wrappers_deterministic_and_kappa_floor():
    g = _s1_like(2)
    p = ModelParams(g.n, 6.0, 2.5, 2.0)
    sched = default_schedule(g.degrees, 5)
    for wrapper in (embed_wrapper1, embed_wrapper2):
        for kernel in ("smh", "lmh"):
            a = wrapper(g, p, sched, np.random.default_rng(3), kernel=kernel)
            b = wrapper(g, p, sched, np.random.default_rng(3), kernel=kernel)
            assert np.array_equal(a.theta, b.theta) and np.array_equal(a.kappa, b.kappa)
            assert a.complete and np.all((a.theta >= 0) & (a.theta < 2 * math.pi))
            assert np.all(a.kappa >= p.kappa0 - 1e-12)
            assert not np.any(a.provenance == UNPLACED)


def test_wrapper_rejects_isolated_nodes():
    g = Topology(range(4), [(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        embed_wrapper2(g, PARAMS, LayerSchedule((3,), 3), np.random.default_rng(0))


# -- low-degree placement --------------------------------------------------------------------------
def _partial(g, placed):
    theta = np.full(g.n, np.nan)
    prov = np.full(g.n, UNPLACED)
    for v, t in placed.items():
        i = g.index_of(v)
        theta[i], prov[i] = t, KERNEL_INFERRED
    return EmbeddedMap(PARAMS, g.nodes, np.full(g.n, 3.0), theta, prov)


def test_leaf_copies_hub():
    g = star_graph(4)
    out = place_low_degree(g, _partial(g, {0: 1.25}))
    assert np.all(out.theta == 1.25)
    assert np.all(out.provenance[1:] == NEIGHBOR_COPIED)
    assert out.kappa[1] == pytest.approx(mle_kappa(1, PARAMS.gamma, PARAMS.beta, PARAMS.k_bar))


def test_degree_two_copies_higher_degree_neighbor():
    # node 1 sits between a degree-7 hub (10) and a degree-9 hub (20)
    edges = [(1, 10), (1, 20)] + [(10, 100 + i) for i in range(6)] + [(20, 200 + i) for i in range(8)]
    g = Topology.from_edges(edges)
    placed = {v: 0.1 * (k + 1) for k, v in enumerate(g.nodes.tolist()) if v != 1}
    placed[10], placed[20] = 2.0, 3.0
    out = place_low_degree(g, _partial(g, placed))
    assert out.record(1)["theta"] == 3.0


def test_tie_goes_to_lower_id():
    edges = [(1, 12), (1, 40)] + [(12, 100 + i) for i in range(4)] + [(40, 200 + i) for i in range(4)]
    g = Topology.from_edges(edges)
    placed = {v: 0.5 for v in g.nodes.tolist() if v != 1}
    placed[12], placed[40] = 2.0, 3.0
    out = place_low_degree(g, _partial(g, placed))
    assert out.record(1)["theta"] == 2.0


def test_place_low_degree_waves_and_errors():
    g = path_graph(5)
    out = place_low_degree(g, _partial(g, {0: 0.7}))
    assert np.all(out.theta == 0.7)
    h = Topology(range(4), [(0, 1), (2, 3)])
    with pytest.raises(ValueError, match="no placed neighbour"):
        place_low_degree(h, _partial(h, {0: 0.7}))


# -- incremental ----------------------------------------------------------------------------------
def test_incremental_zero_new_nodes_is_identity():
    g = random_graph(30, 0.2, seed=11)
    m = make_map(g, PARAMS, np.random.default_rng(11))
    out = incremental_embed(m, g, [])
    assert out is not m
    assert out.theta.tobytes() == m.theta.tobytes() and out.kappa.tobytes() == m.kappa.tobytes()


def test_incremental_keeps_old_bytes():
    g = _s1_like(3, 600)
    rng = np.random.default_rng(12)
    old = np.sort(rng.choice(g.nodes, int(0.7 * g.n), replace=False))
    m = make_map(g, ModelParams(g.n, 6.0, 2.5, 2.0), rng).restrict(old)
    new = np.setdiff1d(g.nodes, old)
    out = incremental_embed(m, g, new)
    assert out.complete
    sub = out.restrict(old)
    for name in ("kappa", "theta", "r", "provenance"):
        assert getattr(sub, name).tobytes() == getattr(m, name).tobytes()
    with pytest.raises(ValueError):
        incremental_embed(m, g, old[:3])


# -- diagnostics ----------------------------------------------------------------------------------
def test_connection_curve_complete_and_empty():
    rng = np.random.default_rng(13)
    g = complete_graph(25)
    _, frac, count = empirical_connection_curve(make_map(g, PARAMS, rng), g, bin_count=20)
    assert np.all(frac[count > 0] == 1.0) and count.sum() == 300
    e = Topology(range(25), [])
    _, frac, count = empirical_connection_curve(make_map(e, PARAMS, rng), e, bin_count=20)
    assert np.all(frac[count > 0] == 0.0)


def test_connection_curve_sampling_counts():
    g = random_graph(200, 0.05, seed=14)
    m = make_map(g, PARAMS, np.random.default_rng(14))
    _, frac, count = empirical_connection_curve(m, g, max_pairs=5000, rng=np.random.default_rng(0))
    assert count.sum() == 5000


def test_circular_correlation_vs_direct_sum():
    rng = np.random.default_rng(15)
    a = rng.uniform(0, 2 * math.pi, 60)
    b = a + rng.normal(0, 0.7, 60)
    i, j = np.triu_indices(60, 1)
    sa, sb = np.sin(a[i] - a[j]), np.sin(b[i] - b[j])
    direct = np.sum(sa * sb) / math.sqrt(np.sum(sa**2) * np.sum(sb**2))
    assert circular_correlation(a, b) == pytest.approx(direct, rel=1e-12)
    assert circular_correlation(a, a + 2.0) == pytest.approx(1.0)
    assert circular_correlation(a, -a) == pytest.approx(-1.0)
