import math

import numpy as np
import pytest

from hypermap.generator import generate_h2, generate_s1, h2_disc_radius, s1_model_for_observed, s1_to_h2
from hypermap.geometry import (angular_separation, fermi_connection_probability, hyperbolic_distance_arrays,
                               s1_connection_probability)
from hypermap.graph import compute_stats, threshold_subgraph
from hypermap.params import p_zero


def test_h2_zero_temperature_links_iff_inside_radius():
    for seed in range(40):
        net = generate_h2(2, 5.0, 2.5, 0.0, seed)
        x = hyperbolic_distance_arrays(net.r[0], net.theta[0], net.r[1], net.theta[1])
        assert (net.topology.edge_count == 1) == bool(x < net.disc_radius)


def test_h2_parameter_validation():
    with pytest.raises(ValueError):
        generate_h2(100, 5.0, 2.1, 1.0, 0)
    with pytest.raises(ValueError):
        generate_h2(100, 5.0, 1.9, 0.5, 0)
    with pytest.raises(ValueError):
        generate_h2(1, 5.0, 2.5, 0.5, 0)


def test_h2_radii_inside_disc():
    net = generate_h2(3000, 5.0, 2.5, 0.5, 4)
    assert np.all((net.r >= 0) & (net.r <= net.disc_radius))
    assert net.disc_radius == pytest.approx(h2_disc_radius(3000, 5.0, 2.5, 0.5))


def test_same_seed_same_network():
    a = generate_s1(800, 6.0, 2.5, 2.0, seed=7)
    b = generate_s1(800, 6.0, 2.5, 2.0, seed=7)
    c = generate_s1(800, 6.0, 2.5, 2.0, seed=8)
    assert a.topology.same_as(b.topology)
    assert np.array_equal(a.theta, b.theta) and np.array_equal(a.kappa, b.kappa)
    assert not a.topology.same_as(c.topology)


def test_s1_clustering_grows_with_beta():
    lo = generate_s1(2000, 6.0, 2.5, 1.1, seed=3).topology
    hi = generate_s1(2000, 6.0, 2.5, 20.0, seed=3).topology
    assert compute_stats(hi, fit_gamma=False).mean_clustering > compute_stats(lo, fit_gamma=False).mean_clustering


def test_s1_expected_degree_tracks_kappa():
    net = generate_s1(10_000, 10.0, 2.5, 2.0, seed=3)
    k, d = net.kappa, net.topology.degrees
    edges = np.logspace(math.log10(2), math.log10(50), 12)
    b = np.digitize(k, edges)
    xs, ys = [], []
    for i in range(1, len(edges)):
        sel = b == i
        if sel.sum() > 10:
            xs.append(math.log(k[sel].mean()))
            ys.append(math.log(d[sel].mean()))
    slope = np.polyfit(xs, ys, 1)[0]
    assert slope == pytest.approx(1.0, rel=0.1)


def _binned_check(stat, linked, expected_p, edges, min_count=300):
    """Linked fraction per bin of ``stat`` against the bin mean of ``expected_p`` (4 sigma + 0.01)."""
    b = np.digitize(stat, edges)
    checked = 0
    for i in range(1, len(edges)):
        sel = b == i
        if sel.sum() < min_count:
            continue
        p = expected_p[sel].mean()
        tol = 4 * math.sqrt(p * (1 - p) / sel.sum()) + 0.01
        assert abs(linked[sel].mean() - p) <= tol
        checked += 1
    return checked


def test_s1_empirical_link_probability_per_chi_bin():
    net = generate_s1(3000, 8.0, 2.5, 2.0, seed=11)
    g = net.topology
    iu = np.triu_indices(g.n, 1)
    chi = net.params.chi_coefficient * angular_separation(net.theta[iu[0]], net.theta[iu[1]]) \
        / (net.kappa[iu[0]] * net.kappa[iu[1]])
    linked = np.asarray(g.to_csr()[iu[0], iu[1]]).ravel() > 0
    assert _binned_check(chi, linked, s1_connection_probability(chi, 2.0), np.logspace(-1.5, 1.5, 13)) >= 10


def test_threshold_subgraph_scaling_law():
    # kappa0 = k_bar (gamma-2)/(gamma-1) = 1, the units in which the law reads k_T^(3-gamma) k_bar
    net = generate_s1(10_000, 3.0, 2.5, 2.0, seed=1)
    g = net.topology
    for kt in (2, 4, 8):
        h = threshold_subgraph(g, kt)
        measured = 2 * h.edge_count / h.n
        assert measured == pytest.approx(kt ** 0.5 * 3.0, rel=0.2)


def test_s1_to_h2_maps_rim_and_keeps_topology():
    net = generate_s1(1500, 6.0, 2.3, 2.0, seed=2)
    h2 = s1_to_h2(net)
    assert h2.topology is net.topology
    i = int(np.argmin(net.kappa))
    r_min = h2.params.disc_radius - 2 * math.log(net.kappa[i] / h2.params.kappa0)
    assert h2.r[i] == pytest.approx(r_min)
    assert np.all(h2.r <= h2.params.disc_radius + 1e-12)


def test_s1_and_h2_connection_curves_coincide():
    net = s1_to_h2(generate_s1(2000, 6.0, 2.3, 2.0, seed=5))
    p, g = net.params, net.topology
    iu = np.triu_indices(g.n, 1)
    d = angular_separation(net.theta[iu[0]], net.theta[iu[1]])
    ok = d > 8 * math.exp(-p.disc_radius / 2)
    i, j = iu[0][ok], iu[1][ok]
    x = hyperbolic_distance_arrays(net.r[i], net.theta[i], net.r[j], net.theta[j])
    linked = np.asarray(g.to_csr()[i, j]).ravel() > 0
    # empirical curve against the H2 law, binned by hyperbolic distance
    edges = np.linspace(0, 2 * p.disc_radius, 60)
    b = np.digitize(x, edges)
    fermi = fermi_connection_probability(x, p.disc_radius, 1.0 / p.beta)
    worst = 0.0
    for k in range(1, len(edges)):
        sel = b == k
        if sel.sum() >= 500:
            worst = max(worst, abs(linked[sel].mean() - fermi[sel].mean()))
    assert worst <= 0.05


def test_model_for_observed_fixed_point():
    n, kb = s1_model_for_observed(5000, 5.0, 2.1)
    assert n == 7211
    assert kb == pytest.approx(11.294, abs=1e-3)
    alpha = 1 - n ** (-(2.1 - 2) / 1.1)
    p0 = p_zero(alpha, kb * 0.1 / 1.1, 2.1)
    assert n * (1 - p0) == pytest.approx(5000, rel=1e-3)
    assert kb * alpha**2 / (1 - p0) == pytest.approx(5.0, rel=1e-4)  # N is rounded
