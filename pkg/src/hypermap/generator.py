"""Synthetic S1 and H2 networks with ground-truth coordinates."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import TWO_PI, ModelParams, fermi_connection_probability, hyperbolic_distance_arrays, kappa_to_radius
from .graph import Topology


@dataclass(frozen=True)
class GroundTruthNetwork:
    """A generated topology plus the hidden coordinates that produced it.

    Coordinate arrays are aligned with ``topology.nodes`` (ids 0..n-1).
    ``kappa`` is set for S1 networks, ``r`` for H2 networks (and both after
    :func:`s1_to_h2`).
    """

    topology: Topology
    theta: np.ndarray
    params: ModelParams | None
    seed: int | None
    kappa: np.ndarray | None = None
    r: np.ndarray | None = None
    disc_radius: float | None = None
    temperature: float | None = None
    model: str = "s1"


def _streams(seed):
    coords, edges = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(coords), np.random.default_rng(edges)


def _link_pairs(n, prob_row, rng_edges):
    """Draw independent links for all pairs i < j, row by row.

    ``prob_row(i)`` returns the link probabilities of ``i`` with ``i+1..n-1``.
    The edge stream is consumed in a fixed order, one uniform per pair.
    """
    chunks = []
    for i in range(n - 1):
        p = prob_row(i)
        hit = np.flatnonzero(rng_edges.random(len(p)) < p)
        if len(hit):
            chunks.append(np.stack([np.full(len(hit), i), hit + i + 1], axis=1))
    if not chunks:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(chunks)


def h2_disc_radius(n: int, k_bar: float, gamma: float, temperature: float) -> float:
    c = k_bar * math.sin(math.pi * temperature) / (2 * temperature) * ((gamma - 2) / (gamma - 1)) ** 2
    return 2.0 * math.log(n / c)


def generate_h2(n: int, k_bar: float, gamma: float, temperature: float, seed: int) -> GroundTruthNetwork:
    """Quasi-uniform nodes on a hyperbolic disc, linked by the Fermi-Dirac law.

    ``temperature == 0`` is accepted and uses the step-function limit.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    if not gamma > 2:
        raise ValueError("gamma must exceed 2")
    if not 0 <= temperature < 1:
        raise ValueError("temperature must lie in [0, 1)")
    if not k_bar > 0:
        raise ValueError("k_bar must be positive")
    rng_c, rng_e = _streams(seed)
    t_eff = max(temperature, 1e-12)
    radius = h2_disc_radius(n, k_bar, gamma, t_eff)
    alpha = 0.5 * (gamma - 1)
    theta = rng_c.uniform(0.0, TWO_PI, n)
    u = rng_c.random(n)
    r = radius + np.log(u + (1 - u) * math.exp(-alpha * radius)) / alpha

    def prob_row(i):
        x = hyperbolic_distance_arrays(r[i], theta[i], r[i + 1:], theta[i + 1:])
        return fermi_connection_probability(x, radius, temperature)

    edges = _link_pairs(n, prob_row, rng_e)
    topo = Topology(np.arange(n), edges)
    return GroundTruthNetwork(topology=topo, theta=theta, r=r, params=None, seed=seed,
                              disc_radius=radius, temperature=temperature, model="h2")


def generate_s1(n: int, k_bar: float, gamma: float, beta: float, seed: int) -> GroundTruthNetwork:
    """Nodes uniform on a circle with Pareto expected degrees, linked by ``1/(1+chi^beta)``."""
    if n < 2:
        raise ValueError("need at least two nodes")
    params = ModelParams(n_model=n, k_bar=k_bar, gamma=gamma, beta=beta)
    rng_c, rng_e = _streams(seed)
    theta = rng_c.uniform(0.0, TWO_PI, n)
    u = rng_c.random(n)
    kappa = params.kappa0 * (1 - u) ** (-1.0 / (gamma - 1))
    coef = params.chi_coefficient

    def prob_row(i):
        d = np.abs(theta[i] - theta[i + 1:])
        d = np.pi - np.abs(np.pi - d)
        chi = coef * d / (kappa[i] * kappa[i + 1:])
        with np.errstate(over="ignore"):
            return 1.0 / (1.0 + chi**beta)

    edges = _link_pairs(n, prob_row, rng_e)
    topo = Topology(np.arange(n), edges)
    return GroundTruthNetwork(topology=topo, theta=theta, kappa=kappa, params=params, seed=seed,
                              disc_radius=params.disc_radius, temperature=1.0 / beta, model="s1")


def s1_to_h2(net: GroundTruthNetwork) -> GroundTruthNetwork:
    """Radial coordinates ``R - 2 ln(kappa / kappa0)``; topology and angles unchanged."""
    if net.kappa is None or net.params is None:
        raise ValueError("s1_to_h2 needs an S1 network")
    # sampled kappas are >= kappa0, so only the (astronomically rare) r < 0 case can clamp
    r = kappa_to_radius(net.kappa, net.params)
    return replace(net, r=np.asarray(r), model="h2")


def s1_model_for_observed(n_obs: int, k_bar_obs: float, gamma: float, tol: float = 1e-10,
                          max_iter: int = 1000) -> tuple[int, float]:
    """Model (N, k_bar) whose S1 networks show about ``n_obs`` non-isolated
    nodes of mean degree ``k_bar_obs``.

    Uses the finite-size relations with the sample cut-off
    ``kappa_c = kappa0 N^{1/(gamma-1)}``, so ``alpha = 1 - N^{-(gamma-2)/(gamma-1)}``.
    """
    from .params import p_zero

    n, k_bar = float(n_obs), float(k_bar_obs)
    for _ in range(max_iter):
        alpha = 1.0 - n ** (-(gamma - 2) / (gamma - 1))
        kappa0 = k_bar * (gamma - 2) / (gamma - 1)
        p0 = p_zero(alpha, kappa0, gamma)
        k_new = (1 - p0) * k_bar_obs / alpha**2
        n_new = n_obs / (1 - p0)
        done = abs(k_new - k_bar) < tol * k_bar and abs(n_new - n) < tol * n
        n, k_bar = n_new, k_new
        if done:
            break
    return int(round(n)), k_bar
