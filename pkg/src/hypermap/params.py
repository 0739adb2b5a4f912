"""Model parameter estimation from an observed topology.

Covers the degree exponent, the finite-size correction system that links
observed size / mean degree / max degree to the model's N, k_bar, kappa0
and cut-off, and the two-stage beta search (clustering screen, then
greedy success ratio on trial embeddings).
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, special

from .geometry import ModelParams

log = logging.getLogger(__name__)

_EULER_GAMMA = 0.5772156649015329
_EPS = 1e-16
_TINY = 1e-300
_NEAR_ZERO = 1e-5


# -- incomplete gamma ----------------------------------------------------------
def _upper_continued_fraction(a: float, x: float) -> float:
    """Gamma(a, x) (unregularised) by modified Lentz evaluation; valid for x > a - 1, any a."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0 else 1.0 / _TINY
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x)) * h


def _upper_near_zero(a: float, x: float) -> float:
    """Gamma(a, x) for |a| < _NEAR_ZERO and x < 1.

    Splits off the n = 0 term of the lower series so the 1/a poles of
    Gamma(a) and x**a / a cancel analytically instead of numerically.
    """
    lx = math.log(x)
    # (Gamma(1 + a) - 1) / a to second order
    g1 = -_EULER_GAMMA + (0.5 * _EULER_GAMMA**2 + math.pi**2 / 12.0) * a
    y = a * lx
    head = g1 - (lx * (math.expm1(y) / y) if y != 0.0 else lx)
    total = 0.0
    term = 1.0
    for n in range(1, 200):
        term *= -x / n
        total += term / (n + a)
        if abs(term) < _EPS * abs(total):
            break
    return head - math.exp(a * lx) * total


def incomplete_gamma_upper(s: float, x: float) -> float:
    """Upper incomplete gamma Gamma(s, x) for real ``s`` (negative allowed) and ``x > 0``.

    For ``s < 0`` and ``x < 1`` the recurrence ``Gamma(s, x) = (Gamma(s+1, x) - x**s e**-x) / s``
    is unrolled from the first shift of ``s`` in ``(-eps, 1)``. Larger ``x`` goes
    through the continued fraction, which converges there for any ``s``.
    """
    s = float(s)
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"incomplete gamma requires x > 0, got {x}")
    if abs(s) < _NEAR_ZERO:
        return _upper_near_zero(s, x) if x < 1.0 else _upper_continued_fraction(s, x)
    if s > 0:
        return float(special.gammaincc(s, x) * special.gamma(s))
    if x >= 1.0:
        return _upper_continued_fraction(s, x)
    n_steps = int(math.floor(-s)) + 1
    top = s + n_steps
    if top > 1.0 - _NEAR_ZERO:
        # just below an integer: dividing by top - 1 would cancel, start there instead
        n_steps -= 1
        top -= 1.0
        value = _upper_near_zero(top, x)
    elif top < _NEAR_ZERO:
        value = _upper_near_zero(top, x)
    else:
        value = float(special.gammaincc(top, x) * special.gamma(top))
    a = top
    ex = math.exp(-x)
    for _ in range(n_steps):
        a -= 1.0
        value = (value - x**a * ex) / a
    return value


def estimate_gamma(degrees, k_min_fit: int = 5, min_tail: int = 100) -> float:
    """Discrete power-law MLE of the degree exponent over degrees >= ``k_min_fit``.

    Maximises ``-n ln zeta(gamma, k_min) - gamma sum ln k`` (Hurwitz zeta),
    returned rounded to two decimals.
    """
    k = np.asarray(degrees, dtype=float)
    tail = k[k >= k_min_fit]
    if len(tail) < min_tail:
        raise ValueError(f"only {len(tail)} degrees >= {k_min_fit}; need at least {min_tail}")
    if np.all(tail == tail[0]):
        raise ValueError("degree tail is constant; no power law to fit")
    n = len(tail)
    s_log = float(np.log(tail).sum())

    def nll(g):
        return n * math.log(special.zeta(g, k_min_fit)) + g * s_log

    res = optimize.minimize_scalar(nll, bounds=(1.01, 8.0), method="bounded",
                                   options={"xatol": 1e-6})
    return round(float(res.x), 2)


# -- finite-size system ----------------------------------------------------------
@dataclass(frozen=True)
class FiniteSizeSolution:
    n_model: float
    k_bar: float
    kappa0: float
    kappa_c: float
    alpha_fs: float
    p_zero: float
    gamma: float
    iterations: int

    def as_dict(self) -> dict:
        return asdict(self)

    def model_params(self, beta: float) -> ModelParams:
        return ModelParams(n_model=self.n_model, k_bar=self.k_bar, gamma=self.gamma, beta=beta)

    def residuals(self, n_obs: float, k_bar_obs: float, k_max_obs: float) -> np.ndarray:
        """Relative residuals of the six defining equations."""
        g = self.gamma
        a0 = self.alpha_fs * self.kappa0
        p0 = (g - 1) * a0 ** (g - 1) * incomplete_gamma_upper(1 - g, a0)
        return np.array([
            self.kappa0 / (self.k_bar * (g - 2) / (g - 1)) - 1,
            self.n_model / (n_obs / (1 - self.p_zero)) - 1,
            self.alpha_fs / (1 - (self.kappa0 / self.kappa_c) ** (g - 2)) - 1,
            self.k_bar / ((1 - self.p_zero) * k_bar_obs / self.alpha_fs**2) - 1,
            self.p_zero / p0 - 1,
            k_max_obs / (self.alpha_fs * self.kappa_c) - 1,
        ])


class FiniteSizeError(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def p_zero(alpha_fs: float, kappa0: float, gamma: float) -> float:
    a0 = alpha_fs * kappa0
    return (gamma - 1) * a0 ** (gamma - 1) * incomplete_gamma_upper(1 - gamma, a0)


def solve_finite_size(n_obs: float, k_bar_obs: float, k_max_obs: float, gamma: float,
                      tol: float = 1e-8, max_iter: int = 10_000) -> FiniteSizeSolution:
    """Fixed-point solution of the finite-size system for (N, k_bar, kappa0, kappa_c, alpha, P(0)).

    Starts from alpha = 1, P(0) = 0. If successive updates of alpha start
    to oscillate the update is damped by 1/2.
    """
    if not 2 < gamma < 3:
        raise ValueError(f"gamma must lie in (2, 3), got {gamma}")
    if not k_max_obs > k_bar_obs > 1:
        raise ValueError("need k_max_obs > k_bar_obs > 1")
    alpha, p0 = 1.0, 0.0
    damping = 1.0
    last_step = 0.0
    trace = []
    for it in range(1, max_iter + 1):
        k_bar = (1 - p0) * k_bar_obs / alpha**2
        kappa0 = k_bar * (gamma - 2) / (gamma - 1)
        kappa_c = k_max_obs / alpha
        alpha_new = 1 - (kappa0 / kappa_c) ** (gamma - 2)
        if not 0 < alpha_new <= 1:
            raise FiniteSizeError(f"alpha left (0, 1] at iteration {it}: {alpha_new}", trace)
        step = alpha_new - alpha
        if last_step * step < 0 and damping == 1.0:
            damping = 0.5
        alpha_new = alpha + damping * step
        last_step = step
        p0_new = p_zero(alpha_new, kappa0, gamma)
        if not 0 <= p0_new < 1:
            raise FiniteSizeError(f"P(0) left [0, 1) at iteration {it}: {p0_new}", trace)
        change = max(abs(alpha_new - alpha) / alpha, abs(p0_new - p0) / max(p0_new, _TINY))
        trace.append((it, alpha_new, p0_new, change))
        alpha, p0 = alpha_new, p0_new
        if change < tol:
            break
    else:
        raise FiniteSizeError(f"no convergence after {max_iter} iterations", trace)
    # final sweep so all six equations hold at the returned point
    k_bar = (1 - p0) * k_bar_obs / alpha**2
    kappa0 = k_bar * (gamma - 2) / (gamma - 1)
    kappa_c = k_max_obs / alpha
    return FiniteSizeSolution(n_model=float(n_obs / (1 - p0)), k_bar=float(k_bar), kappa0=float(kappa0),
                              kappa_c=float(kappa_c), alpha_fs=float(alpha), p_zero=float(p0),
                              gamma=float(gamma), iterations=it)


def finite_size_from_topology(g, gamma: float | None = None, k_min_fit: int = 5) -> FiniteSizeSolution:
    deg = g.degrees
    if gamma is None:
        gamma = estimate_gamma(deg, k_min_fit=k_min_fit)
    return solve_finite_size(g.n, 2.0 * g.edge_count / g.n, int(deg.max()), gamma)


# -- beta --------------------------------------------------------------------------
@dataclass
class BetaDiagnostics:
    rows: list  # (beta, synthetic clustering, success ratio or None)
    observed_clustering: float

    def to_csv(self) -> str:
        lines = ["beta,clustering,success_ratio"]
        for b, c, ps in self.rows:
            lines.append(f"{b:.6g},{c:.6f},{'' if ps is None else f'{ps:.6f}'}")
        return "\n".join(lines) + "\n"


def estimate_beta(g, beta_grid, gamma: float | None = None, seed: int = 0,
                  clustering_window: float = 0.15, n_seeds: int = 3,
                  schedule=None, route_pairs: int = 2000, critical_threshold: int | None = None):
    """Two-stage beta search.

    Stage 1 keeps grid values whose synthetic S1 clustering (same N, gamma
    and k_bar as the finite-size fit, averaged over ``n_seeds`` draws) is
    within ``clustering_window`` of the observed clustering. Stage 2 embeds
    ``g`` at every surviving beta and keeps the one with the best greedy
    success ratio. Embedding and routing use the giant component of ``g``.
    """
    from .embedder import default_schedule, embed_wrapper2
    from .generator import generate_s1
    from .graph import compute_stats, giant_subgraph
    from .router import evaluate_routing

    grid = [float(b) for b in beta_grid]
    if any(b <= 1 for b in grid):
        raise ValueError("beta grid values must exceed 1")
    stats = compute_stats(g, fit_gamma=False)
    fs = finite_size_from_topology(g, gamma)
    master = np.random.SeedSequence(seed)
    children = master.spawn(len(grid))

    surviving, rows = [], []
    for b, child in zip(grid, children):
        sub = child.spawn(n_seeds + 1)
        cs = []
        for s in sub[:n_seeds]:
            net = generate_s1(int(round(fs.n_model)), fs.k_bar, fs.gamma, b,
                              seed=int(s.generate_state(1)[0]))
            cs.append(compute_stats(net.topology, fit_gamma=False).mean_clustering)
        c_syn = float(np.mean(cs))
        rows.append([b, c_syn, None])
        if abs(c_syn - stats.mean_clustering) <= clustering_window:
            surviving.append((len(rows) - 1, b, sub[-1]))
        log.info("beta=%.3g synthetic clustering %.3f (observed %.3f)", b, c_syn, stats.mean_clustering)

    if not surviving:
        gaps = ", ".join(f"{r[0]:g}: {r[1] - stats.mean_clustering:+.3f}" for r in rows)
        raise ValueError(f"no beta survives the clustering screen; gaps {gaps}")
    if len(surviving) == 1 and len(grid) == 1:
        return surviving[0][1], BetaDiagnostics(rows, stats.mean_clustering)

    best_beta, best_ps = None, -1.0
    core = giant_subgraph(g)
    for row_idx, b, s in surviving:
        params = fs.model_params(b)
        sched = schedule or default_schedule(core.degrees, critical_threshold=critical_threshold)
        rng = np.random.default_rng(s)
        emap = embed_wrapper2(core, params, sched, rng, alpha_fs=fs.alpha_fs)
        report = evaluate_routing(core, emap, pairs=route_pairs, rng=np.random.default_rng(seed))
        rows[row_idx][2] = report.success_ratio
        if report.success_ratio > best_ps:
            best_beta, best_ps = b, report.success_ratio
    return best_beta, BetaDiagnostics(rows, stats.mean_clustering)
