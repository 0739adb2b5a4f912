"""Distances, connection probabilities and coordinate transforms.

Everything here is a pure function. Scalar helpers accept plain floats;
the ``*_arrays`` variants broadcast over numpy arrays and are what the
generator, embedder and router call in their inner loops.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite coordinate: {v!r}")


def wrap_angle(theta):
    """Map angles into [0, 2*pi)."""
    out = np.mod(theta, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PolarCoordinate:
    r: float
    theta: float

    def __post_init__(self):
        _check_finite(self.r, self.theta)
        if self.r < 0:
            raise ValueError(f"radial coordinate must be >= 0, got {self.r}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class GeoCoordinate:
    lat: float
    lon: float

    def __post_init__(self):
        _check_finite(self.lat, self.lon)
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")


@dataclass(frozen=True)
class ModelParams:
    """Parameter bundle of the S1/H2 model.

    Only ``n_model``, ``k_bar``, ``gamma`` and ``beta`` are free; ``mu``,
    ``kappa0`` and ``disc_radius`` are derived on construction.
    """

    n_model: float
    k_bar: float
    gamma: float
    beta: float
    mu: float = field(init=False)
    kappa0: float = field(init=False)
    disc_radius: float = field(init=False)

    def __post_init__(self):
        if not self.n_model > 0 or not self.k_bar > 0:
            raise ValueError("n_model and k_bar must be positive")
        if not self.gamma > 2:
            raise ValueError(f"gamma must exceed 2, got {self.gamma}")
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        mu = self.beta * math.sin(math.pi / self.beta) / (TWO_PI * self.k_bar)
        kappa0 = self.k_bar * (self.gamma - 2.0) / (self.gamma - 1.0)
        radius = 2.0 * math.log(self.n_model / (math.pi * mu * kappa0**2))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kappa0", kappa0)
        object.__setattr__(self, "disc_radius", radius)

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta

    @property
    def chi_coefficient(self) -> float:
        """N k_bar / (beta sin(pi/beta)); chi = coef * dtheta / (kappa_i kappa_j)."""
        return self.n_model * self.k_bar / (self.beta * math.sin(math.pi / self.beta))


def angular_separation(theta_i, theta_j):
    """Angle between two directions, in [0, pi]."""
    _check_finite(theta_i, theta_j)
    d = np.abs(wrap_angle(theta_i) - wrap_angle(theta_j))
    out = np.pi - np.abs(np.pi - d)
    if np.ndim(out) == 0:
        return float(out)
    return out


def hyperbolic_distance_arrays(r1, theta1, r2, theta2):
    """Vectorised hyperbolic law of cosines.

    Evaluated as ``2 asinh(sqrt(sinh^2((r1-r2)/2) + sinh r1 sinh r2 sin^2(dtheta/2)))``,
    which is the same quantity as
    ``arccosh(cosh(r1-r2) + 2 sinh r1 sinh r2 sin^2(dtheta/2))`` with the
    ``cosh(.) - 1`` subtracted analytically, so neither large radii nor tiny
    angles lose digits.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    half = np.sin(0.5 * (np.asarray(theta1, dtype=float) - np.asarray(theta2, dtype=float)))
    s = np.sinh(0.5 * (r1 - r2))
    # hypot instead of sqrt(a^2 + b^2) so tiny radii do not underflow
    t = np.sqrt(np.sinh(r1)) * np.sqrt(np.sinh(r2)) * np.abs(half)
    return 2.0 * np.arcsinh(np.hypot(s, t))


def hyperbolic_distance(a: PolarCoordinate, b: PolarCoordinate) -> float:
    return float(hyperbolic_distance_arrays(a.r, a.theta, b.r, b.theta))


def fermi_connection_probability(x, disc_radius, temperature):
    """Fermi-Dirac link probability ``1 / (1 + exp((x - R) / 2T))``.

    ``temperature == 0`` selects the step-function limit (1 below R, 1/2 at
    R, 0 above). Negative temperatures are rejected.
    """
    x = np.asarray(x, dtype=float)
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        out = np.where(x < disc_radius, 1.0, np.where(x > disc_radius, 0.0, 0.5))
    else:
        # expit is overflow-free for any finite argument
        from scipy.special import expit

        out = expit(-(x - disc_radius) / (2.0 * temperature))
    return float(out) if out.ndim == 0 else out


def effective_distance_s1(kappa_i, kappa_j, delta_theta, params: ModelParams):
    kappa_i = np.asarray(kappa_i, dtype=float)
    kappa_j = np.asarray(kappa_j, dtype=float)
    if np.any(kappa_i == 0) or np.any(kappa_j == 0):
        raise ValueError("expected degrees must be non-zero")
    out = params.chi_coefficient * np.asarray(delta_theta, dtype=float) / (kappa_i * kappa_j)
    return float(out) if out.ndim == 0 else out


def s1_connection_probability(chi, beta):
    """``1 / (1 + chi**beta)``."""
    chi = np.asarray(chi, dtype=float)
    with np.errstate(over="ignore"):
        out = 1.0 / (1.0 + chi**beta)
    return float(out) if out.ndim == 0 else out


def kappa_to_radius(kappa, params: ModelParams, return_clamped: bool = False):
    """Radial coordinate ``R - 2 ln(kappa / kappa0)``.

    Inputs below ``kappa0`` are clamped onto the rim (r = R) and inputs so
    large that r would go negative are clamped to the origin; a
    ``RuntimeWarning`` is emitted and, with ``return_clamped``, a boolean
    mask of clamped entries is returned alongside.
    """
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0) or not np.all(np.isfinite(kappa)):
        raise ValueError("kappa must be positive and finite")
    r = params.disc_radius - 2.0 * np.log(kappa / params.kappa0)
    low = kappa < params.kappa0
    clamped = low | (r < 0)
    if np.any(clamped):
        warnings.warn(f"{int(np.sum(clamped))} kappa value(s) outside the model range were clamped",
                      RuntimeWarning, stacklevel=2)
        r = np.where(low, params.disc_radius, np.maximum(r, 0.0))
    if r.ndim == 0:
        r = float(r)
        clamped = bool(clamped)
    return (r, clamped) if return_clamped else r


def radius_to_kappa(r, params: ModelParams):
    r = np.asarray(r, dtype=float)
    out = params.kappa0 * np.exp(0.5 * (params.disc_radius - r))
    return float(out) if out.ndim == 0 else out


def great_circle_angle_arrays(lat1, lon1, lat2, lon2):
    """Central angle (radians) between points given in degrees.

    Same angle as the spherical law of cosines, computed in haversine form
    so nearby points (common in geo data) keep their digits.
    """
    p1 = np.radians(lat1)
    p2 = np.radians(lat2)
    dp = p1 - p2
    dl = np.radians(np.asarray(lon1, dtype=float) - np.asarray(lon2, dtype=float))
    h = np.sin(0.5 * dp) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(0.5 * dl) ** 2
    return 2.0 * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def great_circle_angle(g1: GeoCoordinate, g2: GeoCoordinate) -> float:
    return float(great_circle_angle_arrays(g1.lat, g1.lon, g2.lat, g2.lon))


def hyperbolic_distance_3d_arrays(r1, sigma, r2):
    """H3 distance for radial coordinates and a central angle ``sigma``."""
    return hyperbolic_distance_arrays(r1, 0.0, r2, sigma)


def hyperbolic_distance_3d(r1: float, g1: GeoCoordinate, r2: float, g2: GeoCoordinate) -> float:
    return float(hyperbolic_distance_3d_arrays(r1, great_circle_angle(g1, g2), r2))


def geo_radii(degrees, n_obs: int | None = None):
    """Degree-derived radial coordinates for hyperbolised geographic routing.

    ``r = R_geo - 2 ln(k / k_min)`` with ``R_geo = 2 ln(N / k_min)``, so
    minimum-degree nodes sit on the rim and the largest possible degree
    (N) sits at the origin.
    """
    k = np.asarray(degrees, dtype=float)
    if np.any(k <= 0):
        raise ValueError("degrees must be positive")
    n = float(n_obs if n_obs is not None else len(k))
    k_min = k.min()
    radius = 2.0 * math.log(n / k_min)
    return radius - 2.0 * np.log(k / k_min)
