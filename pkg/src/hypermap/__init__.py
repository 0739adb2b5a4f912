"""Hyperbolic maps of complex networks.

Submodules: :mod:`geometry` (distances, link probabilities), :mod:`graph`
(topologies and perturbations), :mod:`generator` (synthetic S1/H2
networks), :mod:`params` (model parameter estimation), :mod:`embedder`
(likelihood-based mapping), :mod:`router` (greedy forwarding
experiments), :mod:`io` and :mod:`cli`.
"""
__version__ = "0.1.0"

from .geometry import GeoCoordinate, ModelParams, PolarCoordinate  # noqa: E402
from .graph import Topology  # noqa: E402

__all__ = ["GeoCoordinate", "ModelParams", "PolarCoordinate", "Topology", "__version__"]
