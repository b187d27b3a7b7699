"""Spectral-element Helmholtz solvers with perfect absorbing layers."""

from .errors import ConfigError, DomainError, MeshError, PalhError, SolverError
from .geometry import StarBoundary, StarLayer, circle, circular_layer, ellipse, hexstar, peanut, perturbed, rectangle
from .modal import ScatterConfig, circular_solve, mie_exact, waveguide_exact
from .sem2d import solve_scattering
from .transform1d import WaveguideConfig

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "MeshError",
    "PalhError",
    "SolverError",
    "StarBoundary",
    "StarLayer",
    "circle",
    "circular_layer",
    "ellipse",
    "hexstar",
    "peanut",
    "perturbed",
    "rectangle",
    "ScatterConfig",
    "circular_solve",
    "mie_exact",
    "waveguide_exact",
    "solve_scattering",
    "WaveguideConfig",
]
