"""
Exterior tail integrals T_i = ∫_{Ω^c} |x_i - y|^{-N-sp} dy.

Ω is convex, so in polar coordinates around x_i the complement is
{ρ ≥ ρ_exit(θ)} and the radial integral is exact.  The annulus between ∂Ω
and the truncation radius R' is integrated over the unit sphere with a
direction quadrature; the part beyond R' is the closed form
ω_{d-1} R'^{-κ}/κ, with κ = N + sp - d (κ = sp when d = N).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import gamma

import mlnpde.customlogger as log
from mlnpde.errors import ParameterError
from mlnpde.lattice.grid import Grid
from mlnpde.lattice.params import ModelParams

CIRCLE_DIRECTIONS = 1024
SPHERE_POLAR_NODES = 64
BLOCK = 256

_logger = log.get_logger('lattice')


@dataclass(frozen=True, eq=False)
class ExteriorTail:
    tail: np.ndarray
    truncation_radius: float

    def __post_init__(self):
        self.tail.setflags(write=False)


def sphere_measure(d: int) -> float:
    """Surface measure ω_{d-1} of the unit sphere in ℝ^d."""
    return float(2.0 * np.pi ** (d / 2) / gamma(d / 2))


def sphere_quadrature(d: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unit directions and weights summing to ω_{d-1}."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        angles = 2.0 * np.pi * (np.arange(CIRCLE_DIRECTIONS) + 0.5) / CIRCLE_DIRECTIONS
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return dirs, np.full(CIRCLE_DIRECTIONS, 2.0 * np.pi / CIRCLE_DIRECTIONS)
    cos_polar, w_polar = np.polynomial.legendre.leggauss(SPHERE_POLAR_NODES)
    n_az = 2 * SPHERE_POLAR_NODES
    azimuth = 2.0 * np.pi * (np.arange(n_az) + 0.5) / n_az
    sin_polar = np.sqrt(1.0 - cos_polar ** 2)
    dirs = np.stack([
        np.outer(sin_polar, np.cos(azimuth)).ravel(),
        np.outer(sin_polar, np.sin(azimuth)).ravel(),
        np.repeat(cos_polar, n_az),
    ], axis=1)
    weights = np.repeat(w_polar, n_az) * (2.0 * np.pi / n_az)
    return dirs, weights


def exterior_tail(grid: Grid, params: ModelParams,
                  truncation_radius: Optional[float] = None) -> ExteriorTail:
    sp = params.sp
    if not sp > 0:
        raise ParameterError(f'sp must be positive, got {sp}')
    d = grid.dim_d
    kappa = params.dim_N + sp - d
    if not kappa > 0:
        raise ParameterError(f'N + sp must exceed the grid dimension, got N + sp = {params.dim_N + sp}')
    diameter = grid.geometry.diameter
    radius = 2.0 * diameter if truncation_radius is None else float(truncation_radius)
    # one diameter reaches across Ω from any node, the second is the margin
    if radius < 2.0 * diameter:
        raise ParameterError(
            f'truncation radius {radius} leaves less than one diameter of margin around Ω '
            f'(diameter {diameter}, need at least {2.0 * diameter})')

    dirs, weights = sphere_quadrature(d)
    far = radius ** -kappa
    points = grid.points
    annulus = np.empty(points.shape[0])
    for start in range(0, points.shape[0], BLOCK):
        rho = grid.geometry.exit_distance(points[start:start + BLOCK], dirs)
        annulus[start:start + BLOCK] = ((rho ** -kappa - far) @ weights) / kappa
    outer = sphere_measure(d) * far / kappa
    _logger.debug('Exterior tail on %d nodes, R\'=%g, outer part %g', points.shape[0], radius, outer)
    return ExteriorTail(annulus + outer, radius)
