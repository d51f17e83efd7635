"""
Lattice defects of the singular kernel near a node.

The midpoint sum over cell centres misses the part of the fractional
operator that lives within a few cells of the evaluation point.  Two
corrections restore it to leading order:

* an interior term, per axis k,

      c_k = ∫ z_k² |z|^{b} dz  -  vol Σ_{j≠0} z_{j,k}² |z_j|^{b},   b = p - 2 - N - sp,

  applied as c_k times the axis-k local p-Laplacian, and

* a boundary-layer term on box faces, where the zero extension leaves the
  odd part of the near field unbalanced.  For a node i cells from a face,

      g(i) = ∫_{i+1/2}^∞ t^{-σ} dt  -  Σ_{m>i} m^{-σ},   σ = N - d + 2 + sp - p,

  enters the exterior weight as -A_d δ^{1-p} h^{1-σ} g(i), δ the distance
  to the face and A_d the transverse integral of the kernel.

Both are lattice constants; they depend on the grid spacing and the
exponents, never on the field.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from scipy.special import gamma

import mlnpde.customlogger as log
from mlnpde.lattice.grid import BOX, Grid
from mlnpde.lattice.params import ModelParams
from mlnpde.lattice.tail import sphere_quadrature

NEAR_FIELD_CELLS = {1: 1024, 2: 48, 3: 8}
GAUSS_NODES = 6
CELL_BLOCK = 2048
BOUNDARY_LAYER_CELLS = 16
TAIL_CELLS = 4096

_logger = log.get_logger('operators')


def defect_orders(grid: Grid, params: ModelParams) -> Tuple[float, float]:
    """(order, σ): c_k scales as h^order, the boundary term as h^{1-σ}."""
    b = params.p - 2.0 - params.dim_N - params.sp
    order = grid.dim_d + 2.0 + b
    sigma = params.dim_N - grid.dim_d + 2.0 + params.sp - params.p
    return order, sigma


def corrections_apply(grid: Grid, params: ModelParams) -> bool:
    """Both defects are of lower order than h² and the own cell is integrable."""
    order, sigma = defect_orders(grid, params)
    return 0.0 < order < 2.0 and sigma > 0.0


def _integrand(z: np.ndarray, b: float) -> np.ndarray:
    r = np.linalg.norm(z, axis=-1)
    return z ** 2 * (r ** b)[..., None]


def _cell_rule(spacing: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss points of one cell, as offsets from its centre, and weights summing to 1."""
    x, w = np.polynomial.legendre.leggauss(GAUSS_NODES)
    d = spacing.size
    mesh = np.meshgrid(*([x] * d), indexing='ij')
    offsets = np.stack([0.5 * spacing[k] * mesh[k].ravel() for k in range(d)], axis=1)
    weights = np.ones(1)
    for _ in range(d):
        weights = np.outer(weights, 0.5 * w).ravel()
    return offsets, weights


def near_field_coefficients(grid: Grid, params: ModelParams) -> np.ndarray:
    """
    Per-axis c_k, extrapolated in the cube size: the partial defect over a
    cube of half-width m cells approaches its limit as m^{order-2}.
    """
    d = grid.dim_d
    if not corrections_apply(grid, params):
        return np.zeros(d)
    order, _ = defect_orders(grid, params)
    b = params.p - 2.0 - params.dim_N - params.sp
    h = np.asarray(grid.spacing, dtype=float)
    vol = grid.cell_volume
    cells = NEAR_FIELD_CELLS[d]

    dirs, weights = sphere_quadrature(d)
    with np.errstate(divide='ignore'):
        exit_ = np.min(0.5 * h / np.abs(dirs), axis=1)
    own = (dirs ** 2).T @ (weights * exit_ ** order) / order

    span = np.arange(-2 * cells, 2 * cells + 1)
    index = np.stack([m.ravel() for m in np.meshgrid(*([span] * d), indexing='ij')], axis=1)
    index = index[np.any(index != 0, axis=1)]
    shell = np.max(np.abs(index), axis=1)
    offsets, rule = _cell_rule(h)

    inner = np.zeros(d)
    outer = np.zeros(d)
    for start in range(0, index.shape[0], CELL_BLOCK):
        centres = index[start:start + CELL_BLOCK] * h
        exact = np.tensordot(_integrand(centres[:, None, :] + offsets[None, :, :], b), rule, axes=([1], [0]))
        defect = vol * (exact - _integrand(centres, b))
        near = shell[start:start + CELL_BLOCK] <= cells
        inner += defect[near].sum(axis=0)
        outer += defect[~near].sum(axis=0)

    ratio = 2.0 ** (order - 2.0)
    partial, full = own + inner, own + inner + outer
    coefficients = (full - ratio * partial) / (1.0 - ratio)
    if np.any(coefficients <= 0):
        _logger.warning('Near-field coefficients %s are not positive; correction dropped', coefficients)
        return np.zeros(d)
    return coefficients


def transverse_factor(d: int, dim_N: int, sp: float) -> float:
    """∫_{ℝ^{d-1}} (1 + |v|²)^{-(N+sp)/2} dv."""
    a = 0.5 * (dim_N + sp)
    return float(np.pi ** (0.5 * (d - 1)) * gamma(a - 0.5 * (d - 1)) / gamma(a))


def half_lattice_defect(sigma: float, count: int) -> np.ndarray:
    """g(i) for i = 0 .. count-1, with an Euler-Maclaurin remainder past the last cell."""
    m = np.arange(1, count + TAIL_CELLS + 1, dtype=float)
    if sigma == 1.0:
        cell = np.log((m + 0.5) / (m - 0.5))
    else:
        cell = ((m + 0.5) ** (1.0 - sigma) - (m - 0.5) ** (1.0 - sigma)) / (1.0 - sigma)
    defect = cell - m ** -sigma
    remainder = sigma / 24.0 * (m[-1] + 0.5) ** (-sigma - 1.0)
    beyond = np.cumsum(defect[::-1])[::-1] + remainder
    return beyond[:count]


def boundary_layer(grid: Grid, params: ModelParams) -> np.ndarray:
    """Additive correction to the exterior weight of nodes next to a box face."""
    out = np.zeros(grid.n_interior)
    if grid.geometry.kind != BOX or not corrections_apply(grid, params):
        return out
    d, p = grid.dim_d, params.p
    _, sigma = defect_orders(grid, params)
    g = half_lattice_defect(sigma, BOUNDARY_LAYER_CELLS)
    factor = transverse_factor(d, params.dim_N, params.sp)
    points = grid.points
    lower, upper = grid.geometry.lower, grid.geometry.upper
    for k in range(d):
        h = grid.spacing[k]
        for delta in (points[:, k] - lower[k], upper[k] - points[:, k]):
            cell = np.rint(delta / h - 0.5).astype(np.int64)
            near = cell < BOUNDARY_LAYER_CELLS
            out[near] -= factor * delta[near] ** (1.0 - p) * h ** (1.0 - sigma) * g[cell[near]]
    return out
