"""
Dense fractional interaction weights.

    w_ij = 2 vol / |x_i - x_j|^{N+sp},   i ≠ j,   w_ii = 0.

The zero diagonal realizes the principal value: symmetric differences
u_i - u_j cancel the singular self-interaction.  What the midpoint sum
loses next to each node is carried separately as per-axis near-field
coefficients and a boundary-layer term on the exterior weights (see
``nearfield``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

import mlnpde.customlogger as log
from mlnpde.errors import KernelBudgetError, ParameterError
from mlnpde.lattice.grid import Grid
from mlnpde.lattice.params import ModelParams
from mlnpde.lattice.tail import ExteriorTail, exterior_tail
from mlnpde.operators.nearfield import boundary_layer, near_field_coefficients

KERNEL_MAX_NODES = int(os.getenv('MLNPDE_KERNEL_MAX_NODES', '8192'))

_logger = log.get_logger('operators')


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    grid: Grid
    weights: np.ndarray
    tails: ExteriorTail
    dim_N: int
    s: float
    p: float
    near_field: Optional[np.ndarray] = None
    boundary: Optional[np.ndarray] = None
    row_sums: np.ndarray = field(init=False, repr=False)
    self_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.near_field is None:
            object.__setattr__(self, 'near_field', np.zeros(self.grid.dim_d))
        if self.boundary is None:
            object.__setattr__(self, 'boundary', np.zeros(self.weights.shape[0]))
        row_sums = self.weights.sum(axis=1)
        self_weights = self.tails.tail + self.boundary
        for array in (self.weights, self.near_field, self.boundary, row_sums, self_weights):
            array.setflags(write=False)
        object.__setattr__(self, 'row_sums', row_sums)
        object.__setattr__(self, 'self_weights', self_weights)

    @property
    def corrected(self) -> bool:
        return bool(np.any(self.near_field))

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def check(self, params: ModelParams) -> None:
        """Refuse parameters whose exponent N + sp differs from the assembled one."""
        if (params.dim_N, params.s, params.p) != (self.dim_N, self.s, self.p):
            raise ParameterError(
                f'kernel built for (N, s, p) = {(self.dim_N, self.s, self.p)}, '
                f'got {(params.dim_N, params.s, params.p)}')


def assemble_kernel(grid: Grid, params: ModelParams,
                    truncation_radius: Optional[float] = None,
                    max_nodes: Optional[int] = None) -> KernelMatrix:
    n = grid.n_interior
    budget = KERNEL_MAX_NODES if max_nodes is None else int(max_nodes)
    if n > budget:
        raise KernelBudgetError(
            f'{n} interior nodes exceed the dense kernel budget of {budget} '
            f'({8 * n * n / 2 ** 20:.0f} MiB requested)')
    exponent = params.dim_N + params.sp
    if not exponent > 0:
        raise ParameterError(f'N + sp must be positive, got {exponent}')

    dist = squareform(pdist(grid.points))
    weights = np.zeros_like(dist)
    off = dist > 0
    weights[off] = 2.0 * grid.cell_volume / dist[off] ** exponent
    tails = exterior_tail(grid, params, truncation_radius)

    near = near_field_coefficients(grid, params)
    boundary = boundary_layer(grid, params)
    if np.any(tails.tail + boundary <= 0):
        _logger.warning('Boundary layer would make an exterior weight non-positive; dropped')
        boundary = np.zeros(n)
    _logger.info('Assembled %dx%d kernel (N=%d, s=%g, p=%g, near field %s)',
                 n, n, params.dim_N, params.s, params.p, np.array2string(near, precision=4))
    return KernelMatrix(grid, weights, tails, params.dim_N, params.s, params.p, near, boundary)
