"""
Small-energy minimizer of I inside the ball {ρ_ε < radius}.

Projected descent replaces the Ekeland step: any iterate leaving the ball
is pulled back radially to ρ_ε = radius - margin.  A minimizer that still
touches the shell when the descent ends is reported as boundary-stuck.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

import mlnpde.customlogger as log
from mlnpde.errors import GridMismatchError, ParameterError
from mlnpde.functionals.energy import EnergyMode, energy_breakdown, energy_gradient, energy_value
from mlnpde.functionals.fibering import fibering_profile
from mlnpde.functionals.thresholds import Thresholds
from mlnpde.lattice.grid import Field
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import mixed_power_sum
from mlnpde.operators.kernel import KernelMatrix
from mlnpde.solvers.descent import Monitor, descend, preconditioner
from mlnpde.solvers.inner import torsion
from mlnpde.solvers.report import BOUNDARY_STUCK, SolveReport, descent_report

DEFAULT_MAX_ITER = 2000
MARGIN_FRACTION = 1e-3
START_FRACTION = 0.25

_logger = log.get_logger('solvers')


def _initial_guess(kernel: KernelMatrix, params: ModelParams, limit: float) -> np.ndarray:
    """Torsion profile scaled to the first fibering minimum, or to a quarter of the ball."""
    tau = torsion(kernel, params)
    unit = tau.values / mixed_power_sum(tau.values, kernel, params) ** (1.0 / params.p)
    scale = START_FRACTION * limit
    if params.lam > 0:
        t1 = fibering_profile(tau, kernel, params).t1
        if t1 is not None and t1 < limit:
            scale = t1
    return scale * unit


def minimize_in_ball(params: ModelParams, kernel: KernelMatrix, radius: float, tol: float,
                     max_iter: int = DEFAULT_MAX_ITER, margin: Optional[float] = None,
                     initial: Optional[Field] = None,
                     stop: Optional[Callable[[np.ndarray], bool]] = None,
                     monitor: Optional[Monitor] = None,
                     bounds: Optional[Thresholds] = None) -> SolveReport:
    """
    With ``bounds`` the ball must sit inside the r₀ shell and λ below λ#.
    Without them the radius is taken as given (fibering-peak balls, λ ≤ 0 decay runs).
    """
    if not radius > 0:
        raise ParameterError(f'radius must be positive, got {radius}')
    if bounds is not None:
        if radius > bounds.r0:
            raise ParameterError(f'radius {radius:g} exceeds r0={bounds.r0:g}')
        if not 0 < params.lam < bounds.lambda_sharp:
            raise ParameterError(
                f'ball minimization needs 0 < lambda < lambda_sharp={bounds.lambda_sharp:g}, '
                f'got {params.lam:g}')
    else:
        _logger.debug('Ball of radius %g taken without the r0 check', radius)
    if not tol > 0:
        raise ParameterError(f'tolerance must be positive, got {tol}')
    kernel.check(params)
    margin = MARGIN_FRACTION * radius if margin is None else margin
    limit = radius - margin
    if not limit > 0:
        raise ParameterError(f'margin {margin} leaves no room inside radius {radius}')
    p = params.p
    mode = EnergyMode.full()

    def project(x):
        rho = mixed_power_sum(x, kernel, params) ** (1.0 / p)
        if rho > limit:
            return x * (limit / rho), True
        return x, False

    if initial is not None:
        if initial.grid is not kernel.grid:
            raise GridMismatchError('initial guess lives on a different grid')
        x0 = initial.values
    else:
        x0 = _initial_guess(kernel, params, limit)

    result = descend(lambda x: energy_value(x, kernel, params, mode),
                     lambda x: energy_gradient(x, kernel, params, mode),
                     x0, preconditioner(kernel, params.eps), kernel.grid.cell_volume,
                     tol, max_iter, project=project, stop=stop, monitor=monitor)
    status = BOUNDARY_STUCK if result.projection_active else None
    breakdown = energy_breakdown(result.x, kernel, params, mode)
    return descent_report(result, kernel, breakdown, tol, 'ball', status=status)
