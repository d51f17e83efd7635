"""
Convex inner solves and the purely sublinear problem.

``solve_inner`` minimizes (1/p)ρ_ε(u)^p - Σ rhs_i u_i, whose unique
minimizer solves the discrete equation mixed(u) = rhs.  ``solve_sublinear``
minimizes J, whose positive minimizer w solves
-Δ_p w + ε(-Δ_p)^s w = λ w^{q-1}.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from mlnpde.errors import GridMismatchError, ParameterError
from mlnpde.functionals.energy import (
    EnergyBreakdown, EnergyMode, energy_breakdown, energy_gradient, energy_value, power)
from mlnpde.lattice.grid import Field
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import mixed_action, mixed_power_sum
from mlnpde.operators.kernel import KernelMatrix
from mlnpde.solvers.descent import Monitor, descend, preconditioner
from mlnpde.solvers.report import SolveReport, descent_report

DEFAULT_MAX_ITER = 2000


def _ray_scale(values: np.ndarray, linear: float, kernel: KernelMatrix, params: ModelParams,
               exponent: float) -> float:
    """Minimizer c of c^p ρ^p/p - c^{exponent} linear/exponent along the ray through values."""
    rho_p = mixed_power_sum(values, kernel, params)
    if rho_p <= 0 or linear <= 0:
        return 0.0
    return (linear / rho_p) ** (1.0 / (params.p - exponent))


def solve_inner(rhs: Field, kernel: KernelMatrix, params: ModelParams, tol: float,
                max_iter: int = DEFAULT_MAX_ITER, initial: Optional[Field] = None,
                monitor: Optional[Monitor] = None) -> SolveReport:
    if rhs.grid is not kernel.grid:
        raise GridMismatchError('right-hand side and kernel live on different grids')
    if not tol > 0:
        raise ParameterError(f'tolerance must be positive, got {tol}')
    if not np.all(np.isfinite(rhs.values)):
        raise ParameterError('right-hand side is not finite')
    kernel.check(params)
    b = rhs.values
    p = params.p
    vol = kernel.grid.cell_volume
    precond = preconditioner(kernel, params.eps)

    if initial is not None:
        x0 = initial.values
    else:
        guess = precond.solve(b)
        x0 = _ray_scale(guess, float(b @ guess), kernel, params, 1.0) * guess

    def objective(x):
        return mixed_power_sum(x, kernel, params) / p - float(b @ x)

    def gradient(x):
        return mixed_action(x, kernel, params) - b

    result = descend(objective, gradient, x0, precond, vol, tol, max_iter, monitor=monitor)
    base = energy_breakdown(result.x, kernel, params, EnergyMode.sublinear())
    breakdown = EnergyBreakdown(base.local_term, base.nonlocal_term, float(b @ result.x), 0.0)
    return descent_report(result, kernel, breakdown, tol, 'inner')


def torsion(kernel: KernelMatrix, params: ModelParams, tol: float = 1e-10) -> Field:
    """Solution of mixed(τ) = vol·1; positive, and a convenient positive profile."""
    ones = Field(np.full(kernel.grid.n_interior, kernel.grid.cell_volume), kernel.grid)
    return solve_inner(ones, kernel, params, tol).field


def solve_sublinear(params: ModelParams, kernel: KernelMatrix, tol: float,
                    max_iter: int = DEFAULT_MAX_ITER, initial: Optional[Field] = None,
                    monitor: Optional[Monitor] = None) -> SolveReport:
    if not params.lam > 0:
        raise ParameterError(f'sublinear problem needs lambda > 0, got {params.lam}')
    kernel.check(params)
    mode = EnergyMode.sublinear()
    vol = kernel.grid.cell_volume
    start = torsion(kernel, params).values if initial is None else np.abs(initial.values)
    if initial is not None and initial.grid is not kernel.grid:
        raise GridMismatchError('initial guess lives on a different grid')
    concave = params.lam * float(np.sum(power(start, params.q))) * vol
    x0 = _ray_scale(start, concave, kernel, params, params.q) * start

    result = descend(lambda x: energy_value(x, kernel, params, mode),
                     lambda x: energy_gradient(x, kernel, params, mode),
                     x0, preconditioner(kernel, params.eps), vol, tol, max_iter, monitor=monitor)
    return descent_report(result, kernel, energy_breakdown(result.x, kernel, params, mode), tol,
                          'sublinear')

