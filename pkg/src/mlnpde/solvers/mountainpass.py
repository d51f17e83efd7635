"""
Mountain-pass solutions by discretized-path descent.

A polyline joins the small-energy minimizer to a field of lower energy.
The highest interior node climbs: it moves along -P⁻¹g with the component
tangent to the path reversed, so it descends across the path and ascends
along it.  Every few steps the two halves of the path on either side of the
climbing node are redistributed at equal ρ_ε arc length.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

import mlnpde.customlogger as log
from mlnpde.errors import GridMismatchError, ParameterError
from mlnpde.functionals.energy import EnergyMode, dual_norm, energy_breakdown, energy_gradient, energy_value
from mlnpde.functionals.thresholds import mountain_pass_window
from mlnpde.lattice.grid import Field
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import mixed_power_sum
from mlnpde.operators.kernel import KernelMatrix
from mlnpde.solvers.descent import Monitor, preconditioner
from mlnpde.solvers.report import (
    ITERATE_LIMIT, LEVEL_WINDOW, MOUNTAIN_PASS, OK, STAGNATED, SolveReport)

MIN_PATH_NODES = 16
DEFAULT_MAX_ITER = 3000
REPARAMETRIZE_EVERY = 10
STEP_GROWTH = 1.5
STEP_MIN = 1e-14
MAX_DOUBLINGS = 60

_logger = log.get_logger('solvers')


def path_energies(base: Field, direction: Field, ts: Sequence[float], kernel: KernelMatrix,
                  params: ModelParams) -> List[Tuple[float, float]]:
    """(t, I(base + t·direction)) along a straight ray."""
    base.same_grid(direction)
    return [(float(t), energy_value(base.values + t * direction.values, kernel, params, EnergyMode.full()))
            for t in ts]


def top_endpoint(base: Field, bubble: Field, params: ModelParams, kernel: KernelMatrix,
                 r0: float) -> Tuple[float, Field]:
    """
    Smallest R₀ = 2^k with ρ_ε(base + R₀U) > r₀ and I(base + R₀U) < I(base).
    """
    base.same_grid(bubble)
    e_base = energy_value(base.values, kernel, params, EnergyMode.full())
    R0 = 1.0
    for _ in range(MAX_DOUBLINGS):
        candidate = base.values + R0 * bubble.values
        rho = mixed_power_sum(candidate, kernel, params) ** (1.0 / params.p)
        if rho > r0 and energy_value(candidate, kernel, params, EnergyMode.full()) < e_base:
            _logger.debug('top endpoint at R0=%g (rho=%g)', R0, rho)
            return R0, Field(candidate, kernel.grid)
        R0 *= 2.0
    raise ParameterError('no R0 up to 2^60 puts base + R0*U below the base energy')


def _arc_redistribute(path: np.ndarray, start: int, stop: int, kernel: KernelMatrix,
                      params: ModelParams) -> None:
    """Place nodes start..stop (inclusive ends fixed) at equal ρ_ε arc length."""
    if stop - start < 2:
        return
    segment = path[start:stop + 1]
    lengths = np.array([mixed_power_sum(b - a, kernel, params) ** (1.0 / params.p)
                        for a, b in zip(segment[:-1], segment[1:])])
    arc = np.concatenate([[0.0], np.cumsum(lengths)])
    if not arc[-1] > 0:
        return
    targets = np.linspace(0.0, arc[-1], len(segment))
    fresh = segment.copy()
    for k in range(1, len(segment) - 1):
        j = min(int(np.searchsorted(arc, targets[k], side='right')) - 1, len(segment) - 2)
        span = arc[j + 1] - arc[j]
        w = 0.0 if span <= 0 else (targets[k] - arc[j]) / span
        fresh[k] = (1.0 - w) * segment[j] + w * segment[j + 1]
    path[start:stop + 1] = fresh


def mountain_pass(base: SolveReport, top: Field, params: ModelParams, kernel: KernelMatrix,
                  path_nodes: int = MIN_PATH_NODES, tol: float = 1e-6,
                  max_iter: int = DEFAULT_MAX_ITER, S0_estimate: Optional[float] = None,
                  monitor: Optional[Monitor] = None) -> SolveReport:
    if path_nodes < MIN_PATH_NODES:
        raise ParameterError(f'path needs at least {MIN_PATH_NODES} nodes, got {path_nodes}')
    if top.grid is not kernel.grid or base.field.grid is not kernel.grid:
        raise GridMismatchError('path endpoints and kernel live on different grids')
    kernel.check(params)
    mode = EnergyMode.full()
    vol = kernel.grid.cell_volume
    precond = preconditioner(kernel, params.eps)

    def value(x):
        return energy_value(x, kernel, params, mode)

    e_base = value(base.field.values)
    if not value(top.values) < e_base:
        raise ParameterError('mountain pass needs I(top) < I(base)')

    weights = np.linspace(0.0, 1.0, path_nodes)[:, None]
    path = (1.0 - weights) * base.field.values[None, :] + weights * top.values[None, :]
    energies = np.array([value(x) for x in path])
    _logger.debug('initial path maximum %.10g (base %.10g)', energies[1:-1].max(), e_base)

    delta = 1.0
    residual = np.inf
    status = ITERATE_LIMIT
    iteration = 0
    m = 1
    for iteration in range(1, max_iter + 1):
        m = 1 + int(np.argmax(energies[1:-1]))
        x = path[m]
        g = energy_gradient(x, kernel, params, mode)
        residual = dual_norm(g, vol)
        if residual <= tol:
            iteration -= 1
            status = OK
            break
        tangent = path[m + 1] - path[m - 1]
        tangent /= np.sqrt(precond.inner(tangent, tangent))
        direction = -precond.solve(g) + 2.0 * float(g @ tangent) * tangent
        moved = False
        while delta >= STEP_MIN:
            trial = x + delta * direction
            trial_residual = dual_norm(energy_gradient(trial, kernel, params, mode), vol)
            if trial_residual < residual:
                path[m] = trial
                energies[m] = value(trial)
                delta = min(STEP_GROWTH * delta, 1.0)
                moved = True
                break
            delta *= 0.5
        if not moved:
            status = STAGNATED
            _logger.debug('mountain pass stagnated at step %d, residual %.3e', iteration, residual)
            break
        if iteration % REPARAMETRIZE_EVERY == 0:
            _arc_redistribute(path, 0, m, kernel, params)
            _arc_redistribute(path, m, path_nodes - 1, kernel, params)
            energies = np.array([value(p) for p in path])
        if monitor is not None:
            monitor(iteration, float(energies[m]), residual)
        _logger.debug('mp step %d node %d level %.12g residual %.3e step %.3e',
                      iteration, m, energies[m], residual, delta)

    field = Field(path[m], kernel.grid)
    breakdown = energy_breakdown(path[m], kernel, params, mode)
    converged = status == OK
    level = breakdown.total
    upper = None if S0_estimate is None else mountain_pass_window(e_base, S0_estimate, params.dim_N, params.p)
    if converged and (level <= 0 or level <= e_base or (upper is not None and level >= upper)):
        _logger.warning('mountain-pass level %.10g outside window (%.10g, %s)', level,
                        max(e_base, 0.0), upper)
        status = LEVEL_WINDOW
    report = SolveReport(field, breakdown, residual, iteration, converged,
                         MOUNTAIN_PASS if converged else ITERATE_LIMIT, tol, status)
    if converged:
        _logger.info('mountain pass converged in %d steps at level %.10g', iteration, level)
    else:
        _logger.warning('mountain pass stopped (%s) after %d steps, residual %.3e',
                        status, iteration, residual)
    return report
