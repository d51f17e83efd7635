"""
Sub/supersolution machinery for the minimal positive branch.

``monotone_iterate`` runs u_{n+1} = inner solve of vol·f_λ(u_n) from a
subsolution, checking the ordering chain sub ≤ u_n ≤ u_{n+1} ≤ super at
every step.  ``find_supersolution`` scales the torsion profile until it is a
discrete supersolution.  ``minimize_truncated`` minimizes Î between a
sub- and a supersolution and checks that the minimizer stays pinched.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

import mlnpde.customlogger as log
from mlnpde.errors import GridMismatchError, ParameterError
from mlnpde.functionals.energy import (
    EnergyMode, dual_norm, energy_breakdown, energy_gradient, energy_value, source)
from mlnpde.lattice.grid import Field
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import mixed_action
from mlnpde.operators.kernel import KernelMatrix
from mlnpde.solvers.descent import descend, preconditioner
from mlnpde.solvers.inner import solve_inner, torsion
from mlnpde.solvers.report import (
    BLOWUP, ITERATE_LIMIT, MINIMIZER, MONOTONICITY_BREACH, OK, PINCHING_FAILURE, SolveReport,
    descent_report)

DEFAULT_MAX_OUTER = 500
DEFAULT_SLACK = 1e-10
INNER_TOL = 1e-11
SUPERSOLUTION_CAP = 1e3
SCALE_SAMPLES = 4000

_logger = log.get_logger('solvers')

IterateMonitor = Callable[[int, np.ndarray], None]


def _allowance(slack: float, *fields: np.ndarray) -> float:
    """Absolute slack on unit-scaled fields."""
    scale = max([1.0] + [float(np.max(np.abs(f))) for f in fields if f.size])
    return slack * scale


def strong_residual(values: np.ndarray, kernel: KernelMatrix, params: ModelParams) -> np.ndarray:
    """Node-wise (mixed(u) - vol·f_λ(u₊))/vol; ≤ 0 for subsolutions, ≥ 0 for supersolutions."""
    vol = kernel.grid.cell_volume
    return (mixed_action(values, kernel, params) - vol * source(values, params)) / vol


def monotone_iterate(sub: Field, super_: Optional[Field], params: ModelParams, kernel: KernelMatrix,
                     tol: float, max_outer: int = DEFAULT_MAX_OUTER,
                     inner_tol: float = INNER_TOL, slack: float = DEFAULT_SLACK,
                     cap: Optional[float] = None,
                     monitor: Optional[IterateMonitor] = None) -> SolveReport:
    """
    Increasing iteration from ``sub``; ``super_`` may be None when only the
    blowup ``cap`` bounds the sequence (the extremal-parameter probes).
    """
    if sub.grid is not kernel.grid or (super_ is not None and super_.grid is not kernel.grid):
        raise GridMismatchError('sub/supersolution and kernel live on different grids')
    if not tol > 0:
        raise ParameterError(f'tolerance must be positive, got {tol}')
    kernel.check(params)
    lower = sub.values
    upper = None if super_ is None else super_.values
    vol = kernel.grid.cell_volume
    margin = _allowance(slack, lower, *(() if upper is None else (upper,)))
    # node-wise residual bound implied by a dual-norm tolerance
    residual_margin = 10.0 * max(tol, inner_tol) / np.sqrt(vol) + margin

    if np.any(lower < -margin):
        raise ParameterError('subsolution must be nonnegative')
    if upper is not None and np.any(lower > upper + margin):
        raise ParameterError('need sub <= super at every node')
    if np.max(strong_residual(lower, kernel, params)) > residual_margin:
        raise ParameterError('sub is not a discrete subsolution')
    if upper is not None and np.min(strong_residual(upper, kernel, params)) < -residual_margin:
        raise ParameterError('super is not a discrete supersolution')

    u = lower.copy()
    status = ITERATE_LIMIT
    residual = np.inf
    outer = 0
    for outer in range(1, max_outer + 1):
        rhs = Field(vol * source(u, params), kernel.grid)
        inner = solve_inner(rhs, kernel, params, inner_tol, initial=Field(u, kernel.grid))
        nxt = inner.field.values
        if not np.all(np.isfinite(nxt)) or (cap is not None and np.max(nxt) > cap):
            _logger.warning('monotone iteration blew past cap %s at step %d', cap, outer)
            status = BLOWUP
            u = nxt
            break
        if np.any(nxt < u - margin) or np.any(nxt < lower - margin) or (
                upper is not None and np.any(nxt > upper + margin)):
            _logger.warning('monotone iteration breached ordering at step %d (min step %.3e)',
                            outer, float(np.min(nxt - u)))
            status = MONOTONICITY_BREACH
            u = nxt
            break
        change = float(np.max(np.abs(nxt - u)))
        u = nxt
        if monitor is not None:
            monitor(outer, u)
        residual = dual_norm(energy_gradient(u, kernel, params, EnergyMode.full()), vol)
        _logger.debug('monotone step %d change %.3e residual %.3e sup %.6g', outer, change, residual,
                      float(np.max(u)))
        if change <= tol and residual <= tol:
            status = OK
            break

    if status != OK:
        residual = dual_norm(energy_gradient(u, kernel, params, EnergyMode.full()), vol)
    converged = status == OK
    breakdown = energy_breakdown(u, kernel, params, EnergyMode.full())
    report = SolveReport(Field(u, kernel.grid), breakdown, residual, outer, converged,
                         MINIMIZER if converged else ITERATE_LIMIT, tol, status)
    if converged:
        _logger.info('monotone iteration converged in %d steps, sup %.6g, energy %.10g',
                     outer, report.field.sup_norm(), breakdown.total)
    else:
        _logger.warning('monotone iteration stopped (%s) after %d steps', status, outer)
    return report


def find_supersolution(params: ModelParams, kernel: KernelMatrix, cap: float = SUPERSOLUTION_CAP,
                       above: Optional[Field] = None) -> Optional[Field]:
    """
    Largest c·τ (τ the torsion profile, sup ≤ cap) whose strong residual is
    node-wise nonnegative, and which dominates ``above`` when given.
    Returns None when no scale qualifies.
    """
    kernel.check(params)
    tau = torsion(kernel, params).values
    if np.any(tau <= 0):
        _logger.warning('torsion profile is not positive; no supersolution candidate')
        return None
    vol = kernel.grid.cell_volume
    # mixed(cτ) = c^{p-1} mixed(τ) by homogeneity
    drive = mixed_action(tau, kernel, params) / vol
    p = params.p
    top = float(np.max(tau))
    floor = 0.0 if above is None else max(float(np.max(above.values / tau)), 0.0)
    high = cap / top
    low = max(floor, 1e-12 * high)
    if low > high:
        return None
    for c in np.geomspace(high, low, SCALE_SAMPLES):
        candidate = c * tau
        if np.all(c ** (p - 1) * drive - source(candidate, params) >= 0.0):
            _logger.debug('supersolution found at scale %.6g (sup %.6g)', c, c * top)
            return Field(candidate, kernel.grid)
    _logger.info('no supersolution c*torsion with sup <= %g for lambda=%g', cap, params.lam)
    return None


def minimize_truncated(lower: Field, upper: Field, params: ModelParams, kernel: KernelMatrix,
                       tol: float, max_iter: int = 2000,
                       slack: float = DEFAULT_SLACK) -> SolveReport:
    """
    Global minimizer ẑ of Î.  The report carries the residual of the
    untruncated equation and the tolerance 2·tol it is held to.
    """
    if lower.grid is not kernel.grid:
        raise GridMismatchError('truncation bounds and kernel live on different grids')
    if np.any(lower.values <= 0):
        raise ParameterError('truncation needs lower > 0 at every node')
    mode = EnergyMode.truncated(lower, upper)
    kernel.check(params)
    vol = kernel.grid.cell_volume
    result = descend(lambda x: energy_value(x, kernel, params, mode),
                     lambda x: energy_gradient(x, kernel, params, mode),
                     lower.values, preconditioner(kernel, params.eps), vol, tol, max_iter)
    z = result.x
    margin = _allowance(slack, upper.values)
    escaped = float(max(np.max(lower.values - z), np.max(z - upper.values)))
    untruncated = dual_norm(energy_gradient(z, kernel, params, EnergyMode.full()), vol)
    status = None
    if escaped > margin:
        _logger.warning('truncated minimizer escapes [lower, upper] by %.3e', escaped)
        status = PINCHING_FAILURE
    elif untruncated > 2.0 * tol:
        _logger.warning('truncated minimizer misses the untruncated equation: residual %.3e', untruncated)
        status = PINCHING_FAILURE
    result.residual = untruncated
    return descent_report(result, kernel, energy_breakdown(z, kernel, params, EnergyMode.full()),
                          2.0 * tol, 'truncated', status=status)
