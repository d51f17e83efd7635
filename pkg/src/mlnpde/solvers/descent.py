"""
Preconditioned descent with Armijo backtracking.

Every minimization in the package runs through ``descend``.  Directions are
-P⁻¹g with P the p = 2 mixed operator (local Laplacian plus ε times the
linear fractional operator), factored once per kernel and ε.  For p = 2
linear problems the first unit step is exact.
"""

from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

import mlnpde.customlogger as log
from mlnpde.functionals.energy import dual_norm
from mlnpde.operators.discrete import linearized_matrix
from mlnpde.operators.kernel import KernelMatrix

ARMIJO = 1e-4
STEP_MIN = 1e-14
STEP_MAX = 1e8

_logger = log.get_logger('solvers')
_cache = weakref.WeakKeyDictionary()
_cache_lock = threading.Lock()


class Preconditioner:
    """Cholesky-factored p = 2 mixed operator."""

    def __init__(self, kernel: KernelMatrix, eps: float):
        self.matrix = linearized_matrix(kernel, eps)
        self._factor = cho_factor(self.matrix, lower=True)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self._factor, rhs)

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ (self.matrix @ y))


def preconditioner(kernel: KernelMatrix, eps: float) -> Preconditioner:
    with _cache_lock:
        per_kernel = _cache.setdefault(kernel, {})
        if eps not in per_kernel:
            _logger.debug('Factoring preconditioner for %d nodes, eps=%g', kernel.size, eps)
            per_kernel[eps] = Preconditioner(kernel, eps)
        return per_kernel[eps]


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    residual: float
    iterations: int
    converged: bool
    stagnated: bool = False
    projection_active: bool = False


Projection = Callable[[np.ndarray], Tuple[np.ndarray, bool]]
Monitor = Callable[[int, float, float], None]


def descend(objective: Callable[[np.ndarray], float],
            gradient: Callable[[np.ndarray], np.ndarray],
            x0: np.ndarray,
            precond: Preconditioner,
            volume: float,
            tol: float,
            max_iter: int,
            project: Optional[Projection] = None,
            stop: Optional[Callable[[np.ndarray], bool]] = None,
            monitor: Optional[Monitor] = None) -> DescentResult:
    """
    Minimize ``objective`` from ``x0`` until the dual residual norm of
    ``gradient`` drops to ``tol`` (or ``stop(x)`` holds).

    With ``project`` the iteration is projected descent; the result records
    whether the last accepted step was clipped by the projection.
    """
    x = np.array(x0, dtype=float)
    active = False
    if project is not None:
        x, active = project(x)
    value = objective(x)
    g = gradient(x)
    residual = dual_norm(g, volume)
    step = 1.0
    stagnated = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        if residual <= tol or (stop is not None and stop(x)):
            iteration -= 1
            break
        direction = -precond.solve(g)
        t = step
        accepted = None
        while t >= STEP_MIN:
            trial = x + t * direction
            clipped = False
            if project is not None:
                trial, clipped = project(trial)
            trial_value = objective(trial)
            if trial_value <= value + ARMIJO * float(g @ (trial - x)):
                accepted = (trial, trial_value, clipped)
                break
            t *= 0.5
        if accepted is None:
            # energy differences below roundoff: accept a unit step that still lowers the residual
            trial = x + direction
            clipped = False
            if project is not None:
                trial, clipped = project(trial)
            trial_g = gradient(trial)
            if dual_norm(trial_g, volume) < residual:
                x, value, active = trial, objective(trial), clipped
                g, residual = trial_g, dual_norm(trial_g, volume)
                continue
            stagnated = True
            _logger.debug('line search stagnated at iteration %d, residual %g', iteration, residual)
            break
        x, value, active = accepted
        step = min(2.0 * t, STEP_MAX) if t == step else t
        g = gradient(x)
        residual = dual_norm(g, volume)
        if monitor is not None:
            monitor(iteration, value, residual)
        _logger.debug('iter %d energy %.12g residual %.3e step %.3e', iteration, value, residual, t)
    converged = residual <= tol or (stop is not None and stop(x))
    return DescentResult(x, value, residual, iteration, converged, stagnated, active)
