"""
Rayleigh-quotient problems.

``principal_eigenpair`` minimizes ρ_ε(u)^p/‖u‖_p^p on the unit L^p sphere;
with the p = 2 preconditioner a unit step is one inverse-power iteration.
``norm_ratio_ascent`` maximizes ‖u‖_t/ρ_ε(u), optionally on the orthogonal
complement of a set of frozen modes; it yields the embedding constant C₂ and
the shrinking-subspace sequence β_k.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

import mlnpde.customlogger as log
from mlnpde.errors import ParameterError
from mlnpde.lattice.grid import Field
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import mixed_action, mixed_power_sum, phi
from mlnpde.operators.kernel import KernelMatrix
from mlnpde.solvers.descent import descend, preconditioner
from mlnpde.solvers.inner import torsion

DEFAULT_MAX_ITER = 1000

_logger = log.get_logger('solvers')


def _lp_mass(x: np.ndarray, t: float, vol: float) -> float:
    return float(np.sum(np.abs(x) ** t)) * vol


def principal_eigenpair(params: ModelParams, kernel: KernelMatrix, tol: float,
                        max_iter: int = DEFAULT_MAX_ITER) -> Tuple[float, Field]:
    if not tol > 0:
        raise ParameterError(f'tolerance must be positive, got {tol}')
    kernel.check(params)
    p = params.p
    vol = kernel.grid.cell_volume

    def normalize(x):
        return x / _lp_mass(x, p, vol) ** (1.0 / p), False

    def quotient(x):
        return mixed_power_sum(x, kernel, params) / _lp_mass(x, p, vol)

    def gradient(x):
        mass = _lp_mass(x, p, vol)
        return p * (mixed_action(x, kernel, params) - quotient(x) * vol * phi(x, p)) / mass

    start, _ = normalize(torsion(kernel, params).values)
    scale = p * quotient(start)
    result = descend(quotient, gradient, start, preconditioner(kernel, params.eps),
                     vol, tol * scale, max_iter, project=normalize)
    e1 = result.x if result.x.sum() >= 0 else -result.x
    lambda1 = quotient(e1)
    if not result.converged:
        _logger.warning('principal eigenpair not converged after %d iterations (residual %.3e)',
                        result.iterations, result.residual / scale)
    if np.any(e1 <= 0):
        _logger.warning('principal eigenfunction changes sign at %d nodes', int(np.sum(e1 <= 0)))
    _logger.debug('lambda1=%.10g for eps=%g in %d iterations', lambda1, params.eps, result.iterations)
    return lambda1, Field(e1, kernel.grid)


def norm_ratio_ascent(kernel: KernelMatrix, params: ModelParams, t: float,
                      frozen: Optional[np.ndarray] = None, initial: Optional[np.ndarray] = None,
                      tol: float = 1e-8, max_iter: int = DEFAULT_MAX_ITER) -> Tuple[float, Field, bool]:
    """
    Maximize ‖u‖_t/ρ_ε(u) over fields orthogonal to the columns of
    ``frozen`` (orthonormal in the Euclidean product).

    Returns (maximal ratio, maximizer scaled to ρ_ε = 1, converged).
    """
    if not t > 0:
        raise ParameterError(f'exponent must be positive, got {t}')
    p = params.p
    vol = kernel.grid.cell_volume

    def restrict(x):
        if frozen is not None and frozen.size:
            x = x - frozen @ (frozen.T @ x)
        return x

    def normalize(x):
        x = restrict(x)
        return x / mixed_power_sum(x, kernel, params) ** (1.0 / p), False

    def objective(x):
        return np.log(mixed_power_sum(x, kernel, params)) / p - np.log(_lp_mass(x, t, vol)) / t

    def gradient(x):
        g = (mixed_action(x, kernel, params) / mixed_power_sum(x, kernel, params)
             - vol * phi(x, t) / _lp_mass(x, t, vol))
        return restrict(g)

    start = torsion(kernel, params).values if initial is None else np.asarray(initial, dtype=float)
    start, _ = normalize(start)
    result = descend(objective, gradient, start, preconditioner(kernel, params.eps),
                     vol, tol, max_iter, project=normalize)
    x = result.x
    ratio = _lp_mass(x, t, vol) ** (1.0 / t) / mixed_power_sum(x, kernel, params) ** (1.0 / p)
    if x.sum() < 0:
        x = -x
    return float(ratio), Field(x, kernel.grid), result.converged


def embedding_constants(kernel: KernelMatrix, params: ModelParams, S0: float,
                        tol: float = 1e-8) -> Tuple[float, float]:
    """
    (C₁, C₂) with (1/r)‖u‖_r^r ≤ C₁ρ^r and (1/q)‖u‖_q^q ≤ C₂ρ^q.

    At the critical exponent C₁ comes from the Sobolev proxy S₀; below it
    from a direct ratio ascent.
    """
    q, r, p = params.q, params.r, params.p
    beta_q, _, _ = norm_ratio_ascent(kernel, params, q, tol=tol)
    C2 = beta_q ** q / q
    if params.is_critical:
        C1 = 1.0 / (r * S0 ** (r / p))
    else:
        beta_r, _, _ = norm_ratio_ascent(kernel, params, r, tol=tol)
        C1 = beta_r ** r / r
    _logger.debug('embedding constants C1=%g C2=%g', C1, C2)
    return C1, C2
