"""
Cut-off Talenti bubbles and the Sobolev constants measured on them.

    V(x) = K ε_b^{α(N-p)/(p(p-1))} / (ε_b^{αp/(p-1)} + |x-y|^{p/(p-1)})^{(N-p)/p}
    U(x) = V(x) φ(|x-y|)

φ is a cubic smoothstep equal to 1 on B_r(y) and 0 outside B_{2r}(y).
As ε_b → 0, ‖∇U‖_p^p → K₁ and ‖U‖_{p*}^{p*} → K₂ with K₁/K₂^{p/p*} = S₀.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import mlnpde.customlogger as log
from mlnpde.errors import ParameterError
from mlnpde.lattice.grid import Field, Grid
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import local_power_sum, nonlocal_power_sum
from mlnpde.operators.kernel import KernelMatrix

EPS_LADDER = (0.3, 0.2, 0.13, 0.09)
CUTOFF_FRACTION = 0.45

_logger = log.get_logger('bubbles')


@dataclass(frozen=True)
class BubbleParams:
    center: Tuple[float, ...]
    alpha: float
    eps_b: float
    cutoff_inner: float
    normalization: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f'alpha must be positive, got {self.alpha}')
        if not self.cutoff_inner > 0:
            raise ParameterError(f'cutoff radius must be positive, got {self.cutoff_inner}')
        if not 0 < self.eps_b < self.cutoff_inner ** (1.0 / self.alpha):
            raise ParameterError(
                f'eps_b must lie in (0, r^(1/alpha)) = (0, {self.cutoff_inner ** (1.0 / self.alpha):g})')


@dataclass(frozen=True)
class BubbleConstants:
    K1: float
    K2: float
    S0_est: float


@dataclass(frozen=True)
class AsymptoticRow:
    eps_b: float
    h: float
    quantity: str
    value: float
    fitted_slope: float
    theory_slope: float

    def as_row(self) -> list:
        return [self.eps_b, self.h, self.quantity, self.value, self.fitted_slope, self.theory_slope]


ASYMPTOTIC_COLUMNS = ['eps_b', 'h', 'quantity', 'value', 'fitted_slope', 'theory_slope']


def default_alpha(params: ModelParams) -> float:
    N, p, s = params.dim_N, params.p, params.s
    return min(1.0, (p - 1) / (2 * (N - p)), 1.0 / (2 * p * (1 - s)))


def default_cutoff(grid: Grid) -> float:
    return CUTOFF_FRACTION * grid.geometry.inradius


def eps_ladder(cutoff_inner: float, alpha: float) -> List[float]:
    return [c * cutoff_inner ** (1.0 / alpha) for c in EPS_LADDER]


def smoothstep_cutoff(dist: np.ndarray, r: float) -> np.ndarray:
    x = np.clip((dist - r) / r, 0.0, 1.0)
    return 1.0 - x * x * (3.0 - 2.0 * x)


def profile(dist: np.ndarray, bp: BubbleParams, params: ModelParams) -> np.ndarray:
    """Uncut bubble V at distances ``dist`` from the centre."""
    N, p, a = params.dim_N, params.p, bp.alpha
    scale = bp.normalization * bp.eps_b ** (a * (N - p) / (p * (p - 1)))
    return scale / (bp.eps_b ** (a * p / (p - 1)) + dist ** (p / (p - 1))) ** ((N - p) / p)


def _distances(grid: Grid, bp: BubbleParams, params: ModelParams) -> np.ndarray:
    if params.dim_N <= params.p:
        raise ParameterError('Talenti bubbles need N > p')
    if len(bp.center) != grid.dim_d:
        raise ParameterError('bubble centre has the wrong dimension')
    if not grid.geometry.contains_ball(bp.center, 2.0 * bp.cutoff_inner):
        raise ParameterError('bubble support B(center, 2r) escapes the domain')
    return np.linalg.norm(grid.points - np.asarray(bp.center), axis=1)


def talenti_bubble(bp: BubbleParams, grid: Grid, params: ModelParams) -> Field:
    dist = _distances(grid, bp, params)
    values = profile(dist, bp, params) * smoothstep_cutoff(dist, bp.cutoff_inner)
    return Field(values, grid)


def sobolev_quotient(values: np.ndarray, grid: Grid, params: ModelParams) -> float:
    """‖∇u‖_p^p / ‖u‖_{p*}^p."""
    pstar = params.critical_exponent
    mass = float(np.sum(np.abs(values) ** pstar)) * grid.cell_volume
    return local_power_sum(values, grid, params.p) / mass ** (params.p / pstar)


def bubble_family(grid: Grid, params: ModelParams, center: Optional[Sequence[float]] = None,
                  cutoff_inner: Optional[float] = None, alpha: Optional[float] = None,
                  eps_list: Optional[Sequence[float]] = None) -> List[BubbleParams]:
    center = tuple(grid.geometry.center) if center is None else tuple(center)
    cutoff_inner = default_cutoff(grid) if cutoff_inner is None else cutoff_inner
    alpha = default_alpha(params) if alpha is None else alpha
    eps_list = eps_ladder(cutoff_inner, alpha) if eps_list is None else eps_list
    return [BubbleParams(center, alpha, e, cutoff_inner) for e in eps_list]


def sobolev_quotient_scan(grid: Grid, params: ModelParams, **family) -> float:
    """Smallest discrete Sobolev quotient over a bubble family on ``grid`` (the S₀ proxy)."""
    quotients = [sobolev_quotient(talenti_bubble(bp, grid, params).values, grid, params)
                 for bp in bubble_family(grid, params, **family)]
    _logger.debug('Sobolev quotients over bubble ladder: %s', quotients)
    return float(min(quotients))


def random_quotient_floor(grid: Grid, params: ModelParams, samples: int = 64, seed: int = 0,
                          modes: int = 4) -> float:
    """Smallest Sobolev quotient over random smooth sine-series fields."""
    rng = np.random.default_rng(seed)
    lower, upper = grid.geometry.lower, grid.geometry.upper
    unit = (grid.points - lower) / (upper - lower)
    best = np.inf
    for _ in range(samples):
        values = np.zeros(grid.n_interior)
        for _ in range(modes):
            k = rng.integers(1, modes + 1, size=grid.dim_d)
            values += rng.standard_normal() * np.prod(np.sin(np.pi * k * unit), axis=1)
        best = min(best, sobolev_quotient(values, grid, params))
    return float(best)


def _fit_slope(eps: np.ndarray, values: np.ndarray) -> float:
    good = values > 0
    if good.sum() < 2:
        return float('nan')
    return float(np.polyfit(np.log(eps[good]), np.log(values[good]), 1)[0])


def _intercept(eps: np.ndarray, values: np.ndarray, exponent: float) -> float:
    """Limit as eps → 0 of values ≈ K + c eps^exponent, by least squares."""
    design = np.stack([np.ones_like(eps), eps ** exponent], axis=1)
    coeffs, *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(coeffs[0])


def bubble_constants(eps_list: Sequence[float], grids: Sequence[Grid], params: ModelParams,
                     center: Optional[Sequence[float]] = None,
                     cutoff_inner: Optional[float] = None,
                     alpha: Optional[float] = None,
                     normalization: float = 1.0,
                     kernels: Optional[Dict[int, KernelMatrix]] = None,
                     t_exponents: Sequence[float] = ()) -> Tuple[BubbleConstants, List[AsymptoticRow]]:
    """
    Extrapolated K₁, K₂, S₀ and the fitted asymptotic slopes.

    ``kernels`` maps a grid's position in ``grids`` to its kernel; the
    Gagliardo seminorm is only measured where a kernel is supplied.
    """
    if len(eps_list) < 3:
        raise ParameterError('need at least 3 eps_b values to fit slopes')
    if len(grids) < 2:
        raise ParameterError('need at least 2 grid resolutions to extrapolate')
    kernels = kernels or {}
    N, p, s = params.dim_N, params.p, params.s
    pstar = params.critical_exponent
    if pstar is None:
        raise ParameterError('bubble constants need N > p')
    alpha = default_alpha(params) if alpha is None else alpha
    eps = np.asarray(sorted(eps_list, reverse=True), dtype=float)
    a_grad = alpha * (N - p) / (p - 1)
    a_mass = alpha * N / (p - 1)
    a_gag = min(a_grad, alpha * p * (1 - s))

    order = sorted(range(len(grids)), key=lambda k: -max(grids[k].spacing))
    rows: List[AsymptoticRow] = []
    per_grid = []
    for k in order:
        grid = grids[k]
        h = max(grid.spacing)
        r = default_cutoff(grid) if cutoff_inner is None else cutoff_inner
        family = [BubbleParams(tuple(grid.geometry.center) if center is None else tuple(center),
                               alpha, e, r, normalization) for e in eps]
        grad, mass, gag = [], [], []
        inner = {t: [] for t in t_exponents}
        for bp in family:
            dist = _distances(grid, bp, params)
            values = profile(dist, bp, params) * smoothstep_cutoff(dist, r)
            grad.append(local_power_sum(values, grid, p))
            mass.append(float(np.sum(values ** pstar)) * grid.cell_volume)
            if k in kernels:
                gag.append(nonlocal_power_sum(values, kernels[k], p))
            ball = dist <= r
            for t in t_exponents:
                inner[t].append(float(np.sum(profile(dist[ball], bp, params) ** t)) * grid.cell_volume)
        grad, mass = np.array(grad), np.array(mass)
        K1 = _intercept(eps, grad, a_grad)
        K2 = _intercept(eps, mass, a_mass)
        per_grid.append((h, K1, K2))

        def emit(quantity, values, slope, theory):
            rows.extend(AsymptoticRow(float(e), h, quantity, float(v), slope, theory)
                        for e, v in zip(eps, values))

        emit('grad_p^p', grad, _fit_slope(eps, np.abs(grad - K1)), a_grad)
        emit('mass_p*', mass, _fit_slope(eps, np.abs(K2 - mass)), a_mass)
        if gag:
            emit('gagliardo^p', gag, _fit_slope(eps, np.array(gag)), a_gag)
        for t in t_exponents:
            emit(f'ball_V^{t:g}', inner[t], _fit_slope(eps, np.array(inner[t])),
                 alpha * (N - t * (N - p) / p))
        quotient = K1 / K2 ** (p / pstar)
        emit('S0', [quotient] * len(eps), float('nan'), float('nan'))

    (h_c, K1_c, K2_c), (h_f, K1_f, K2_f) = per_grid[-2], per_grid[-1]
    factor = (h_c / h_f) ** 2 - 1.0
    K1 = K1_f + (K1_f - K1_c) / factor
    K2 = K2_f + (K2_f - K2_c) / factor
    constants = BubbleConstants(K1, K2, K1 / K2 ** (p / pstar))
    _logger.info('Bubble constants K1=%g K2=%g S0=%g', constants.K1, constants.K2, constants.S0_est)
    return constants, rows
