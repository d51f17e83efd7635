"""
Energy functionals and the weak-form residual.

    I(u)  = (1/p)ρ_ε(u)^p - (λ/q)‖u₊‖_q^q - (1/r)‖u₊‖_r^r
    J(u)  = (1/p)ρ_ε(u)^p - (λ/q)‖u₊‖_q^q
    K(u)  = (1/p)ρ_ε(u)^p - ∫ f_λ(v) u₊                     (v > 0 frozen)
    Î(u)  = (1/p)ρ_ε(u)^p - ∫ F̂_λ(x, u)                     (f_λ clamped to [lower, upper])

with f_λ(t) = λ t^{q-1} + t^{r-1}.  The array-level ``energy_value`` and
``energy_gradient`` are what the solvers iterate on; the gradient is volume
weighted, matching ``operators.discrete``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from mlnpde.errors import GridMismatchError, ParameterError
from mlnpde.lattice.grid import Field
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import (
    local_power_sum, mixed_action, nonlocal_power_sum)
from mlnpde.operators.kernel import KernelMatrix

FULL = 'I'
SUBLINEAR = 'J'
AUXILIARY = 'K'
TRUNCATED = 'I_hat'


@dataclass(frozen=True)
class EnergyBreakdown:
    local_term: float
    nonlocal_term: float
    concave_term: float
    critical_term: float
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, 'total',
            self.local_term + self.nonlocal_term - self.concave_term - self.critical_term)

    def as_dict(self) -> dict:
        return {
            'local': self.local_term, 'nonlocal': self.nonlocal_term,
            'concave': self.concave_term, 'critical': self.critical_term,
            'total': self.total,
        }


@dataclass(frozen=True, eq=False)
class EnergyMode:
    kind: str
    v: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    @classmethod
    def full(cls) -> 'EnergyMode':
        return cls(FULL)

    @classmethod
    def sublinear(cls) -> 'EnergyMode':
        return cls(SUBLINEAR)

    @classmethod
    def auxiliary(cls, v: Field) -> 'EnergyMode':
        if np.any(v.values <= 0):
            raise ParameterError('auxiliary energy needs v > 0 at every node')
        return cls(AUXILIARY, v=v.values)

    @classmethod
    def truncated(cls, lower: Field, upper: Field) -> 'EnergyMode':
        lower.same_grid(upper)
        if np.any(lower.values > upper.values):
            raise ParameterError('truncation needs lower <= upper at every node')
        return cls(TRUNCATED, lower=lower.values, upper=upper.values)


ModeLike = Union[EnergyMode, str, None]


def _resolve(mode: ModeLike) -> EnergyMode:
    if mode is None:
        return EnergyMode.full()
    if isinstance(mode, str):
        if mode == FULL:
            return EnergyMode.full()
        if mode == SUBLINEAR:
            return EnergyMode.sublinear()
        raise ParameterError(f'mode {mode!r} needs its fields; build it with EnergyMode')
    return mode


def power(t: np.ndarray, exponent: float) -> np.ndarray:
    """t^exponent on t >= 0, zero elsewhere."""
    return np.where(t > 0, np.abs(t) ** exponent, 0.0)


def f_lambda(t: float, params: ModelParams,
             truncation: Optional[Tuple[Field, Field, int]] = None) -> float:
    """
    λ|t|^{q-2}t + |t|^{r-2}t, or its truncation f̂ clamping t into
    [lower_i, upper_i] when ``truncation = (lower, upper, i)`` is given.
    """
    if truncation is not None:
        lower, upper, index = truncation
        lo, up = float(lower.values[index]), float(upper.values[index])
        if lo > up:
            raise ParameterError('truncation needs lower <= upper')
        t = min(max(t, lo), up)
    a = abs(t)
    sign = np.sign(t)
    return float(sign * (params.lam * a ** (params.q - 1) + a ** (params.r - 1)))


def source(values: np.ndarray, params: ModelParams) -> np.ndarray:
    """f_λ(u₊) node-wise."""
    return params.lam * power(values, params.q - 1) + power(values, params.r - 1)


def _clamped_primitive(t, lower, upper, exponent):
    """Primitive of t ↦ clamp(t, lower, upper)^{exponent-1}, vanishing at 0."""
    g_lo = lower ** (exponent - 1)
    g_up = upper ** (exponent - 1)
    below = g_lo * t
    inside = g_lo * lower + (np.clip(t, lower, upper) ** exponent - lower ** exponent) / exponent
    above = g_up * np.maximum(t - upper, 0.0)
    return np.where(t <= lower, below, inside + above)


def nonlinear_terms(values: np.ndarray, params: ModelParams, mode: EnergyMode,
                    volume: float) -> Tuple[float, float]:
    """(concave, critical) integrals of the given mode."""
    lam, q, r = params.lam, params.q, params.r
    if mode.kind == FULL:
        return (lam / q * float(np.sum(power(values, q))) * volume,
                float(np.sum(power(values, r))) / r * volume)
    if mode.kind == SUBLINEAR:
        return lam / q * float(np.sum(power(values, q))) * volume, 0.0
    if mode.kind == AUXILIARY:
        positive = np.maximum(values, 0.0)
        return (lam * float(np.sum(mode.v ** (q - 1) * positive)) * volume,
                float(np.sum(mode.v ** (r - 1) * positive)) * volume)
    if mode.kind == TRUNCATED:
        return (lam * float(np.sum(_clamped_primitive(values, mode.lower, mode.upper, q))) * volume,
                float(np.sum(_clamped_primitive(values, mode.lower, mode.upper, r))) * volume)
    raise ParameterError(f'unknown energy mode {mode.kind!r}')


def nonlinear_gradient(values: np.ndarray, params: ModelParams, mode: EnergyMode,
                       volume: float) -> np.ndarray:
    lam, q, r = params.lam, params.q, params.r
    if mode.kind == FULL:
        return volume * source(values, params)
    if mode.kind == SUBLINEAR:
        return volume * lam * power(values, q - 1)
    if mode.kind == AUXILIARY:
        active = (values > 0).astype(float)
        return volume * active * (lam * mode.v ** (q - 1) + mode.v ** (r - 1))
    if mode.kind == TRUNCATED:
        clamped = np.clip(values, mode.lower, mode.upper)
        return volume * (lam * clamped ** (q - 1) + clamped ** (r - 1))
    raise ParameterError(f'unknown energy mode {mode.kind!r}')


def energy_breakdown(values: np.ndarray, kernel: KernelMatrix, params: ModelParams,
                     mode: ModeLike = None) -> EnergyBreakdown:
    mode = _resolve(mode)
    p = params.p
    vol = kernel.grid.cell_volume
    local = local_power_sum(values, kernel.grid, p) / p
    nonlocal_ = params.eps * nonlocal_power_sum(values, kernel, p) / p if params.eps else 0.0
    concave, critical = nonlinear_terms(values, params, mode, vol)
    return EnergyBreakdown(local, nonlocal_, concave, critical)


def energy_value(values: np.ndarray, kernel: KernelMatrix, params: ModelParams,
                 mode: ModeLike = None) -> float:
    return energy_breakdown(values, kernel, params, mode).total


def energy_gradient(values: np.ndarray, kernel: KernelMatrix, params: ModelParams,
                    mode: ModeLike = None) -> np.ndarray:
    mode = _resolve(mode)
    return mixed_action(values, kernel, params) - nonlinear_gradient(
        values, params, mode, kernel.grid.cell_volume)


def dual_norm(residual: np.ndarray, volume: float) -> float:
    """Discrete L² norm of the strong residual residual_i / vol."""
    return float(np.sqrt(np.sum(residual ** 2) / volume))


def energy(u: Field, kernel: KernelMatrix, params: ModelParams,
           mode: ModeLike = None) -> EnergyBreakdown:
    if u.grid is not kernel.grid:
        raise GridMismatchError('field and kernel live on different grids')
    kernel.check(params)
    return energy_breakdown(u.values, kernel, params, mode)


def residual_dual_norm(u: Field, kernel: KernelMatrix, params: ModelParams) -> Tuple[Field, float]:
    if u.grid is not kernel.grid:
        raise GridMismatchError('field and kernel live on different grids')
    kernel.check(params)
    residual = energy_gradient(u.values, kernel, params, EnergyMode.full())
    return u.with_values(residual), dual_norm(residual, kernel.grid.cell_volume)
