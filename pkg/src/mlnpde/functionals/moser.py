"""Moser truncation and the L∞ monitor built on it."""

from __future__ import annotations

from typing import Tuple

import numpy as np

from mlnpde.errors import ParameterError
from mlnpde.lattice.grid import Field, lt_norm
from mlnpde.lattice.params import ModelParams


def moser_truncation(t: float, beta: float, T: float) -> Tuple[float, float]:
    """
    φ(t) = |t|^β on [-T, T], continued linearly with slope ±βT^{β-1}
    outside; returns (φ(t), φ'(t)).
    """
    if not beta > 1 or not T > 1:
        raise ParameterError(f'need beta > 1 and T > 1, got beta={beta}, T={T}')
    edge = T ** beta
    slope = beta * T ** (beta - 1)
    if t >= T:
        return slope * (t - T) + edge, slope
    if t <= -T:
        return -slope * (t + T) + edge, -slope
    return abs(t) ** beta, beta * abs(t) ** (beta - 1) * np.sign(t)


def beta_one(params: ModelParams) -> float:
    """First Moser exponent β₁ = (p* + p - 1)/p."""
    pstar = params.critical_exponent
    if pstar is None:
        raise ParameterError('β₁ needs N > p')
    return (pstar + params.p - 1) / params.p


def linf_ratio(u: Field, params: ModelParams) -> float:
    """
    ‖u‖_∞ relative to the Moser-type bound (1 + ∫|u|^{p*β₁})^{1/(p*(β₁-1))}.
    Values of order one indicate the iterate carries no spike.
    """
    pstar = params.critical_exponent
    beta = beta_one(params)
    exponent = pstar * beta
    mass = lt_norm(u, exponent) ** exponent
    return u.sup_norm() / (1.0 + mass) ** (1.0 / (pstar * (beta - 1)))
