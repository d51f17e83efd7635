"""
Parameter thresholds for the concave-critical problem.

λ*  keeps the (PS)_c level bound positive,
λ** keeps I bounded below by δ₀ on the sphere ρ_ε = r₀,
λ#  = min(λ*, λ**) is the range where the small-energy minimizer in B_{r₀}
and the mountain-pass solution are both produced.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy.optimize import brentq, minimize_scalar

from mlnpde.errors import ParameterError
from mlnpde.lattice.params import ModelParams


@dataclass(frozen=True)
class Thresholds:
    lambda_star: float
    r0: float
    delta0: float
    lambda_star_star: float
    lambda_sharp: float
    apq_ok: bool

    def as_dict(self) -> dict:
        return {
            'lambda_star': self.lambda_star, 'r0': self.r0, 'delta0': self.delta0,
            'lambda_star_star': self.lambda_star_star, 'lambda_sharp': self.lambda_sharp,
            'apq_ok': self.apq_ok,
        }


def apq_ok(p: float, q: float, dim_N: int) -> bool:
    """Range condition: 2 ≤ p < 3 with 1 < q < p, or p ≥ 3 with p* - 2/(p-1) < q < p."""
    if 2 <= p < 3:
        return 1 < q < p
    if p >= 3 and dim_N > p:
        pstar = dim_N * p / (dim_N - p)
        return pstar - 2.0 / (p - 1) < q < p
    return False


def lambda_star(params: ModelParams, S0: float, omega_measure: float) -> float:
    N, p, q, r = params.dim_N, params.p, params.q, params.r
    base = (S0 ** (N / p) / (N * omega_measure)) ** ((r - q) / r)
    return base * (1.0 / p - 1.0 / r) ** (q / r) / (1.0 / q - 1.0 / p)


def shell_radius(p: float, r: float, C1: float):
    """
    (r₀, δ₀) for the lower bound φ(ρ) = ρ^p/p - C₁ρ^r: δ₀ is a quarter of
    max φ and r₀ the largest radius with φ(r₀) ≥ 2δ₀.
    """
    def lower_bound(rho):
        return rho ** p / p - C1 * rho ** r

    peak = (C1 * r) ** (-1.0 / (r - p))
    best = minimize_scalar(lambda rho: -lower_bound(rho), bounds=(0.0, 2.0 * peak),
                           method='bounded', options={'xatol': 1e-12 * peak})
    rho_max = float(best.x)
    delta0 = 0.25 * lower_bound(rho_max)
    far = rho_max
    while lower_bound(far) >= 2.0 * delta0:
        far *= 2.0
    r0 = brentq(lambda rho: lower_bound(rho) - 2.0 * delta0, rho_max, far, xtol=1e-14 * far)
    return float(r0), float(delta0)


def thresholds(params: ModelParams, S0_estimate: float, omega_measure: float,
               C1: float, C2: float) -> Thresholds:
    if min(S0_estimate, omega_measure, C1, C2) <= 0:
        raise ParameterError('threshold constants must be positive')
    if not params.q < params.p < params.r:
        raise ParameterError('thresholds need q < p < r')
    lam_star = lambda_star(params, S0_estimate, omega_measure)
    r0, delta0 = shell_radius(params.p, params.r, C1)
    lam_star_star = delta0 / (C2 * r0 ** params.q)
    return Thresholds(
        lambda_star=lam_star,
        r0=r0,
        delta0=delta0,
        lambda_star_star=lam_star_star,
        lambda_sharp=min(lam_star, lam_star_star),
        apq_ok=apq_ok(params.p, params.q, params.dim_N),
    )


def ps_level_bound(params: ModelParams, S0: float, omega_measure: float) -> float:
    """
    Energy level below which Palais-Smale sequences are compact,
    (1/N)S₀^{N/p} - |Ω|(1/p-1/r)^{-q/(r-q)}(λ(1/q-1/p))^{r/(r-q)}.
    """
    N, p, q, r, lam = params.dim_N, params.p, params.q, params.r, params.lam
    gap = omega_measure * (1.0 / p - 1.0 / r) ** (-q / (r - q)) * (
        max(lam, 0.0) * (1.0 / q - 1.0 / p)) ** (r / (r - q))
    return S0 ** (N / p) / N - gap


def mountain_pass_window(c_min: float, S0: float, dim_N: int, p: float) -> float:
    """Upper end c_min + (1/N)S₀^{N/p} of the admissible mountain-pass level."""
    return c_min + S0 ** (dim_N / p) / dim_N
