"""
Sampled checks of the elementary inequalities used in the energy estimates,
and the β₀ search comparing f_λ(β₀t) with f_λ'(t).

Each inequality is sampled on log-uniform magnitudes; the best constant over
the first half of the samples is compared with the one over all samples, and
a check passes when the constant has the required sign and drifts by less
than ``DRIFT_LIMIT`` under the doubling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

import mlnpde.customlogger as log
from mlnpde.errors import ParameterError
from mlnpde.lattice.params import ModelParams

DRIFT_LIMIT = 0.05
MAGNITUDES = (-3.0, 3.0)
BETA0_GRID = 10_000
BETA0_RTOL = 1e-10

_logger = log.get_logger('functionals')


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    exponent: float
    constant: float
    constant_doubled: float
    drift: float
    passed: bool


def _vector_power(x: np.ndarray, t: float) -> np.ndarray:
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    scale = np.where(norm > 0, norm ** (t - 2), 0.0) if t < 2 else norm ** (t - 2)
    return scale * x


def monotonicity_terms(xi: np.ndarray, eta: np.ndarray, t: float):
    """(|ξ|^{t-2}ξ - |η|^{t-2}η)·(ξ-η) and (|ξ|+|η|)^{t-2}|ξ-η|²."""
    lhs = np.sum((_vector_power(xi, t) - _vector_power(eta, t)) * (xi - eta), axis=-1)
    total = np.linalg.norm(xi, axis=-1) + np.linalg.norm(eta, axis=-1)
    diff2 = np.sum((xi - eta) ** 2, axis=-1)
    rhs = np.where(diff2 > 0, total ** (t - 2) * diff2, 0.0) if t < 2 else total ** (t - 2) * diff2
    return lhs, rhs


def binomial_remainder(a: np.ndarray, b: np.ndarray, t: float):
    """|(a+b)^t - a^t - b^t - t ab(a^{t-2}+b^{t-2})| and its bound a b^{t-1} (a ≥ b)."""
    big, small = np.maximum(a, b), np.minimum(a, b)
    lhs = np.abs((a + b) ** t - a ** t - b ** t - t * (a ** (t - 1) * b + a * b ** (t - 1)))
    return lhs, big * small ** (t - 1)


def cubic_power_gap(a: np.ndarray, t: float) -> np.ndarray:
    """(1+a)^t - (1 + a^t + ta + ta^{t-1}), nonnegative for t ≥ 3."""
    return (1 + a) ** t - (1 + a ** t + t * a + t * a ** (t - 1))


def quadratic_power_gap(a: np.ndarray, t: float) -> np.ndarray:
    """(1+a)^t - (1 + a^t + ta), nonnegative for t ≥ 2."""
    return (1 + a) ** t - (1 + a ** t + t * a)


def cosine_excess(a: np.ndarray, theta: np.ndarray, t: float) -> np.ndarray:
    """(1 + a² + 2a cos θ)^{t/2} - 1 - a^t - ta cos θ."""
    c = np.cos(theta)
    return (1 + a * a + 2 * a * c) ** (t / 2) - 1 - a ** t - t * a * c


def _drift(first: float, second: float) -> float:
    if first == second:
        return 0.0
    return abs(second - first) / max(abs(first), np.finfo(float).tiny)


def _check(name, t, values, reducer, requirement) -> InequalityCheck:
    half = values.size // 2
    first = float(reducer(values[:half]))
    second = float(reducer(values))
    drift = _drift(first, second)
    passed = bool(np.isfinite(second) and requirement(second) and drift < DRIFT_LIMIT)
    return InequalityCheck(name, t, first, second, drift, passed)


def inequality_suite(sample_count: int, params: ModelParams, seed: int = 0) -> List[InequalityCheck]:
    if sample_count < 1000:
        raise ParameterError(f'need at least 1000 samples, got {sample_count}')
    rng = np.random.default_rng(seed)
    n = 2 * sample_count
    p = params.p

    def magnitudes():
        return 10.0 ** rng.uniform(*MAGNITUDES, size=n)

    dim = params.dim_N
    xi = rng.standard_normal((n, dim)) * magnitudes()[:, None]
    eta = rng.standard_normal((n, dim)) * magnitudes()[:, None]
    a, b = magnitudes(), magnitudes()
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)

    checks = []
    lhs, rhs = monotonicity_terms(xi, eta, p)
    checks.append(_check('monotonicity', p, lhs / rhs, np.min, lambda c: c > 0))

    t = min(max(p, 1.0), 3.0)
    lhs, rhs = binomial_remainder(a, b, t)
    checks.append(_check('binomial_remainder', t, lhs / rhs, np.max, lambda c: c >= 0))

    t = max(p, 3.0)
    ratio = 1 + cubic_power_gap(a, t) / (1 + a ** t + t * a + t * a ** (t - 1))
    checks.append(_check('cubic_power_gap', t, ratio, np.min, lambda c: c >= 1 - 1e-12))

    t = max(p, 2.0)
    ratio = 1 + quadratic_power_gap(a, t) / (1 + a ** t + t * a)
    checks.append(_check('quadratic_power_gap', t, ratio, np.min, lambda c: c >= 1 - 1e-12))

    t = p if 2 <= p < 3 else 2.5
    zeta1 = 0.5 * (t + 1)
    excess = np.maximum(cosine_excess(a, theta, t), 0.0) / a ** zeta1
    checks.append(_check('cosine_excess_low', t, excess, np.max, lambda c: c >= 0))

    t = max(p, 3.0)
    excess = np.maximum(cosine_excess(a, theta, t), 0.0) / (a ** 2 + a ** (t - 1))
    checks.append(_check('cosine_excess_high', t, excess, np.max, lambda c: c >= 0))

    for check in checks:
        _logger.debug('%s: C=%g (doubled %g, drift %.3g) %s', check.name, check.constant,
                      check.constant_doubled, check.drift, 'ok' if check.passed else 'FAILED')
    return checks


def find_beta0(lam: float, lam_prime: float, M: float, params: ModelParams) -> float:
    """
    Largest β₀ (to bisection precision) with f_λ(β₀t) ≤ f_λ'(t) on a
    log-spaced grid over (0, M].
    """
    if not 0 < lam < lam_prime:
        raise ParameterError(f'need 0 < lambda < lambda_prime, got {lam}, {lam_prime}')
    if not M > 0:
        raise ParameterError(f'M must be positive, got {M}')
    q, r = params.q, params.r
    ts = np.geomspace(M * 1e-8, M, BETA0_GRID)
    target = lam_prime * ts ** (q - 1) + ts ** (r - 1)

    def holds(beta):
        bt = beta * ts
        return bool(np.all(lam * bt ** (q - 1) + bt ** (r - 1) <= target))

    lo = 1.0
    hi = (lam_prime / lam) ** (1.0 / (q - 1))
    if holds(hi):
        return hi
    while hi - lo > BETA0_RTOL * lo:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            lo = mid
        else:
            hi = mid
    return lo
