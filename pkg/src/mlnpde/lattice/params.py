"""
Model parameters of the mixed local-nonlocal concave-critical problem

    -Δ_p u + ε(-Δ_p)^s u = λ|u|^{q-2}u + |u|^{r-2}u  in Ω,   u = 0 outside Ω.

The superlinear exponent ``r`` defaults to the critical Sobolev exponent
p* = Np/(N-p), which only exists for N > p.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

from mlnpde.errors import ParameterError


@dataclass(frozen=True)
class ModelParams:
    dim_N: int
    p: float
    q: float
    s: float
    eps: float
    lam: float
    r: Optional[float] = None

    def __post_init__(self):
        if int(self.dim_N) != self.dim_N or self.dim_N < 1:
            raise ParameterError(f'dim_N must be a positive integer, got {self.dim_N}')
        if not self.p > 1:
            raise ParameterError(f'p must exceed 1, got {self.p}')
        if not 1 < self.q < self.p:
            raise ParameterError(f'need 1 < q < p, got q={self.q}, p={self.p}')
        if not 0 < self.s < 1:
            raise ParameterError(f's must lie in (0, 1), got {self.s}')
        # eps = 0 is the purely local limit problem
        if not 0 <= self.eps <= 1:
            raise ParameterError(f'eps must lie in [0, 1], got {self.eps}')
        if not math.isfinite(self.lam):
            raise ParameterError(f'lambda must be finite, got {self.lam}')
        if self.r is None:
            if self.dim_N <= self.p:
                raise ParameterError(
                    'critical exponent undefined for N <= p; pass r explicitly')
            object.__setattr__(self, 'r', self.dim_N * self.p / (self.dim_N - self.p))
        if not self.r > self.p:
            raise ParameterError(f'r must exceed p, got r={self.r}, p={self.p}')

    @property
    def critical_exponent(self) -> Optional[float]:
        """p* = Np/(N-p), or None when N <= p."""
        if self.dim_N <= self.p:
            return None
        return self.dim_N * self.p / (self.dim_N - self.p)

    @property
    def sp(self) -> float:
        return self.s * self.p

    @property
    def is_critical(self) -> bool:
        pstar = self.critical_exponent
        return pstar is not None and math.isclose(self.r, pstar)

    def with_lambda(self, lam: float) -> 'ModelParams':
        return dataclasses.replace(self, lam=lam)

    def with_eps(self, eps: float) -> 'ModelParams':
        return dataclasses.replace(self, eps=eps)

    def as_dict(self) -> dict:
        return {
            'N': self.dim_N, 'p': self.p, 'q': self.q, 's': self.s,
            'eps': self.eps, 'lambda': self.lam, 'r': self.r,
        }
