"""
Fibering map along the ray through u.

With A = ‖u₊‖_q^q/ρ^q and B = ‖u₊‖_r^r/ρ^r (ρ = ρ_ε(u)),

    g(t) = I(t u/ρ) = t^p/p - (λ/q) A t^q - (1/r) B t^r,
    g'(t) = t^{q-1} h(t),   h(t) = t^{p-q} - B t^{r-q} - λA,

so the positive critical points of g are the zeros of h.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

import mlnpde.customlogger as log
from mlnpde.errors import ParameterError
from mlnpde.functionals.energy import power
from mlnpde.lattice.grid import Field
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import mixed_power_sum
from mlnpde.operators.kernel import KernelMatrix

SAMPLES = 512
SPAN = (1e-4, 1e2)
MAGNITUDE_FLOOR = 1e-12
RTOL = 1e-10

ZERO = 'zero'
ONE = 'one'
TWO = 'two'

_logger = log.get_logger('functionals')


@dataclass(frozen=True)
class FiberingProfile:
    p: float
    q: float
    r: float
    lam: float
    rho: float
    A: float
    B: float
    samples: List[Tuple[float, float]] = field(repr=False)
    t1: Optional[float]
    t2: Optional[float]
    classification: str
    flagged: bool = False

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return (t ** self.p / self.p - self.lam / self.q * self.A * t ** self.q
                - self.B / self.r * t ** self.r)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return t ** (self.p - 1) - self.lam * self.A * t ** (self.q - 1) - self.B * t ** (self.r - 1)

    def h(self, t):
        t = np.asarray(t, dtype=float)
        return t ** (self.p - self.q) - self.B * t ** (self.r - self.q) - self.lam * self.A


def fibering_profile(u: Field, kernel: KernelMatrix, params: ModelParams) -> FiberingProfile:
    kernel.check(params)
    values = u.values
    rho_p = mixed_power_sum(values, kernel, params)
    if not rho_p > 0:
        raise ParameterError('fibering map needs a nonzero field')
    rho = rho_p ** (1.0 / params.p)
    vol = u.grid.cell_volume
    p, q, r, lam = params.p, params.q, params.r, params.lam
    A = float(np.sum(power(values, q))) * vol / rho ** q
    B = float(np.sum(power(values, r))) * vol / rho ** r

    anchors = []
    if B > 0:
        anchors.append(B ** (-1.0 / (r - p)))
    if lam * A > 0:
        anchors.append((lam * A) ** (1.0 / (p - q)))
    low = SPAN[0] * min(anchors, default=1.0)
    high = SPAN[1] * max(anchors, default=1.0)
    ts = np.geomspace(low, high, SAMPLES)

    profile = FiberingProfile(p, q, r, lam, rho, A, B, [], None, None, ZERO)
    slope = profile.derivative(ts)
    scale = ts ** (p - 1) + abs(lam * A) * ts ** (q - 1) + B * ts ** (r - 1)
    signs = np.where(np.abs(slope) > MAGNITUDE_FLOOR * scale, np.sign(slope), 0.0)

    minima, maxima = [], []
    previous = None
    for k, sign in enumerate(signs):
        if sign == 0:
            continue
        if previous is not None and sign != signs[previous]:
            root = bisect(profile.derivative, ts[previous], ts[k], rtol=RTOL)
            (minima if sign > 0 else maxima).append(root)
        previous = k

    t1 = minima[0] if minima else None
    t2 = maxima[-1] if maxima else None
    count = (t1 is not None) + (t2 is not None)
    if len(minima) + len(maxima) > 2:
        _logger.warning('fibering scan saw %d sign changes, keeping the outermost pair',
                        len(minima) + len(maxima))
    classification = (ZERO, ONE, TWO)[count]
    flagged = classification == TWO and float(profile.value(t2)) <= 0.0
    if flagged:
        _logger.warning('fibering maximum g(t2)=%g is not positive', float(profile.value(t2)))
    samples = list(zip(ts.tolist(), profile.value(ts).tolist()))
    return FiberingProfile(p, q, r, lam, rho, A, B, samples, t1, t2, classification, flagged)
