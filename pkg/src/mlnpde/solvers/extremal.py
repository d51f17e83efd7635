"""Bracketing of the extremal parameter Λ_ε by bisection on solvability."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import mlnpde.customlogger as log
from mlnpde.errors import BracketError, ParameterError
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.kernel import KernelMatrix
from mlnpde.solvers.inner import solve_sublinear
from mlnpde.solvers.monotone import DEFAULT_MAX_OUTER, find_supersolution, monotone_iterate
from mlnpde.solvers.report import NO_SUPERSOLUTION, SolveReport

CAP_FACTOR = 1e3

_logger = log.get_logger('solvers')


@dataclass(frozen=True)
class Probe:
    lam: float
    solvable: bool
    status: str
    sup_norm: float
    supersolution: bool
    report: Optional[SolveReport] = field(default=None, repr=False)

    def as_row(self) -> list:
        return [self.lam, self.solvable, self.status, self.sup_norm, self.supersolution]


PROBE_COLUMNS = ['lambda', 'solvable', 'status', 'sup_norm', 'supersolution_found']


@dataclass(frozen=True)
class LambdaBracket:
    lo: float
    hi: float
    cap: float
    probes: List[Probe] = field(default_factory=list, repr=False)

    @property
    def width(self) -> float:
        return self.hi - self.lo


def probe_lambda(params: ModelParams, kernel: KernelMatrix, lam: float, cap: float,
                 tol: float = 1e-8, max_outer: int = DEFAULT_MAX_OUTER) -> Probe:
    """
    Solvable when the monotone iteration from the sublinear solution
    converges below ``cap``.  A c·torsion supersolution bounds the sequence
    when one exists; otherwise only the cap does.
    """
    at = params.with_lambda(lam)
    w = solve_sublinear(at, kernel, tol)
    super_ = find_supersolution(at, kernel, cap=cap, above=w.field)
    z = monotone_iterate(w.field, super_, at, kernel, tol, max_outer=max_outer, cap=cap)
    status = z.status if super_ is not None or z.converged else f'{z.status}/{NO_SUPERSOLUTION}'
    probe = Probe(lam, z.converged, status, z.field.sup_norm(), super_ is not None, z)
    _logger.info('lambda=%.8g %s (sup %.6g, %s)', lam, 'solvable' if probe.solvable else 'unsolvable',
                 probe.sup_norm, status)
    return probe


def estimate_Lambda(params: ModelParams, kernel: KernelMatrix, lambda_hi: float, tol_lambda: float,
                    lambda_sharp: float, cap: Optional[float] = None, tol: float = 1e-8,
                    max_outer: int = DEFAULT_MAX_OUTER) -> LambdaBracket:
    """
    Bracket [lo, hi] around Λ_ε with hi - lo ≤ tol_lambda and lo ≥ λ#.

    ``params.lam`` is ignored.  The default blowup cap is 10³ times the sup
    norm of the minimal solution at λ#.
    """
    if not 0 < lambda_sharp < lambda_hi:
        raise ParameterError(f'need 0 < lambda_sharp < lambda_hi, got {lambda_sharp}, {lambda_hi}')
    if not tol_lambda > 0:
        raise ParameterError(f'bracket tolerance must be positive, got {tol_lambda}')
    probes: List[Probe] = []
    if cap is None:
        anchor = probe_lambda(params, kernel, lambda_sharp, float('inf'), tol, max_outer)
        cap = CAP_FACTOR * anchor.sup_norm
    else:
        anchor = probe_lambda(params, kernel, lambda_sharp, cap, tol, max_outer)
    probes.append(anchor)
    if not anchor.solvable:
        raise BracketError(f'no minimal solution found at lambda_sharp={lambda_sharp:g}')

    upper = probe_lambda(params, kernel, lambda_hi, cap, tol, max_outer)
    probes.append(upper)
    if upper.solvable:
        raise BracketError(f'lambda_hi={lambda_hi:g} is still solvable; raise it')

    lo, hi = lambda_sharp, lambda_hi
    while hi - lo > tol_lambda:
        mid = 0.5 * (lo + hi)
        probe = probe_lambda(params, kernel, mid, cap, tol, max_outer)
        probes.append(probe)
        if probe.solvable:
            lo = mid
        else:
            hi = mid
    _logger.info('Lambda bracket [%.8g, %.8g] (cap %.4g, %d probes)', lo, hi, cap, len(probes))
    return LambdaBracket(lo, hi, cap, probes)
