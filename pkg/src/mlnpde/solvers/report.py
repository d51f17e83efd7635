from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import mlnpde.customlogger as log
from mlnpde.functionals.energy import EnergyBreakdown
from mlnpde.lattice.grid import Field

MINIMIZER = 'minimizer'
MOUNTAIN_PASS = 'mountain-pass'
EIGENPAIR = 'eigenpair'
ITERATE_LIMIT = 'iterate-limit'

# Status flags carried by non-converged or suspicious reports
OK = 'ok'
STAGNATED = 'stagnated'
BOUNDARY_STUCK = 'boundary-stuck'
MONOTONICITY_BREACH = 'monotonicity-breach'
PINCHING_FAILURE = 'pinching-failure'
LEVEL_WINDOW = 'level-window'
BLOWUP = 'blowup'
NO_SUPERSOLUTION = 'no-supersolution'

_logger = log.get_logger('solvers')


@dataclass(frozen=True)
class SolveReport:
    field: Field
    energy: EnergyBreakdown
    residual_norm: float
    iterations: int
    converged: bool
    kind: str
    tolerance: float
    status: str = OK

    def summary(self) -> dict:
        return {
            'kind': self.kind, 'status': self.status, 'converged': bool(self.converged),
            'iterations': int(self.iterations), 'residual_norm': float(self.residual_norm),
            'tolerance': self.tolerance, 'energy': self.energy.total,
            'sup_norm': self.field.sup_norm(),
        }


def descent_report(result, kernel, breakdown: EnergyBreakdown, tol: float, label: str,
                   kind: str = MINIMIZER, status: Optional[str] = None) -> SolveReport:
    """Wrap a DescentResult; ``status`` overrides the flag derived from the result."""
    field = Field(result.x, kernel.grid)
    converged = result.converged and status in (None, OK)
    if status is None:
        status = OK if result.converged else (STAGNATED if result.stagnated else ITERATE_LIMIT)
    report = SolveReport(field, breakdown, result.residual, result.iterations, converged,
                         kind if converged else ITERATE_LIMIT, tol, status)
    if converged:
        _logger.info('%s solve converged in %d iterations, residual %.3e, energy %.10g',
                     label, result.iterations, result.residual, breakdown.total)
    else:
        _logger.warning('%s solve stopped (%s) after %d iterations, residual %.3e',
                        label, status, result.iterations, result.residual)
    return report


@dataclass(frozen=True)
class BranchPoint:
    lam: float
    sup_norm: float
    energy_total: float
    converged: bool

    def as_row(self) -> list:
        return [self.lam, self.sup_norm, self.energy_total, self.converged]


BRANCH_COLUMNS = ['lambda', 'sup_norm', 'energy_total', 'converged']
