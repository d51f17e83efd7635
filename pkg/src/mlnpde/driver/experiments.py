"""
Experiment orchestration.

Each ``run_*`` function takes a prepared :class:`Context` (grid, kernel and
the report being filled) plus its own arguments, adds verdicts and tables
to ``ctx.report`` and returns it.  :func:`run_experiment` reads those
arguments from an :class:`ExperimentConfig` and dispatches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

import mlnpde.customlogger as log
from mlnpde.bubbles.talenti import (
    ASYMPTOTIC_COLUMNS, bubble_constants, bubble_family, default_alpha, default_cutoff,
    eps_ladder, random_quotient_floor, sobolev_quotient, sobolev_quotient_scan, talenti_bubble)
from mlnpde.driver.config import ExperimentConfig
from mlnpde.driver.pool import fan_out
from mlnpde.driver.report import FAIL, INCONCLUSIVE, PASS, ExperimentReport, Verdict
from mlnpde.errors import BracketError, KernelBudgetError, PreconditionError
from mlnpde.functionals.energy import (
    EnergyMode, dual_norm, energy, energy_gradient, energy_value, residual_dual_norm)
from mlnpde.functionals.fibering import fibering_profile
from mlnpde.functionals.inequalities import find_beta0, inequality_suite
from mlnpde.functionals.moser import linf_ratio
from mlnpde.functionals.thresholds import (
    Thresholds, mountain_pass_window, ps_level_bound, thresholds)
from mlnpde.lattice.grid import Field, Grid, build_grid
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import laplacian_matrix, local_power_sum, nonlocal_power_sum, norms
from mlnpde.operators.kernel import KernelMatrix, assemble_kernel
from mlnpde.solvers.ball import minimize_in_ball
from mlnpde.solvers.eigen import embedding_constants, norm_ratio_ascent, principal_eigenpair
from mlnpde.solvers.extremal import PROBE_COLUMNS, estimate_Lambda, probe_lambda
from mlnpde.solvers.inner import solve_sublinear, torsion
from mlnpde.solvers.monotone import find_supersolution, minimize_truncated, monotone_iterate
from mlnpde.solvers.mountainpass import mountain_pass, path_energies, top_endpoint
from mlnpde.solvers.report import BRANCH_COLUMNS, BranchPoint, SolveReport

DECAY_THRESHOLD = 1e-6
BRANCH_SLACK = 1e-8
SCAN_SAMPLES = 65
MAX_HI_DOUBLINGS = 8
SCALING_RTOL = 0.02
DERIVATIVE_RTOL = 0.05
SLOPE_RTOL = 0.25
S0_RTOL = 0.05
DENSE_EIGH_LIMIT = 3000
SOLUTION_COLUMNS = ['name', 'lambda', 'eps', 'sup_norm', 'energy', 'residual_norm', 'converged',
                    'status', 'linf_ratio']

_logger = log.get_logger('driver')
_telemetry = None


def attach_telemetry(producer) -> None:
    """Publish one point per finished solve through ``producer`` (None disables)."""
    global _telemetry
    _telemetry = producer


@dataclass(frozen=True)
class ThresholdSet:
    S0: float
    C1: float
    C2: float
    lambda1: float
    values: Thresholds


@dataclass
class Context:
    config: ExperimentConfig
    params: ModelParams
    grid: Grid
    kernel: KernelMatrix
    report: ExperimentReport
    _thresholds: Dict[float, ThresholdSet] = field(default_factory=dict, repr=False)

    @property
    def settings(self):
        return self.config.solver

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.config.seed)

    def thresholds(self, params: Optional[ModelParams] = None) -> ThresholdSet:
        """S₀ proxy, embedding constants, λ₁ and the λ thresholds (cached per ε)."""
        params = self.params if params is None else params
        if params.critical_exponent is None:
            raise PreconditionError('thresholds need N > p for the Sobolev proxy')
        if params.eps not in self._thresholds:
            tol = self.settings.tol
            S0 = sobolev_quotient_scan(self.grid, params)
            C1, C2 = embedding_constants(self.kernel, params, S0, tol)
            lambda1, _ = principal_eigenpair(params, self.kernel, tol, self.settings.max_iter)
            values = thresholds(params, S0, self.grid.geometry.measure, C1, C2)
            _logger.info('thresholds at eps=%g: %s', params.eps, values.as_dict())
            self._thresholds[params.eps] = ThresholdSet(S0, C1, C2, lambda1, values)
        return self._thresholds[params.eps]


def prepare(config: ExperimentConfig, resolution=None) -> Context:
    grid = build_grid(config.geometry.build(), config.resolution if resolution is None else resolution)
    kernel = assemble_kernel(grid, config.model)
    return Context(config, config.model, grid, kernel, ExperimentReport(config.experiment, config.as_dict()))


def _publish(name: str, solve: SolveReport, params: ModelParams) -> None:
    if _telemetry is None:
        return
    fields = dict(solve.summary())
    fields.update(lam=params.lam, eps=params.eps)
    _telemetry.write(fields, tags={'solve': name, 'kind': solve.kind, 'status': solve.status})


def _solution_row(name: str, solve: SolveReport, params: ModelParams) -> list:
    ratio = linf_ratio(solve.field, params) if params.critical_exponent is not None else float('nan')
    return [name, params.lam, params.eps, solve.field.sup_norm(), solve.energy.total,
            solve.residual_norm, solve.converged, solve.status, ratio]


def _reverified(solve: SolveReport, kernel: KernelMatrix, params: ModelParams,
                mode: Optional[EnergyMode] = None) -> bool:
    """A converged report re-evaluated from scratch still meets its tolerance."""
    if not solve.converged:
        return False
    if mode is None:
        _, residual = residual_dual_norm(solve.field, kernel, params)
    else:
        gradient = energy_gradient(solve.field.values, kernel, params, mode)
        residual = dual_norm(gradient, kernel.grid.cell_volume)
    return residual <= solve.tolerance * (1.0 + 1e-9)


def _minimal_solution(ctx: Context, params: ModelParams,
                      cap: Optional[float] = None) -> Tuple[SolveReport, SolveReport, bool]:
    """(w, z, supersolution found) at params.lam."""
    s = ctx.settings
    w = solve_sublinear(params, ctx.kernel, s.tol, s.max_iter)
    if cap is None:
        cap = s.cap_factor * max(1.0, w.field.sup_norm())
    super_ = find_supersolution(params, ctx.kernel, cap=cap, above=w.field)
    z = monotone_iterate(w.field, super_, params, ctx.kernel, s.tol, max_outer=s.max_outer,
                         inner_tol=s.inner_tol, slack=s.slack, cap=cap)
    _publish('sublinear', w, params)
    _publish('minimal', z, params)
    return w, z, super_ is not None


def _ordered(upper: Field, lower: Field, slack: float) -> bool:
    margin = slack * max(1.0, upper.sup_norm(), lower.sup_norm())
    return bool(np.all(upper.values >= lower.values - margin))


# --------------------------------------------------------------------------- thresholds

def run_thresholds(ctx: Context, sample_count: int = 10000) -> ExperimentReport:
    report, params = ctx.report, ctx.params
    ts = ctx.thresholds()
    values = ts.values
    rows = [[k, v] for k, v in values.as_dict().items()]
    rows += [['S0_estimate', ts.S0], ['C1', ts.C1], ['C2', ts.C2], ['lambda1', ts.lambda1],
             ['ps_level_bound', ps_level_bound(params, ts.S0, ctx.grid.geometry.measure)],
             ['omega_measure', ctx.grid.geometry.measure]]
    report.table('thresholds', ['quantity', 'value'], rows)
    report.add(Verdict.check('threshold positivity', 'ball-minimizer parameter range',
                             values.lambda_sharp > 0 and values.r0 > 0 and values.delta0 > 0,
                             f'lambda_sharp={values.lambda_sharp:.6g}'))
    report.add(Verdict.check('first eigenvalue positive', 'first Dirichlet eigenvalue', ts.lambda1 > 0,
                             f'lambda1={ts.lambda1:.6g}'))

    checks = inequality_suite(sample_count, params, seed=ctx.config.seed)
    report.table('inequalities', ['name', 'exponent', 'constant', 'constant_doubled', 'drift', 'passed'],
                 [[c.name, c.exponent, c.constant, c.constant_doubled, c.drift, c.passed] for c in checks])
    for c in checks:
        report.add(Verdict.check(f'inequality {c.name}', 'elementary vector inequalities', c.passed,
                                 f'C={c.constant:.6g}, drift={c.drift:.3g}'))
    return report


# --------------------------------------------------------------------------- solve

def run_solve(ctx: Context, lambda_prime_factor: float = 1.25) -> ExperimentReport:
    report, params, kernel = ctx.report, ctx.params, ctx.kernel
    if not params.lam > 0:
        raise PreconditionError('solve needs lambda > 0')
    slack = ctx.settings.slack
    w, z, found = _minimal_solution(ctx, params)
    rows = [_solution_row('sublinear', w, params), _solution_row('minimal', z, params)]

    report.add(Verdict.check('sublinear solution has negative energy', 'sublinear problem',
                             w.converged and w.energy.total < 0, f'J(w)={w.energy.total:.6g}'))
    report.add(Verdict.check('sublinear report re-verifies', 'sublinear problem',
                             _reverified(w, kernel, params, EnergyMode.sublinear())))
    if not z.converged:
        report.add(Verdict('minimal solution', 'sub/supersolution iteration', INCONCLUSIVE,
                           f'status={z.status}, supersolution_found={found}'))
    else:
        report.add(Verdict.check('minimal solution dominates sublinear', 'sub/supersolution iteration',
                                 _ordered(z.field, w.field, slack)))
        report.add(Verdict.check('minimal solution has negative energy', 'negative-energy minimal solution',
                                 z.energy.total < 0, f'I(z)={z.energy.total:.6g}'))
        report.add(Verdict.check('minimal report re-verifies', 'sub/supersolution iteration',
                                 _reverified(z, kernel, params)))

    # truncated minimization between w_λ and z_λ'
    upper_params = params.with_lambda(lambda_prime_factor * params.lam)
    _, z_prime, _ = _minimal_solution(ctx, upper_params)
    rows.append(_solution_row('minimal_upper', z_prime, upper_params))
    if z_prime.converged and _ordered(z_prime.field, w.field, slack):
        upper = Field(np.maximum(z_prime.field.values, w.field.values), ctx.grid)
        z_hat = minimize_truncated(w.field, upper, params, kernel, ctx.settings.tol,
                                   ctx.settings.max_iter, slack)
        _publish('truncated', z_hat, params)
        rows.append(_solution_row('truncated', z_hat, params))
        e_hat = z_hat.energy.total
        e_w = energy(w.field, kernel, params).total
        j_w = energy(w.field, kernel, params, EnergyMode.sublinear()).total
        report.add(Verdict.check('truncated minimizer stays pinched', 'truncated functional',
                                 z_hat.converged, f'status={z_hat.status}'))
        report.add(Verdict.check('energy chain I(z_hat) <= I(w) < J(w) < 0', 'truncated functional',
                                 e_hat <= e_w + 1e-12 * abs(e_w) and e_w < j_w < 0,
                                 f'{e_hat:.6g} <= {e_w:.6g} < {j_w:.6g}'))
    else:
        report.add(Verdict('truncated minimizer', 'truncated functional', INCONCLUSIVE,
                           f'upper minimal solution unavailable ({z_prime.status})'))
    report.table('solutions', SOLUTION_COLUMNS, rows)
    return report


# --------------------------------------------------------------------------- branch

def run_branch_diagram(ctx: Context, lambda_list: Sequence[float], lambda_hi: Optional[float] = None,
                       tol_lambda: Optional[float] = None) -> ExperimentReport:
    report, params, kernel = ctx.report, ctx.params, ctx.kernel
    lambdas = [float(v) for v in lambda_list]
    if not lambdas or lambdas[0] <= 0 or any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise PreconditionError('branch needs a positive ascending lambda list')
    s = ctx.settings
    sharp = ctx.thresholds().values.lambda_sharp
    anchor = probe_lambda(params, kernel, sharp, float('inf'), s.tol, s.max_outer)
    if not anchor.solvable:
        raise BracketError(f'no minimal solution found at lambda_sharp={sharp:g}')
    cap = s.cap_factor * anchor.sup_norm
    hi = max(lambda_hi or 2.0 * lambdas[-1], 2.0 * sharp)
    for _ in range(MAX_HI_DOUBLINGS):
        if not probe_lambda(params, kernel, hi, cap, s.tol, s.max_outer).solvable:
            break
        hi *= 2.0
    else:
        raise BracketError(f'no unsolvable lambda found up to {hi:g}')
    bracket = estimate_Lambda(params, kernel, hi, tol_lambda or 1e-2 * hi, sharp, cap=cap,
                              tol=s.tol, max_outer=s.max_outer)

    def solve_point(lam):
        return _minimal_solution(ctx, params.with_lambda(lam), cap=bracket.cap)

    solutions = fan_out(solve_point, lambdas)
    points = [BranchPoint(lam, z.field.sup_norm(), z.energy.total, z.converged)
              for lam, (_, z, _) in zip(lambdas, solutions)]
    report.table('branch', BRANCH_COLUMNS, [pt.as_row() for pt in points])
    for pt, (_, z, _) in zip(points, solutions):
        if not pt.converged:
            _logger.warning('branch point lambda=%g not converged (%s)', pt.lam, z.status)

    converged = [(pt, z) for pt, (_, z, _) in zip(points, solutions) if pt.converged]
    if len(converged) < 2:
        report.add(Verdict('branch monotone in lambda', 'minimal branch increasing', INCONCLUSIVE,
                           f'{len(converged)} converged points'))
    else:
        sups = [pt.sup_norm for pt, _ in converged]
        report.add(Verdict.check('branch monotone in lambda', 'minimal branch increasing',
                                 all(b >= a - BRANCH_SLACK for a, b in zip(sups, sups[1:]))))
        report.add(Verdict.check('branch energies negative', 'negative-energy minimal solution',
                                 all(pt.energy_total < 0 for pt, _ in converged)))
        strict = []
        for (a, za), (b, zb) in zip(converged, converged[1:]):
            if b.lam >= bracket.lo:
                continue
            beta0 = find_beta0(a.lam, b.lam, zb.field.sup_norm(), params)
            scaled = za.field * beta0 ** ((params.q - 1) / (params.p - 1))
            strict.append(_ordered(zb.field, scaled, BRANCH_SLACK))
        report.add(Verdict('strict increase via beta0 comparison', 'minimal branch increasing',
                           (PASS if all(strict) else FAIL) if strict else INCONCLUSIVE,
                           f'{len(strict)} consecutive pairs below the bracket'))

    report.table('lambda_bracket', ['lo', 'hi', 'cap', 'lambda_sharp'],
                 [[bracket.lo, bracket.hi, bracket.cap, sharp]])
    report.table('lambda_probes', PROBE_COLUMNS, [pr.as_row() for pr in bracket.probes])
    report.add(Verdict.check('bracket lower end above lambda_sharp', 'extremal parameter positive',
                             bracket.lo >= sharp and np.isfinite(bracket.hi),
                             f'[{bracket.lo:.6g}, {bracket.hi:.6g}]'))
    beyond = probe_lambda(params, kernel, 2.0 * bracket.hi, bracket.cap, s.tol, s.max_outer)
    report.add(Verdict.check('no solution beyond the bracket', 'nonexistence above extremal parameter',
                             not beyond.solvable, f'lambda={beyond.lam:.6g}: {beyond.status}'))
    return report


# --------------------------------------------------------------------------- two solutions

def run_two_solution(ctx: Context, lam: Optional[float] = None,
                     bubble_eps: Optional[float] = None) -> ExperimentReport:
    report, kernel = ctx.report, ctx.kernel
    params = ctx.params if lam is None else ctx.params.with_lambda(lam)
    s = ctx.settings
    if not params.lam > 0:
        raise PreconditionError('two-solution pipeline needs lambda > 0')
    ts = ctx.thresholds(params)
    if not ts.values.apq_ok:
        if not params.is_critical:
            _logger.warning('range condition fails; continuing because r < p* (subcritical override)')
        else:
            raise PreconditionError(f'range condition fails for p={params.p}, q={params.q}')
    if not params.lam < ts.values.lambda_sharp:
        raise PreconditionError(f'lambda={params.lam:g} not below lambda_sharp={ts.values.lambda_sharp:g}')
    r0 = ts.values.r0

    base = minimize_in_ball(params, kernel, r0, s.tol, s.max_iter, bounds=ts.values)
    _publish('ball', base, params)
    rho = norms(base.field, kernel, params).rho_eps
    c_min = base.energy.total
    report.add(Verdict.check('small-energy minimizer', 'ball minimization',
                             base.converged and c_min < 0 and rho < r0,
                             f'c_min={c_min:.6g}, rho={rho:.6g}, r0={r0:.6g}, status={base.status}'))
    rows = [_solution_row('ball_minimizer', base, params)]
    if not base.converged:
        report.table('solutions', SOLUTION_COLUMNS, rows)
        return report

    family = bubble_family(ctx.grid, params, eps_list=None if bubble_eps is None else [bubble_eps])
    bp = min(family, key=lambda b: b.eps_b)
    bubble = talenti_bubble(bp, ctx.grid, params)
    R0, top = top_endpoint(base.field, bubble, params, kernel, r0)
    scan = path_energies(base.field, bubble, np.linspace(0.0, R0, SCAN_SAMPLES), kernel, params)
    report.table('path_scan', ['t', 'energy'], [list(row) for row in scan])
    window = mountain_pass_window(c_min, ts.S0, params.dim_N, params.p)
    path_max = max(e for _, e in scan)
    below = path_max < window
    report.add(Verdict.check('energy estimate along the bubble path', 'bubble energy estimate', below,
                             f'max={path_max:.6g}, window={window:.6g}, R0={R0:g}'))
    if not below:
        _logger.error('energy-estimate scan fails; mountain pass not attempted')
        report.table('solutions', SOLUTION_COLUMNS, rows)
        return report

    mp = mountain_pass(base, top, params, kernel, s.path_nodes, s.tol, s.max_iter, S0_estimate=ts.S0)
    _publish('mountain_pass', mp, params)
    rows.append(_solution_row('mountain_pass', mp, params))
    report.table('solutions', SOLUTION_COLUMNS, rows)
    c_mp = mp.energy.total
    gap = (mp.field - base.field).sup_norm()
    report.add(Verdict.check('mountain-pass solution converged', 'second solution', mp.converged,
                             f'status={mp.status}'))
    report.add(Verdict.check('energy ordering c_min < 0 < c_mp', 'second solution',
                             c_min < 0 < c_mp, f'c_min={c_min:.6g}, c_mp={c_mp:.6g}'))
    report.add(Verdict.check('mountain-pass level below compactness window', 'compactness window',
                             c_mp < window, f'c_mp={c_mp:.6g}, window={window:.6g}'))
    report.add(Verdict.check('solutions distinct', 'second solution', gap > 10.0 * s.tol,
                             f'sup gap={gap:.6g}'))
    report.add(Verdict.check('reports re-verify', 'second solution',
                             _reverified(base, kernel, params) and _reverified(mp, kernel, params)))
    return report


# --------------------------------------------------------------------------- nonexistence

def _regime(params: ModelParams) -> str:
    if params.p > 2 and 2 <= params.q < params.p:
        return 'star-shaped nonexistence'
    return 'star-shaped nonexistence (extended regime)'


def run_nonexistence_sweep(ctx: Context, lambdas: Sequence[float], init_count: int = 20,
                           contrast: bool = True) -> ExperimentReport:
    report, kernel = ctx.report, ctx.kernel
    if any(lam > 0 for lam in lambdas):
        raise PreconditionError('nonexistence sweep needs lambda <= 0')
    s = ctx.settings
    rng = ctx.rng()
    n = ctx.grid.n_interior
    base_profile = torsion(kernel, ctx.params).values
    starts = [base_profile * (0.5 + rng.random(n)) for _ in range(init_count)]
    fractions = rng.uniform(0.1, 0.9, size=init_count)
    anchor = _regime(ctx.params)

    def decay(args):
        lam, direction, fraction = args
        at = ctx.params.with_lambda(lam)
        profile = fibering_profile(Field(direction, ctx.grid), kernel, at)
        peak = profile.t2 if profile.t2 is not None else 1.0
        start = Field(fraction * peak * direction / profile.rho, ctx.grid)
        result = minimize_in_ball(at, kernel, peak, s.tol, s.max_iter, initial=start,
                                  stop=lambda x: float(np.max(np.abs(x))) < DECAY_THRESHOLD)
        return lam, result

    jobs = [(lam, d, f) for lam in lambdas for d, f in zip(starts, fractions)]
    results = fan_out(decay, jobs)
    rows = []
    for lam in lambdas:
        runs = [r for l_, r in results if l_ == lam]
        decayed = [r.field.sup_norm() < DECAY_THRESHOLD for r in runs]
        nontrivial = [r.converged and r.field.sup_norm() >= DECAY_THRESHOLD for r in runs]
        rows += [[lam, k, r.field.sup_norm(), r.energy.total, r.iterations, r.status]
                 for k, r in enumerate(runs)]
        status = PASS if all(decayed) else (FAIL if any(nontrivial) else INCONCLUSIVE)
        report.add(Verdict(f'all starts decay at lambda={lam:g}', anchor, status,
                           f'{sum(decayed)}/{len(runs)} below {DECAY_THRESHOLD:g} (numerical evidence)'))
    report.table('nonexistence', ['lambda', 'start', 'sup_norm', 'energy', 'iterations', 'status'], rows)

    if contrast:
        ts = ctx.thresholds()
        at = ctx.params.with_lambda(0.5 * ts.values.lambda_sharp)
        result = minimize_in_ball(at, kernel, ts.values.r0, s.tol, s.max_iter, bounds=ts.values)
        report.table('contrast', SOLUTION_COLUMNS, [_solution_row('contrast', result, at)])
        report.add(Verdict.check('positive lambda yields a nontrivial solution', 'ball minimization',
                                 result.converged and result.field.sup_norm() > DECAY_THRESHOLD,
                                 f'lambda={at.lam:.6g}, sup={result.field.sup_norm():.6g}'))
    return report


# --------------------------------------------------------------------------- scaling

def bump(center: np.ndarray, radius: float) -> Callable[[np.ndarray], np.ndarray]:
    """C² bump (1 - |x-c|²/R²)³₊."""
    def fn(points):
        r2 = np.sum((points - center) ** 2, axis=1) / radius ** 2
        return np.maximum(1.0 - r2, 0.0) ** 3
    return fn


def _resampler(u: Field, fn: Optional[Callable]) -> Callable[[float], np.ndarray]:
    grid = u.grid
    center = grid.geometry.center
    if fn is None:
        interp = RegularGridInterpolator(grid.axes(), grid.scatter(u.values), bounds_error=False,
                                         fill_value=0.0)
        fn = interp

    def at(tau):
        if tau == 1.0:
            return u.values.copy()
        return np.asarray(fn(center + tau * (grid.points - center)), dtype=float).reshape(-1)
    return at


def run_scaling_test(ctx: Context, u: Field, tau_step: float,
                     fn: Optional[Callable] = None, h: float = 1e-3) -> ExperimentReport:
    """
    Scaling laws of the local and nonlocal seminorms under u_τ(x) = u(c + τ(x - c)),
    and the one-sided derivative of I along w_τ = τ^{(N-p)/p} u_τ at τ = 1⁺.

    With N = d and r = p* that derivative equals -(1-s)·ε·[u]^p for any u,
    so the bound is checked on the field as given.
    """
    report, params, kernel = ctx.report, ctx.params, ctx.kernel
    if not 0 < tau_step <= 0.1:
        raise PreconditionError(f'tau_step must lie in (0, 0.1], got {tau_step}')
    if u.sup_norm() == 0:
        raise PreconditionError('scaling test needs a nonzero field')
    p, s, N, d = params.p, params.s, params.dim_N, ctx.grid.dim_d
    at = _resampler(u, fn)

    G = local_power_sum(u.values, ctx.grid, p)
    F = nonlocal_power_sum(u.values, kernel, p)
    rows = []
    worst = 0.0
    for tau in (1.0, 1.0 + tau_step):
        v = at(tau)
        for name, measured, predicted in (
                ('grad_p^p', local_power_sum(v, ctx.grid, p) / G, tau ** (p - d)),
                ('gagliardo^p', nonlocal_power_sum(v, kernel, p) / F, tau ** (N + s * p - 2 * d))):
            error = abs(measured - predicted) / predicted
            rows.append([tau, name, measured, predicted, error])
            worst = max(worst, error)
    report.table('scaling', ['tau', 'quantity', 'measured_ratio', 'predicted_ratio', 'rel_error'], rows)
    report.add(Verdict.check('seminorm scaling ratios', 'scaling identity', worst < SCALING_RTOL,
                             f'worst relative error {worst:.3g}'))

    limit = (1.0 - (1.0 + 1e-6) ** (s * p - p)) / 1e-6
    report.add(Verdict.check('derivative limit p - ps', 'scaling identity',
                             abs(limit - (p - p * s)) <= 1e-4 * (p - p * s), f'{limit:.10g}'))

    zero = params.with_lambda(0.0)
    alpha = (N - p) / p
    e0 = energy_value(at(1.0), kernel, zero)
    e1 = energy_value((1.0 + h) ** alpha * at(1.0 + h), kernel, zero)
    slope = (e1 - e0) / h
    bound = -(1.0 - s) * params.eps * F
    report.table('derivative', ['h', 'fd_derivative', 'bound', 'gagliardo^p'], [[h, slope, bound, F]])
    if d != N or not params.is_critical:
        report.add(Verdict('one-sided scaling derivative bound', 'scaling identity', INCONCLUSIVE,
                           'needs N = d and r = p*'))
    else:
        report.add(Verdict.check('one-sided scaling derivative bound', 'scaling identity',
                                 slope <= bound + DERIVATIVE_RTOL * abs(bound),
                                 f'{slope:.6g} <= {bound:.6g}'))
    return report


# --------------------------------------------------------------------------- beta sequence

def _dirichlet_modes(grid: Grid, count: int) -> np.ndarray:
    matrix = laplacian_matrix(grid)
    if grid.n_interior <= DENSE_EIGH_LIMIT:
        _, vectors = eigh(matrix.toarray())
        return vectors[:, :count]
    values, vectors = eigsh(matrix, k=count, sigma=0.0, which='LM')
    return vectors[:, np.argsort(values)]


def run_beta_sequence(ctx: Context, k_max: int) -> ExperimentReport:
    report, params, kernel = ctx.report, ctx.params, ctx.kernel
    if not 1 <= k_max <= ctx.grid.n_interior:
        raise PreconditionError(f'k_max must lie in [1, {ctx.grid.n_interior}]')
    if not params.lam > 0:
        raise PreconditionError('beta sequence needs lambda > 0 for rho_k')
    s = ctx.settings
    modes = _dirichlet_modes(ctx.grid, k_max)
    p, q, lam = params.p, params.q, params.lam

    def beta(k):
        frozen = modes[:, :k - 1]
        seed = modes[:, k - 1]
        value, _, converged = norm_ratio_ascent(kernel, params, q, frozen=frozen, initial=seed,
                                                tol=s.tol, max_iter=s.max_iter)
        return value, converged

    results = fan_out(beta, range(1, k_max + 1))
    betas = np.array([b for b, _ in results])
    rhos = (2.0 * p * lam * betas ** q / q) ** (1.0 / (p - q))
    report.table('beta_sequence', ['k', 'beta_k', 'rho_k', 'converged'],
                 [[k, b, r, c] for k, (b, r, (_, c)) in enumerate(zip(betas, rhos, results), start=1)])
    for k, (_, c) in enumerate(results, start=1):
        if not c:
            _logger.warning('norm-ratio ascent on modes >= %d did not converge', k)
    report.add(Verdict.check('beta_k positive', 'shrinking-subspace norms', bool(np.all(betas > 0))))
    report.add(Verdict.check('beta_k nonincreasing', 'shrinking-subspace norms',
                             bool(np.all(np.diff(betas) <= 1e-3 * betas[:-1]))))
    report.add(Verdict.check('beta_k decays', 'shrinking-subspace norms', betas[-1] < 0.5 * betas[0],
                             f'beta_{k_max}={betas[-1]:.6g}, beta_1={betas[0]:.6g}'))
    report.add(Verdict.check('rho_k decreasing', 'shrinking-subspace norms',
                             bool(np.all(np.diff(rhos) <= 1e-3 * rhos[:-1]))))
    return report


# --------------------------------------------------------------------------- harnack

def run_harnack_floor(ctx: Context, eps_list: Sequence[float], probe_center=None,
                      probe_radius: Optional[float] = None) -> ExperimentReport:
    report, kernel = ctx.report, ctx.kernel
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise PreconditionError('eps list must be decreasing')
    geometry = ctx.grid.geometry
    center = geometry.center if probe_center is None else np.asarray(probe_center, dtype=float)
    radius = 0.25 * geometry.inradius if probe_radius is None else float(probe_radius)
    if float(geometry.distance_to_boundary(center[None, :])[0]) <= radius:
        raise PreconditionError('probe ball must be strictly interior')
    inside = np.linalg.norm(ctx.grid.points - center, axis=1) <= radius
    if not inside.any():
        raise PreconditionError('probe ball contains no grid nodes')
    if not ctx.params.lam > 0:
        raise PreconditionError('harnack floor needs lambda > 0')

    def floors(eps):
        at = ctx.params.with_eps(eps)
        w, z, _ = _minimal_solution(ctx, at)
        return w, z

    results = fan_out(floors, eps_list)
    rows = []
    w_floor = []
    matched = True
    for eps, (w, z) in zip(eps_list, results):
        fw = float(np.min(w.field.values[inside]))
        fz = float(np.min(z.field.values[inside])) if z.converged else float('nan')
        w_floor.append(fw)
        rows.append([eps, fw, fz, w.converged, z.converged])
        if z.converged:
            matched = matched and fz >= fw - ctx.settings.slack * max(1.0, fz)
    report.table('harnack', ['eps', 'sublinear_floor', 'minimal_floor', 'sublinear_converged',
                             'minimal_converged'], rows)
    w_floor = np.array(w_floor)
    report.add(Verdict.check('floors positive', 'epsilon-uniform interior floor', bool(np.all(w_floor > 0))))
    report.add(Verdict.check('no floor collapse as eps decreases', 'epsilon-uniform interior floor',
                             w_floor.min() >= 0.5 * w_floor[-1]))
    report.add(Verdict.check('floors within a factor 2', 'epsilon-uniform interior floor',
                             w_floor.max() <= 2.0 * w_floor.min()))
    report.add(Verdict.check('solution floor above sublinear floor', 'floor transfers to solutions',
                             matched))
    return report


# --------------------------------------------------------------------------- bubbles

def run_bubbles(ctx: Context, resolutions: Sequence, eps_list: Optional[Sequence[float]] = None,
                t_exponents: Sequence[float] = (4.0,), random_samples: int = 64) -> ExperimentReport:
    report, params = ctx.report, ctx.params
    if len(resolutions) < 2:
        raise PreconditionError('bubbles need at least two resolutions')
    geometry = ctx.grid.geometry
    grids = [build_grid(geometry, r) for r in resolutions]
    kernels = {}
    for k, grid in enumerate(grids):
        try:
            kernels[k] = assemble_kernel(grid, params)
        except KernelBudgetError as e:
            _logger.info('no Gagliardo term on grid %s: %s', grid.shape, e)
    alpha = default_alpha(params)
    cutoff = default_cutoff(grids[0])
    eps_list = eps_ladder(cutoff, alpha) if eps_list is None else list(eps_list)
    constants, rows = bubble_constants(eps_list, grids, params, cutoff_inner=cutoff, alpha=alpha,
                                       kernels=kernels, t_exponents=t_exponents)
    report.table('asymptotics', ASYMPTOTIC_COLUMNS, [r.as_row() for r in rows])
    report.table('constants', ['K1', 'K2', 'S0_est'], [[constants.K1, constants.K2, constants.S0_est]])

    finest = min(r.h for r in rows)
    N, p = params.dim_N, params.p
    exact_t = N * (p - 1) / (N - p)
    for quantity in sorted({r.quantity for r in rows if r.quantity != 'S0'}):
        fits = [r for r in rows if r.quantity == quantity]
        h = min(r.h for r in fits)
        row = next(r for r in fits if r.h == h)
        if not np.isfinite(row.fitted_slope):
            report.add(Verdict(f'slope of {quantity}', 'bubble asymptotics', INCONCLUSIVE, 'no fit'))
            continue
        lower_only = quantity.startswith('ball_V^') and float(quantity.split('^')[1]) <= exact_t
        rel = (row.fitted_slope - row.theory_slope) / abs(row.theory_slope)
        # a lower bound c·ε^a as ε → 0 only caps the fitted exponent from above
        ok = rel <= SLOPE_RTOL if lower_only else abs(rel) <= SLOPE_RTOL
        report.add(Verdict.check(f'slope of {quantity}', 'bubble asymptotics', ok,
                                 f'fitted {row.fitted_slope:.4g}, theory {row.theory_slope:.4g}'
                                 + (' (lower bound)' if lower_only else '')))

    s0_rows = {r.h: r.value for r in rows if r.quantity == 'S0'}
    hs = sorted(s0_rows)
    stable = abs(s0_rows[hs[0]] - s0_rows[hs[1]]) <= S0_RTOL * abs(s0_rows[hs[0]])
    report.add(Verdict.check('S0 stable across the two finest grids', 'bubble asymptotics', stable,
                             f'{s0_rows[hs[1]]:.6g} -> {s0_rows[hs[0]]:.6g} at h={finest:.4g}'))

    grid = min(grids, key=lambda g: max(g.spacing))
    bp = bubble_family(grid, params, cutoff_inner=cutoff, alpha=alpha, eps_list=[min(eps_list)])[0]
    U = talenti_bubble(bp, grid, params).values
    q1, q2 = sobolev_quotient(U, grid, params), sobolev_quotient(2.0 * U, grid, params)
    report.add(Verdict.check('Sobolev quotient invariant under scaling', 'bubble asymptotics',
                             abs(q1 - q2) <= 1e-10 * abs(q1)))
    bubble_min = sobolev_quotient_scan(grid, params, cutoff_inner=cutoff, alpha=alpha, eps_list=eps_list)
    floor = random_quotient_floor(grid, params, samples=random_samples, seed=ctx.config.seed)
    report.table('quotients', ['bubble_minimum', 'random_minimum'], [[bubble_min, floor]])
    report.add(Verdict.check('bubbles beat random fields', 'bubbles near-optimal', bubble_min <= floor,
                             f'{bubble_min:.6g} <= {floor:.6g}'))
    return report


# --------------------------------------------------------------------------- energy estimate

def run_energy_estimate(ctx: Context, eps_list: Optional[Sequence[float]] = None) -> ExperimentReport:
    report, params, kernel = ctx.report, ctx.params, ctx.kernel
    s = ctx.settings
    if not params.lam > 0:
        raise PreconditionError('energy estimate needs lambda > 0')
    ts = ctx.thresholds()
    if not params.lam < ts.values.lambda_sharp:
        raise PreconditionError('energy estimate needs lambda below lambda_sharp')
    base = minimize_in_ball(params, kernel, ts.values.r0, s.tol, s.max_iter, bounds=ts.values)
    if not base.converged:
        report.add(Verdict('small-energy minimizer', 'ball minimization', INCONCLUSIVE, base.status))
        return report
    c_min = base.energy.total
    window = mountain_pass_window(c_min, ts.S0, params.dim_N, params.p)
    family = bubble_family(ctx.grid, params, eps_list=eps_list)
    zero = Field.zeros(ctx.grid)
    rows = []
    for bp in family:
        U = talenti_bubble(bp, ctx.grid, params)
        R0, _ = top_endpoint(base.field, U, params, kernel, ts.values.r0)
        ts_ = np.linspace(0.0, R0, SCAN_SAMPLES)
        path_max = max(e for _, e in path_energies(base.field, U, ts_, kernel, params))
        bubble_max = max(e for _, e in path_energies(zero, U, ts_, kernel, params))
        interaction = path_max - c_min - bubble_max
        rows.append([bp.eps_b, R0, c_min, path_max, bubble_max, interaction, window, path_max < window])
    report.table('energy_estimate', ['eps_b', 'R0', 'c_min', 'path_max', 'bubble_max', 'interaction',
                                     'window', 'below_window'], rows)
    smallest = min(rows, key=lambda r: r[0])
    report.add(Verdict.check('path maximum below window at the smallest eps_b', 'bubble energy estimate',
                             bool(smallest[-1]), f'{smallest[3]:.6g} < {window:.6g}'))
    return report


# --------------------------------------------------------------------------- dispatch

def _from_config(name: str, ctx: Context) -> ExperimentReport:
    c = ctx.config
    if name == 'thresholds':
        return run_thresholds(ctx, int(c.param('sample_count', 10000)))
    if name == 'solve':
        return run_solve(ctx, float(c.param('lambda_prime_factor', 1.25)))
    if name == 'branch':
        return run_branch_diagram(ctx, c.param('lambdas'), c.param('lambda_hi'), c.param('tol_lambda'))
    if name == 'two_solution':
        lam = c.param('lambda')
        if lam is None and c.param('lambda_fraction') is not None:
            lam = float(c.param('lambda_fraction')) * ctx.thresholds().values.lambda_sharp
        return run_two_solution(ctx, lam, c.param('bubble_eps'))
    if name == 'nonexistence':
        return run_nonexistence_sweep(ctx, c.param('lambdas'), int(c.param('init_count', 20)),
                                      bool(c.param('contrast', True)))
    if name == 'scaling':
        geometry = ctx.grid.geometry
        fn = bump(geometry.center, float(c.param('bump_radius', 0.8 * geometry.inradius)))
        u = Field.from_function(ctx.grid, fn)
        return run_scaling_test(ctx, u, float(c.param('tau_step', 0.05)), fn=fn)
    if name == 'beta_seq':
        return run_beta_sequence(ctx, int(c.param('k_max')))
    if name == 'harnack':
        return run_harnack_floor(ctx, c.param('eps_list'), c.param('probe_center'), c.param('probe_radius'))
    if name == 'bubbles':
        return run_bubbles(ctx, c.param('resolutions'), c.param('eps_list'),
                           tuple(c.param('t_exponents', (4.0,))), int(c.param('random_samples', 64)))
    if name == 'energy_estimate':
        return run_energy_estimate(ctx, c.param('eps_list'))
    raise PreconditionError(f'unknown experiment {name!r}')


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    _logger.info('Preparing %s on %s grid at resolution %s', config.experiment, config.geometry.kind,
                 config.resolution)
    ctx = prepare(config)
    return _from_config(config.experiment, ctx)
