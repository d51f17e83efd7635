import numpy as np
import pytest

from mlnpde.bubbles.talenti import bubble_family
from mlnpde.driver import experiments as ex
from mlnpde.driver.config import parse_config
from mlnpde.driver.report import INCONCLUSIVE, PASS
from mlnpde.errors import PreconditionError
from mlnpde.lattice.grid import Field

LINE_MODEL = {'N': 1, 'p': 2.0, 'q': 1.5, 's': 0.5, 'eps': 0.5, 'lambda': 0.1, 'r': 4.0}
PLANE_MODEL = {'N': 2, 'p': 1.5, 'q': 1.2, 's': 0.5, 'eps': 0.5, 'lambda': 0.1}
# N exceeds the grid dimension: the kernel carries the exponent N + sp
SPACE_MODEL = {'N': 3, 'p': 2.0, 'q': 1.5, 's': 0.5, 'eps': 0.5, 'lambda': 0.1}


def _context(experiment, model=LINE_MODEL, resolution=32, size=(1.0,), dim=None, **params):
    geometry = {'kind': 'box', 'size': list(size)}
    if dim is not None:
        geometry['dim'] = dim
    config = parse_config({
        'experiment': experiment,
        'model': model,
        'geometry': geometry,
        'resolution': resolution,
        'params': params,
    })
    return ex.prepare(config)


def _verdicts(report):
    return {v.name: v.status for v in report.verdicts}


def test_solve_pipeline_on_the_line():
    report = ex.run_experiment(_context('solve').config)
    verdicts = _verdicts(report)
    assert verdicts['sublinear solution has negative energy'] == PASS
    assert verdicts['minimal solution dominates sublinear'] == PASS
    assert verdicts['minimal report re-verifies'] == PASS
    assert verdicts['energy chain I(z_hat) <= I(w) < J(w) < 0'] == PASS
    names = [row[0] for row in report.tables[0].rows]
    assert names == ['sublinear', 'minimal', 'minimal_upper', 'truncated']
    assert np.isnan(report.tables[0].rows[0][-1])


def test_solve_publishes_telemetry():
    written = []

    class Recorder:
        def write(self, fields, tags=None):
            written.append((fields, tags))

    ex.attach_telemetry(Recorder())
    try:
        ex.run_solve(_context('solve'))
    finally:
        ex.attach_telemetry(None)
    solves = [tags['solve'] for _, tags in written]
    assert solves[:2] == ['sublinear', 'minimal'] and 'truncated' in solves
    assert all('lam' in fields for fields, _ in written)


def test_beta_sequence_on_the_line():
    ctx = _context('beta_seq', k_max=3)
    report = ex.run_beta_sequence(ctx, 3)
    assert [row[0] for row in report.tables[0].rows] == [1, 2, 3]
    assert _verdicts(report)['beta_k positive'] == PASS
    with pytest.raises(PreconditionError):
        ex.run_beta_sequence(ctx, 0)


def test_harnack_floor_on_the_line():
    ctx = _context('harnack', eps_list=[0.8, 0.4, 0.2])
    report = ex.run_harnack_floor(ctx, [0.8, 0.4, 0.2])
    verdicts = _verdicts(report)
    assert verdicts['floors positive'] == PASS
    assert verdicts['solution floor above sublinear floor'] == PASS
    assert len(report.tables[0].rows) == 3


@pytest.mark.parametrize('kwargs', [
    dict(eps_list=[0.2, 0.4]),
    dict(eps_list=[0.4, 0.2], probe_radius=0.6),
    dict(eps_list=[0.4, 0.2], probe_center=[0.5], probe_radius=1e-4),
])
def test_harnack_guards(kwargs):
    ctx = _context('harnack', eps_list=kwargs['eps_list'])
    with pytest.raises(PreconditionError):
        ex.run_harnack_floor(ctx, **kwargs)


def test_scaling_without_critical_exponent_is_inconclusive():
    ctx = _context('scaling')
    fn = ex.bump(ctx.grid.geometry.center, 0.4)
    report = ex.run_scaling_test(ctx, Field.from_function(ctx.grid, fn), 0.05, fn=fn)
    verdicts = _verdicts(report)
    assert verdicts['derivative limit p - ps'] == PASS
    assert verdicts['one-sided scaling derivative bound'] == INCONCLUSIVE


def test_scaling_guards():
    ctx = _context('scaling')
    u = Field.from_function(ctx.grid, ex.bump(ctx.grid.geometry.center, 0.4))
    with pytest.raises(PreconditionError):
        ex.run_scaling_test(ctx, u, 0.2)
    with pytest.raises(PreconditionError):
        ex.run_scaling_test(ctx, Field.zeros(ctx.grid), 0.05)


def test_sweep_and_branch_guards():
    ctx = _context('nonexistence', lambdas=[0.5])
    with pytest.raises(PreconditionError):
        ex.run_nonexistence_sweep(ctx, [0.5])
    with pytest.raises(PreconditionError):
        ex.run_branch_diagram(ctx, [0.2, 0.1])
    with pytest.raises(PreconditionError):
        ctx.thresholds()


@pytest.mark.slow
def test_scaling_laws_in_the_plane():
    ctx = _context('scaling', model=PLANE_MODEL, resolution=48, size=(1.0, 1.0))
    geometry = ctx.grid.geometry
    fn = ex.bump(geometry.center, 0.8 * geometry.inradius)
    report = ex.run_scaling_test(ctx, Field.from_function(ctx.grid, fn), 0.05, fn=fn)
    verdicts = _verdicts(report)
    assert verdicts['seminorm scaling ratios'] == PASS
    assert verdicts['one-sided scaling derivative bound'] == PASS


@pytest.mark.slow
def test_nonpositive_lambda_has_only_the_trivial_solution():
    model = dict(PLANE_MODEL, **{'lambda': -1.0})
    ctx = _context('nonexistence', model=model, resolution=16, size=(1.0, 1.0), lambdas=[-1.0, 0.0])
    report = ex.run_nonexistence_sweep(ctx, [-1.0, 0.0], init_count=4, contrast=False)
    assert all(v.status == PASS for v in report.verdicts)
    assert len(report.tables[0].rows) == 8


@pytest.mark.slow
def test_thresholds_in_the_plane():
    ctx = _context('thresholds', model=PLANE_MODEL, resolution=16, size=(1.0, 1.0))
    report = ex.run_thresholds(ctx, sample_count=1000)
    verdicts = _verdicts(report)
    assert verdicts['threshold positivity'] == PASS
    assert verdicts['first eigenvalue positive'] == PASS
    quantities = {row[0] for row in report.tables[0].rows}
    assert {'lambda_sharp', 'S0_estimate', 'C1', 'C2'} <= quantities


@pytest.mark.slow
def test_branch_diagram_in_the_plane():
    ctx = _context('branch', model=PLANE_MODEL, resolution=16, size=(1.0, 1.0))
    sharp = ctx.thresholds().values.lambda_sharp
    lambdas = list(sharp * np.linspace(0.1, 1.0, 8))
    report = ex.run_branch_diagram(ctx, lambdas)
    verdicts = _verdicts(report)
    assert verdicts['branch monotone in lambda'] == PASS
    assert verdicts['branch energies negative'] == PASS
    assert verdicts['bracket lower end above lambda_sharp'] == PASS
    assert verdicts['no solution beyond the bracket'] == PASS

    tables = {t.name: t for t in report.tables}
    branch = tables['branch'].rows
    assert [row[0] for row in branch] == lambdas
    assert all(row[3] for row in branch)
    sups = [row[1] for row in branch]
    assert all(b >= a - ex.BRANCH_SLACK for a, b in zip(sups, sups[1:]))
    lo, hi, _, lam_sharp = tables['lambda_bracket'].rows[0]
    assert lam_sharp == sharp
    assert sharp <= lo <= hi < np.inf


@pytest.mark.slow
def test_bubble_constants_in_the_plane():
    ctx = _context('bubbles', model=PLANE_MODEL, resolution=16, size=(1.0, 1.0), resolutions=[24, 32])
    report = ex.run_bubbles(ctx, [24, 32], random_samples=16)
    assert _verdicts(report)['Sobolev quotient invariant under scaling'] == PASS
    assert {t.name for t in report.tables} == {'asymptotics', 'constants', 'quotients'}


def test_two_solution_and_energy_estimate_guards():
    ctx = _context('two_solution')
    with pytest.raises(PreconditionError):
        ex.run_two_solution(ctx, lam=-0.1)
    # N = 1 has no critical exponent, so no thresholds
    with pytest.raises(PreconditionError):
        ex.run_two_solution(ctx)
    with pytest.raises(PreconditionError):
        ex.run_energy_estimate(_context('energy_estimate'))


@pytest.mark.slow
def test_range_condition_refuses_the_critical_plane_model():
    ctx = _context('two_solution', model=PLANE_MODEL, resolution=16, size=(1.0, 1.0))
    with pytest.raises(PreconditionError):
        ex.run_two_solution(ctx)


@pytest.mark.slow
def test_two_solution_finds_the_small_energy_minimizer():
    ctx = _context('two_solution', model=SPACE_MODEL, resolution=48, dim=1)
    lam = 0.5 * ctx.thresholds().values.lambda_sharp
    report = ex.run_two_solution(ctx, lam=lam)
    assert _verdicts(report)['small-energy minimizer'] == PASS
    solutions = next(t for t in report.tables if t.name == 'solutions')
    assert solutions.rows[0][0] == 'ball_minimizer'
    assert solutions.rows[0][4] < 0


@pytest.mark.slow
def test_energy_estimate_tabulates_every_bubble():
    ctx = _context('energy_estimate', model=SPACE_MODEL, resolution=48, dim=1)
    ctx.params = ctx.params.with_lambda(0.5 * ctx.thresholds().values.lambda_sharp)
    report = ex.run_energy_estimate(ctx)
    table = next(t for t in report.tables if t.name == 'energy_estimate')
    assert len(table.rows) == len(bubble_family(ctx.grid, ctx.params))
    assert all(np.isfinite(row[5]) and row[1] > 0 for row in table.rows)
    assert 'path maximum below window at the smallest eps_b' in _verdicts(report)
