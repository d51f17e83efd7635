import numpy as np
import pytest

from mlnpde.errors import ParameterError
from mlnpde.functionals.energy import energy
from mlnpde.lattice.grid import Field
from mlnpde.solvers.inner import solve_sublinear
from mlnpde.solvers.monotone import (
    find_supersolution, minimize_truncated, monotone_iterate, strong_residual)
from mlnpde.solvers.report import BLOWUP, ITERATE_LIMIT, OK


@pytest.fixture(scope='module')
def bounds(line_kernel, line_params):
    w = solve_sublinear(line_params, line_kernel, tol=1e-10).field
    upper = find_supersolution(line_params, line_kernel, above=w)
    return w, upper


def test_supersolution_dominates_the_sublinear_solution(bounds, line_kernel, line_params):
    w, upper = bounds
    assert upper is not None
    assert np.all(upper.values >= w.values)
    assert np.all(strong_residual(upper.values, line_kernel, line_params) >= 0)


def test_iteration_climbs_to_the_minimal_solution(bounds, line_kernel, line_params):
    w, upper = bounds
    seen = []
    z = monotone_iterate(w, upper, line_params, line_kernel, tol=1e-8,
                         monitor=lambda k, values: seen.append(values.copy()))
    assert z.converged and z.status == OK
    assert z.residual_norm <= 1e-8
    assert np.all(z.field.values >= w.values - 1e-10)
    assert np.all(z.field.values <= upper.values + 1e-10)
    for before, after in zip(seen, seen[1:]):
        assert np.all(after >= before - 1e-10)


def test_truncated_minimizer_is_pinched(bounds, line_kernel, line_params):
    w, upper = bounds
    z_hat = minimize_truncated(w, upper, line_params, line_kernel, tol=1e-8)
    assert z_hat.converged and z_hat.status == OK
    assert np.all(z_hat.field.values >= w.values - 1e-9)
    assert np.all(z_hat.field.values <= upper.values + 1e-9)
    assert z_hat.energy.total <= energy(w, line_kernel, line_params).total


def test_large_lambda_has_no_supersolution_and_blows_up(line_kernel, line_params):
    at = line_params.with_lambda(100.0)
    w = solve_sublinear(at, line_kernel, tol=1e-10).field
    assert find_supersolution(at, line_kernel, above=w) is None
    z = monotone_iterate(w, None, at, line_kernel, tol=1e-8, max_outer=200, cap=1e3)
    assert not z.converged
    assert z.status in (BLOWUP, ITERATE_LIMIT)


def test_ordering_guards(bounds, line_kernel, line_params):
    w, upper = bounds
    with pytest.raises(ParameterError):
        monotone_iterate(-1.0 * upper, upper, line_params, line_kernel, tol=1e-8)
    with pytest.raises(ParameterError):
        monotone_iterate(upper, w, line_params, line_kernel, tol=1e-8)
    with pytest.raises(ParameterError):
        minimize_truncated(Field.zeros(w.grid), upper, line_params, line_kernel, tol=1e-8)
