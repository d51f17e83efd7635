import numpy as np
import pytest

from mlnpde.errors import GridMismatchError, ParameterError
from mlnpde.functionals.energy import dual_norm
from mlnpde.lattice.grid import Field, Geometry, build_grid
from mlnpde.operators.discrete import mixed_action
from mlnpde.solvers.inner import solve_inner, solve_sublinear, torsion


def test_inner_solve_meets_its_tolerance(curved_kernel, curved_params):
    grid = curved_kernel.grid
    rhs = Field.from_function(grid, lambda x: grid.cell_volume * (1.0 + x[:, 0]))
    report = solve_inner(rhs, curved_kernel, curved_params, tol=1e-9)
    assert report.converged
    residual = mixed_action(report.field.values, curved_kernel, curved_params) - rhs.values
    assert dual_norm(residual, grid.cell_volume) <= 1e-9


def test_torsion_is_positive_and_symmetric(curved_kernel, curved_params):
    tau = torsion(curved_kernel, curved_params).values
    assert np.all(tau > 0)
    np.testing.assert_allclose(tau, tau[::-1], rtol=1e-6)


def test_sublinear_solutions_scale_with_lambda(line_kernel, line_params):
    small = solve_sublinear(line_params, line_kernel, tol=1e-10)
    large = solve_sublinear(line_params.with_lambda(2 * line_params.lam), line_kernel, tol=1e-10)
    assert small.converged and large.converged
    exponent = 1.0 / (line_params.p - line_params.q)
    assert large.field.sup_norm() / small.field.sup_norm() == pytest.approx(2 ** exponent, rel=0.01)
    assert small.energy.total < 0
    assert np.all(small.field.values > 0)


def test_guards(line_kernel, line_params):
    with pytest.raises(ParameterError):
        solve_sublinear(line_params.with_lambda(0.0), line_kernel, tol=1e-8)
    with pytest.raises(ParameterError):
        solve_inner(Field.zeros(line_kernel.grid), line_kernel, line_params, tol=0.0)
    other = build_grid(Geometry.box([1.0]), 32)
    with pytest.raises(GridMismatchError):
        solve_inner(Field.zeros(other), line_kernel, line_params, tol=1e-8)
