import numpy as np
import pytest

from mlnpde.errors import KernelBudgetError, ParameterError
from mlnpde.lattice.grid import Geometry, build_grid
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.kernel import assemble_kernel


@pytest.fixture
def params():
    return ModelParams(2, 1.5, 1.2, 0.5, 0.5, 1.0)


@pytest.fixture
def grid():
    return build_grid(Geometry.box([1.0, 1.0]), 8)


def test_weights_are_symmetric_with_zero_diagonal(grid, params):
    kernel = assemble_kernel(grid, params)
    np.testing.assert_allclose(kernel.weights, kernel.weights.T)
    assert np.all(np.diag(kernel.weights) == 0.0)
    assert np.all(kernel.weights[~np.eye(kernel.size, dtype=bool)] > 0)
    np.testing.assert_allclose(kernel.row_sums, kernel.weights.sum(axis=1))


def test_weight_formula(grid, params):
    kernel = assemble_kernel(grid, params)
    x = grid.points
    d = np.linalg.norm(x[0] - x[1])
    assert kernel.weights[0, 1] == pytest.approx(2.0 * grid.cell_volume / d ** (params.dim_N + params.sp))


def test_kernel_is_read_only(grid, params):
    kernel = assemble_kernel(grid, params)
    with pytest.raises(ValueError):
        kernel.weights[0, 1] = 0.0


def test_budget_is_enforced(grid, params):
    with pytest.raises(KernelBudgetError):
        assemble_kernel(grid, params, max_nodes=10)


def test_check_refuses_other_exponents(grid, params):
    kernel = assemble_kernel(grid, params)
    kernel.check(params.with_lambda(3.0).with_eps(0.1))
    with pytest.raises(ParameterError):
        kernel.check(ModelParams(2, 1.5, 1.2, 0.4, 0.5, 1.0))


def test_weights_and_tails_stay_uncorrected(grid, params):
    kernel = assemble_kernel(grid, params)
    np.testing.assert_allclose(kernel.self_weights, kernel.tails.tail + kernel.boundary)
    assert np.all(kernel.self_weights > 0)
    assert np.all(kernel.near_field > 0)
    with pytest.raises(ValueError):
        kernel.boundary[0] = 0.0
