import numpy as np

from mlnpde.solvers.descent import descend, preconditioner


def test_quadratic_is_solved_by_the_first_unit_step(line_kernel, line_params):
    precond = preconditioner(line_kernel, line_params.eps)
    b = np.full(line_kernel.size, line_kernel.grid.cell_volume)
    result = descend(lambda x: 0.5 * precond.inner(x, x) - float(b @ x),
                     lambda x: precond.matrix @ x - b,
                     np.zeros_like(b), precond, line_kernel.grid.cell_volume, 1e-10, 50)
    assert result.converged
    assert result.iterations == 1
    np.testing.assert_allclose(result.x, precond.solve(b))


def test_stop_condition_met_at_start(line_kernel, line_params):
    precond = preconditioner(line_kernel, line_params.eps)
    x0 = np.ones(line_kernel.size)
    result = descend(lambda x: float(x @ x), lambda x: 2 * x, x0, precond,
                     line_kernel.grid.cell_volume, 1e-12, 10, stop=lambda x: True)
    assert result.iterations == 0 and result.converged
    np.testing.assert_array_equal(result.x, x0)


def test_flat_objective_stagnates(line_kernel, line_params):
    precond = preconditioner(line_kernel, line_params.eps)
    g = np.ones(line_kernel.size)
    result = descend(lambda x: 1.0, lambda x: g, np.zeros(line_kernel.size), precond,
                     line_kernel.grid.cell_volume, 1e-12, 10)
    assert result.stagnated and not result.converged


def test_projection_is_reported(line_kernel, line_params):
    precond = preconditioner(line_kernel, line_params.eps)
    target = np.full(line_kernel.size, 5.0)

    def clip(x):
        return np.minimum(x, 1.0), bool(np.any(x > 1.0))

    result = descend(lambda x: float(np.sum((x - target) ** 2)), lambda x: 2 * (x - target),
                     np.zeros(line_kernel.size), precond, line_kernel.grid.cell_volume,
                     1e-12, 20, project=clip)
    assert result.projection_active
    assert np.all(result.x <= 1.0)


def test_factorization_is_cached_per_eps(line_kernel):
    assert preconditioner(line_kernel, 0.5) is preconditioner(line_kernel, 0.5)
    assert preconditioner(line_kernel, 0.5) is not preconditioner(line_kernel, 0.25)
