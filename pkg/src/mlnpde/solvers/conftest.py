import pytest

from mlnpde.lattice.grid import Geometry, build_grid
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.kernel import assemble_kernel


@pytest.fixture(scope='session')
def line_params():
    return ModelParams(1, 2.0, 1.5, 0.5, 0.5, 0.1, r=4.0)


@pytest.fixture(scope='session')
def line_kernel(line_params):
    grid = build_grid(Geometry.box([1.0]), 32)
    return assemble_kernel(grid, line_params)


@pytest.fixture(scope='session')
def curved_params():
    return ModelParams(1, 1.5, 1.2, 0.5, 0.5, 0.1, r=3.0)


@pytest.fixture(scope='session')
def curved_kernel(curved_params):
    grid = build_grid(Geometry.box([1.0]), 32)
    return assemble_kernel(grid, curved_params)
