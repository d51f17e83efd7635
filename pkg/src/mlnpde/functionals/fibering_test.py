import numpy as np
import pytest

from mlnpde.errors import ParameterError
from mlnpde.functionals.energy import energy
from mlnpde.functionals.fibering import ONE, TWO, ZERO, fibering_profile
from mlnpde.lattice.grid import Field, Geometry, build_grid
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.kernel import assemble_kernel


@pytest.fixture(scope='module')
def setup():
    params = ModelParams(2, 1.5, 1.2, 0.5, 0.5, 0.05)
    grid = build_grid(Geometry.ball(1.0, 2), 12)
    kernel = assemble_kernel(grid, params)
    u = Field.from_function(grid, lambda x: 1.0 - np.sum(x ** 2, axis=1))
    return params, kernel, u


def test_profile_reproduces_the_energy_on_the_ray(setup):
    params, kernel, u = setup
    profile = fibering_profile(u, kernel, params)
    assert float(profile.value(profile.rho)) == pytest.approx(energy(u, kernel, params).total)
    half = u.with_values(0.5 * u.values)
    assert float(profile.value(0.5 * profile.rho)) == pytest.approx(energy(half, kernel, params).total)


def test_small_lambda_has_a_minimum_and_a_maximum(setup):
    params, kernel, u = setup
    profile = fibering_profile(u, kernel, params)
    assert profile.classification == TWO
    assert profile.t1 < profile.t2
    assert float(profile.value(profile.t1)) < 0 < float(profile.value(profile.t2))
    assert not profile.flagged
    assert abs(float(profile.h(profile.t2))) < 1e-6


def test_zero_lambda_leaves_only_the_maximum(setup):
    params, kernel, u = setup
    profile = fibering_profile(u, kernel, params.with_lambda(0.0))
    assert profile.classification == ONE
    assert profile.t1 is None and profile.t2 > 0


def test_large_lambda_removes_critical_points(setup):
    params, kernel, u = setup
    profile = fibering_profile(u, kernel, params.with_lambda(1e4))
    assert profile.classification == ZERO
    assert np.all(np.diff([v for _, v in profile.samples]) < 0)


def test_zero_field_is_refused(setup):
    params, kernel, u = setup
    with pytest.raises(ParameterError):
        fibering_profile(Field.zeros(u.grid), kernel, params)
