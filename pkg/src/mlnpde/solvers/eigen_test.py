import numpy as np
import pytest

from mlnpde.errors import ParameterError
from mlnpde.lattice.grid import Geometry, build_grid
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.discrete import mixed_power_sum
from mlnpde.operators.kernel import assemble_kernel
from mlnpde.solvers.eigen import embedding_constants, norm_ratio_ascent, principal_eigenpair
from mlnpde.solvers.inner import torsion


def test_local_eigenvalue_of_the_unit_interval():
    params = ModelParams(1, 2.0, 1.5, 0.5, 0.0, 1.0, r=4.0)
    kernel = assemble_kernel(build_grid(Geometry.box([1.0]), 128), params)
    lambda1, e1 = principal_eigenpair(params, kernel, tol=1e-8)
    assert lambda1 == pytest.approx(np.pi ** 2, rel=0.02)
    assert np.all(e1.values > 0)


def test_eigenvalue_grows_with_eps(line_kernel, line_params):
    low, _ = principal_eigenpair(line_params.with_eps(0.2), line_kernel, tol=1e-8)
    high, _ = principal_eigenpair(line_params.with_eps(0.8), line_kernel, tol=1e-8)
    assert low <= high


def _ratio(values, kernel, params, t):
    vol = kernel.grid.cell_volume
    lt = (np.sum(np.abs(values) ** t) * vol) ** (1 / t)
    return lt / mixed_power_sum(values, kernel, params) ** (1 / params.p)


def test_ratio_ascent_beats_its_start(curved_kernel, curved_params):
    start = torsion(curved_kernel, curved_params).values
    ratio, maximizer, _ = norm_ratio_ascent(curved_kernel, curved_params, curved_params.q)
    assert ratio >= _ratio(start, curved_kernel, curved_params, curved_params.q) * (1 - 1e-12)
    assert mixed_power_sum(maximizer.values, curved_kernel, curved_params) == pytest.approx(1.0)


def test_ratio_ascent_respects_frozen_modes(line_kernel, line_params):
    first = torsion(line_kernel, line_params).values
    frozen = (first / np.linalg.norm(first))[:, None]
    _, maximizer, _ = norm_ratio_ascent(line_kernel, line_params, 2.0, frozen=frozen,
                                        initial=np.linspace(-1.0, 1.0, line_kernel.size))
    assert abs(float(frozen[:, 0] @ maximizer.values)) < 1e-8


def test_embedding_constants_bound_the_torsion(curved_kernel, curved_params):
    C1, C2 = embedding_constants(curved_kernel, curved_params, S0=1.0)
    tau = torsion(curved_kernel, curved_params).values
    vol = curved_kernel.grid.cell_volume
    rho = mixed_power_sum(tau, curved_kernel, curved_params) ** (1 / curved_params.p)
    q, r = curved_params.q, curved_params.r
    assert np.sum(tau ** q) * vol / q <= C2 * rho ** q * (1 + 1e-9)
    assert np.sum(tau ** r) * vol / r <= C1 * rho ** r * (1 + 1e-9)


def test_guards(line_kernel, line_params):
    with pytest.raises(ParameterError):
        principal_eigenpair(line_params, line_kernel, tol=0.0)
    with pytest.raises(ParameterError):
        norm_ratio_ascent(line_kernel, line_params, 0.0)
