import pytest

from mlnpde.errors import ParameterError
from mlnpde.functionals.thresholds import (
    apq_ok, mountain_pass_window, ps_level_bound, shell_radius, thresholds)
from mlnpde.lattice.params import ModelParams


@pytest.fixture
def params():
    return ModelParams(3, 2.0, 1.5, 0.5, 0.1, 0.5)


@pytest.mark.parametrize('p, q, n, expected', [
    (2.0, 1.5, 3, True),
    (2.5, 1.1, 3, True),
    (1.5, 1.2, 2, False),
    (3.0, 2.9, 4, False),
    (3.0, 2.95, 100, True),
    (3.0, 2.95, 13, True),
    (3.0, 2.9, 13, False),
])
def test_apq_range(p, q, n, expected):
    assert apq_ok(p, q, n) is expected


def test_shell_radius_sits_past_the_peak():
    p, r, C1 = 2.0, 6.0, 0.1
    r0, delta0 = shell_radius(p, r, C1)
    peak = (C1 * r) ** (-1.0 / (r - p))
    assert r0 > peak
    assert r0 ** p / p - C1 * r0 ** r == pytest.approx(2.0 * delta0)
    assert delta0 == pytest.approx(0.25 * (peak ** p / p - C1 * peak ** r), rel=1e-8)


def test_sharp_threshold_is_the_smaller_one(params):
    t = thresholds(params, S0_estimate=5.0, omega_measure=1.0, C1=0.1, C2=0.5)
    assert t.lambda_sharp == min(t.lambda_star, t.lambda_star_star)
    assert t.lambda_star > 0 and t.lambda_star_star > 0
    assert t.apq_ok
    assert set(t.as_dict()) >= {'lambda_star', 'lambda_sharp', 'r0', 'delta0'}


def test_thresholds_refuse_nonpositive_constants(params):
    with pytest.raises(ParameterError):
        thresholds(params, 5.0, 1.0, 0.0, 0.5)


def test_level_bound_drops_with_lambda(params):
    free = ps_level_bound(params.with_lambda(0.0), 5.0, 1.0)
    assert free == pytest.approx(5.0 ** 1.5 / 3)
    assert ps_level_bound(params, 5.0, 1.0) < free
    assert mountain_pass_window(-0.1, 5.0, 3, 2.0) == pytest.approx(free - 0.1)
