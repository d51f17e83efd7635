import pytest

from mlnpde.errors import ParameterError
from mlnpde.lattice.params import ModelParams


def test_r_defaults_to_critical_exponent():
    params = ModelParams(3, 2.0, 1.5, 0.5, 0.1, 1.0)
    assert params.r == pytest.approx(6.0)
    assert params.critical_exponent == pytest.approx(6.0)
    assert params.is_critical


def test_explicit_subcritical_r():
    params = ModelParams(3, 2.0, 1.5, 0.5, 0.1, 1.0, r=4.0)
    assert params.r == 4.0
    assert not params.is_critical


def test_low_dimension_needs_explicit_r():
    with pytest.raises(ParameterError):
        ModelParams(1, 2.0, 1.5, 0.5, 0.1, 1.0)
    params = ModelParams(1, 2.0, 1.5, 0.5, 0.1, 1.0, r=4.0)
    assert params.critical_exponent is None
    assert not params.is_critical


@pytest.mark.parametrize('kwargs', [
    dict(dim_N=3, p=1.0, q=0.9, s=0.5, eps=0.1, lam=1.0),
    dict(dim_N=3, p=2.0, q=2.0, s=0.5, eps=0.1, lam=1.0),
    dict(dim_N=3, p=2.0, q=1.0, s=0.5, eps=0.1, lam=1.0),
    dict(dim_N=3, p=2.0, q=1.5, s=1.0, eps=0.1, lam=1.0),
    dict(dim_N=3, p=2.0, q=1.5, s=0.5, eps=1.5, lam=1.0),
    dict(dim_N=3, p=2.0, q=1.5, s=0.5, eps=0.1, lam=float('nan')),
    dict(dim_N=3, p=2.0, q=1.5, s=0.5, eps=0.1, lam=1.0, r=1.5),
])
def test_rejects_invalid_tuples(kwargs):
    with pytest.raises(ParameterError):
        ModelParams(**kwargs)


def test_purely_local_limit_is_admitted():
    assert ModelParams(3, 2.0, 1.5, 0.5, 0.0, 1.0).eps == 0.0


def test_replacements_leave_the_original_untouched():
    params = ModelParams(3, 2.0, 1.5, 0.5, 0.1, 1.0)
    other = params.with_lambda(2.0).with_eps(0.3)
    assert (params.lam, params.eps) == (1.0, 0.1)
    assert (other.lam, other.eps, other.r) == (2.0, 0.3, params.r)
    assert other.as_dict()['lambda'] == 2.0
    assert params.sp == pytest.approx(1.0)
