import json

import pytest

from mlnpde.driver.config import SolverSettings, load_config, parse_config
from mlnpde.errors import ConfigError


def _raw(**changes):
    raw = {
        'experiment': 'branch',
        'model': {'N': 2, 'p': 1.5, 'q': 1.2, 's': 0.5, 'eps': 0.5, 'lambda': 0.1},
        'geometry': {'kind': 'box', 'size': [1, 1]},
        'resolution': 24,
        'params': {'lambdas': [0.05, 0.1]},
    }
    raw.update(changes)
    return raw


def test_parses_a_complete_document():
    config = parse_config(_raw(seed=3, format='csv', solver={'tol': 1e-6}))
    assert config.experiment == 'branch'
    assert config.model.r == pytest.approx(6.0)
    assert config.geometry.build().dim == 2
    assert (config.seed, config.fmt, config.resolution) == (3, 'csv', 24)
    assert config.solver.tol == 1e-6 and config.solver.max_outer == SolverSettings().max_outer
    assert config.param('lambdas') == [0.05, 0.1]
    assert config.as_dict()['model']['lambda'] == 0.1


def test_geometry_shorthands():
    box = parse_config(_raw(geometry={'kind': 'box', 'size': 2.0}))
    assert box.geometry.size == (2.0, 2.0)
    ball = parse_config(_raw(geometry={'kind': 'ball', 'size': 1.0}))
    assert ball.geometry.build().dim == 2


@pytest.mark.parametrize('changes', [
    {'colour': 'red'},
    {'experiment': 'sweep'},
    {'params': {}},
    {'format': 'xml'},
    {'model': {'N': 2, 'p': 1.5, 'q': 1.6, 's': 0.5, 'eps': 0.5}},
    {'model': {'N': 2, 'p': 1.5, 's': 0.5, 'eps': 0.5}},
    {'geometry': {'kind': 'torus', 'size': 1}},
    {'solver': {'tol': 0}},
    {'solver': {'path_nodes': 8}},
    {'solver': {'restarts': 2}},
])
def test_rejects_malformed_documents(changes):
    with pytest.raises(ConfigError):
        parse_config(_raw(**changes))


def test_load_fills_in_and_checks_the_experiment(tmp_path):
    raw = _raw()
    del raw['experiment']
    path = tmp_path / 'run.json'
    path.write_text(json.dumps(raw))
    assert load_config(str(path), 'branch').experiment == 'branch'
    declared = tmp_path / 'declared.json'
    declared.write_text(json.dumps(_raw()))
    with pytest.raises(ConfigError):
        load_config(str(declared), 'solve')


def test_load_reports_bad_json_and_missing_files(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"experiment": ')
    with pytest.raises(ConfigError):
        load_config(str(path))
    with pytest.raises(OSError):
        load_config(str(tmp_path / 'absent.json'))


def test_overrides():
    config = parse_config(_raw()).with_overrides(seed=9, output='out/x', fmt='csv')
    assert (config.seed, config.output, config.fmt) == (9, 'out/x', 'csv')
    with pytest.raises(ConfigError):
        config.with_overrides(fmt='xml')
