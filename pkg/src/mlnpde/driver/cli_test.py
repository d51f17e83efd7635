import json

import pytest

from mlnpde.driver import cli, experiments
from mlnpde.driver.report import (
    EXIT_FAILED, EXIT_IO, EXIT_PASSED, EXIT_PRECONDITION, ExperimentReport, Verdict)
from mlnpde.errors import PreconditionError


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / 'solve.json'
    path.write_text(json.dumps({
        'model': {'N': 1, 'p': 2.0, 'q': 1.5, 's': 0.5, 'eps': 0.5, 'lambda': 0.1, 'r': 4.0},
        'geometry': {'kind': 'box', 'size': [1.0]},
        'resolution': 16,
    }))
    return str(path)


def _stub(status):
    def run(config):
        report = ExperimentReport(config.experiment, config.as_dict())
        report.add(Verdict('stub', 'stub', status))
        return report
    return run


def test_passing_run_writes_outputs(monkeypatch, tmp_path, config_path):
    monkeypatch.setattr(experiments, 'run_experiment', _stub('pass'))
    out = tmp_path / 'out' / 'run'
    assert cli.main(['solve', '--config', config_path, '--out', str(out)]) == EXIT_PASSED
    document = json.loads((tmp_path / 'out' / 'run.json').read_text())
    assert document['provenance']['config']['seed'] == 0


def test_failing_verdict_exits_2(monkeypatch, tmp_path, config_path):
    monkeypatch.setattr(experiments, 'run_experiment', _stub('fail'))
    code = cli.main(['solve', '--config', config_path, '--out', str(tmp_path / 'run'),
                     '--format', 'csv', '--seed', '4'])
    assert code == EXIT_FAILED
    assert (tmp_path / 'run_verdicts.csv').exists()


def test_refused_run_exits_1(monkeypatch, tmp_path, config_path):
    def refuse(config):
        raise PreconditionError('no')
    monkeypatch.setattr(experiments, 'run_experiment', refuse)
    assert cli.main(['solve', '--config', config_path, '--out', str(tmp_path / 'run')]) == EXIT_PRECONDITION


def test_bad_config_exits_1(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps({'model': {}, 'geometry': {}, 'resolution': 8}))
    assert cli.main(['solve', '--config', str(path)]) == EXIT_PRECONDITION


def test_missing_config_exits_4(tmp_path):
    assert cli.main(['solve', '--config', str(tmp_path / 'absent.json')]) == EXIT_IO


def test_unwritable_output_exits_4(monkeypatch, tmp_path, config_path):
    monkeypatch.setattr(experiments, 'run_experiment', _stub('pass'))
    blocker = tmp_path / 'file'
    blocker.write_text('')
    assert cli.main(['solve', '--config', config_path, '--out', str(blocker / 'run')]) == EXIT_IO


def test_subcommands_use_dashes():
    args = cli.build_parser().parse_args(['two-solution', '--config', 'x.json'])
    assert args.command == 'two-solution'
