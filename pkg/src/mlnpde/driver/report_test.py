import json

import numpy as np
import pytest

from mlnpde.driver import report as rp


def _report(*statuses):
    report = rp.ExperimentReport('solve', {'seed': 0, 'model': {'p': 1.5}})
    for k, status in enumerate(statuses):
        report.add(rp.Verdict(f'check {k}', 'anchor', status))
    report.table('solutions', ['name', 'value', 'converged'],
                 [['a', 0.1, True], ['b', np.float64(float('inf')), np.bool_(False)]])
    return report


@pytest.mark.parametrize('statuses, outcome, code', [
    ((rp.PASS, rp.PASS), rp.PASS, rp.EXIT_PASSED),
    ((rp.PASS, rp.INCONCLUSIVE), rp.INCONCLUSIVE, rp.EXIT_INCONCLUSIVE),
    ((rp.INCONCLUSIVE, rp.FAIL), rp.FAIL, rp.EXIT_FAILED),
    ((), rp.PASS, rp.EXIT_PASSED),
])
def test_outcome_aggregation(statuses, outcome, code):
    report = _report(*statuses)
    assert report.outcome == outcome
    assert report.exit_code == code


def test_verdict_check():
    assert rp.Verdict.check('x', 'y', True).status == rp.PASS
    assert rp.Verdict.check('x', 'y', False).status == rp.FAIL


def test_json_output_is_deterministic(tmp_path):
    first, second = tmp_path / 'a' / 'run', tmp_path / 'b' / 'run'
    assert rp.emit_outputs(_report(rp.PASS), 'json', str(first)) == rp.EXIT_PASSED
    rp.emit_outputs(_report(rp.PASS), 'json', str(second))
    text = (tmp_path / 'a' / 'run.json').read_text()
    assert text == (tmp_path / 'b' / 'run.json').read_text()
    document = json.loads(text)
    assert document['outcome'] == rp.PASS
    assert document['tables']['solutions']['rows'][1] == ['b', 'inf', False]
    assert len(document['provenance']['input_sha256']) == 64


def test_csv_output_preserves_doubles(tmp_path):
    prefix = tmp_path / 'run'
    report = _report(rp.FAIL)
    report.table('values', ['x'], [[0.1 + 0.2], [1.0 / 3.0]])
    assert rp.emit_outputs(report, 'csv', str(prefix)) == rp.EXIT_FAILED
    table = rp.read_csv(str(tmp_path / 'run_values.csv'))
    assert [row[0] for row in table.rows] == [0.1 + 0.2, 1.0 / 3.0]
    verdicts = rp.read_csv(str(tmp_path / 'run_verdicts.csv'))
    assert verdicts.columns == ['name', 'anchor', 'status', 'detail']
    assert verdicts.rows[0][2] == rp.FAIL
    solutions = rp.read_csv(str(tmp_path / 'run_solutions.csv'))
    assert solutions.rows[0] == ['a', 0.1, True]


def test_unwritable_prefix_is_an_io_error(tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('')
    assert rp.emit_outputs(_report(rp.PASS), 'json', str(blocker / 'run')) == rp.EXIT_IO


def test_cells():
    assert rp.format_cell(None) == '' and rp.parse_cell('') is None
    assert rp.format_cell(np.int64(3)) == '3' and rp.parse_cell('3') == 3
    assert rp.parse_cell('boundary-stuck') == 'boundary-stuck'
