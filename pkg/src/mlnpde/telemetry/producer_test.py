from unittest import mock

import pytest

from mlnpde.telemetry import producer as prod
from mlnpde.telemetry.connection import Connection


@pytest.fixture
def influx(monkeypatch):
    monkeypatch.setenv('INFLUX_HOST', 'localhost:8086')
    monkeypatch.setenv('INFLUX_TOKEN', 'token')
    with mock.patch('mlnpde.telemetry.connection.influxdb_client.InfluxDBClient') as client:
        yield client


def test_connection_reads_the_environment(influx):
    connection = Connection()
    assert connection.url == 'http://localhost:8086'
    assert connection.bucket == 'mlnpde'
    connection.connect()
    influx.assert_called_once_with(url='http://localhost:8086', token='token', org='mlnpde')
    connection.close()
    influx.return_value.close.assert_called_once()


def test_connection_without_host_logs_and_keeps_defaults(monkeypatch):
    monkeypatch.delenv('INFLUX_HOST', raising=False)
    connection = Connection()
    assert connection.url == ''
    assert connection.get_client() is None


def test_write_keeps_numeric_fields_only(influx):
    producer = prod.Producer('solve')
    write_api = influx.return_value.write_api.return_value
    producer.write({'energy': -0.25, 'converged': True, 'status': 'ok'}, tags={'kind': 'minimizer'})
    record = write_api.write.call_args.kwargs['record']
    line = record.to_line_protocol()
    assert line.startswith('solve,kind=minimizer ')
    assert 'energy=-0.25' in line and 'converged=1i' in line
    assert 'status' not in line.split(' ')[1]
    assert write_api.write.call_args.kwargs['bucket'] == 'mlnpde'


def test_write_errors_are_logged_not_raised(influx):
    producer = prod.Producer()
    influx.return_value.write_api.return_value.write.side_effect = RuntimeError('down')
    assert producer.write({'energy': 1.0}) is None


def test_sink_follows_the_switch(monkeypatch, influx):
    monkeypatch.setattr(prod, 'TELEMETRY_ENABLED', False)
    assert prod.sink('solve') is None
    monkeypatch.setattr(prod, 'TELEMETRY_ENABLED', True)
    assert isinstance(prod.sink('solve'), prod.Producer)
