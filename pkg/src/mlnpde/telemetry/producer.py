import os
from numbers import Real

from influxdb_client import Point
from influxdb_client.client.write_api import SYNCHRONOUS

import mlnpde.customlogger as log
from mlnpde.telemetry.connection import Connection

TELEMETRY_ENABLED = bool(os.getenv('INFLUX_HOST'))


class Producer():
    """Writes one point per finished solve or branch point."""

    def __init__(self, source='mlnpde'):
        self._influxdb = Connection()
        self._influxClient = self._influxdb.connect()
        self._write_api = self._influxClient.write_api(
            write_options=SYNCHRONOUS)
        self._logger = log.get_logger('telemetry')
        self.source = source

    def write(self, fields, tags=None):
        """
        Add a point to the time series; non-numeric fields are skipped.
        """
        try:
            data = Point(measurement_name=self.source)
            for k, v in (tags or {}).items():
                data.tag(k, str(v))
            for k, v in fields.items():
                if isinstance(v, Real) and not isinstance(v, bool):
                    data.field(k, float(v))
                elif isinstance(v, bool):
                    data.field(k, int(v))
                else:
                    self._logger.debug("Non-numerical value for '%s': %s not added to InfluxDB", k, v)
            self._logger.debug("Writing value %s" % str(data))
            return self._write_api.write(bucket=self._influxdb.bucket, record=data)
        except Exception as e:
            self._logger.error('Unable to write data for measurement %s: %s' % (str(fields), e))

    def close(self):
        self._influxdb.close()


def sink(source='mlnpde'):
    """A Producer when INFLUX_HOST is set, otherwise None."""
    if not TELEMETRY_ENABLED:
        return None
    try:
        return Producer(source)
    except Exception as e:
        log.get_logger('telemetry').error('Telemetry disabled: %s' % e)
        return None
