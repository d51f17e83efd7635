import os

import influxdb_client

import mlnpde.customlogger as log


class Connection():
    """
    Connection to the InfluxDB instance receiving solver telemetry.
    Settings come from INFLUX_HOST, INFLUX_TOKEN, INFLUX_ORG and INFLUX_BUCKET.
    """

    def __init__(self):
        self._logger = log.get_logger('telemetry')
        self.client = None
        self._url = ''
        self._token = None
        self._org = 'mlnpde'
        self.bucket = 'mlnpde'
        try:
            # host and port, e.g. localhost:8086
            self._url = os.environ['INFLUX_HOST']
            self._token = os.environ['INFLUX_TOKEN']
            self._org = os.getenv('INFLUX_ORG', self._org)
            self.bucket = os.getenv('INFLUX_BUCKET', self.bucket)
        except KeyError as e:
            self._logger.error(f"Missing environment variable: {e}")
        # influxdb-client wants the full URL
        if self._url and not self._url.startswith('http'):
            self._url = "http://" + self._url

    @property
    def url(self):
        return self._url

    def connect(self):
        self._logger.debug('Connecting to %s', self._url)
        try:
            self.client = influxdb_client.InfluxDBClient(
                url=self._url,
                token=self._token,
                org=self._org
            )
            return self.client
        except Exception as e:
            self._logger.error('Unable to connect to Influx Database: %s' % e)

    def get_client(self):
        if self.client is not None and self.client.ping():
            return self.client
        return None

    def close(self):
        if self.client:
            self.client.close()
            self._logger.debug('Connection to influxDB closed')
