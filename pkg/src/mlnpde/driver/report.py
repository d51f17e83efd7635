"""
Experiment reports and their CSV / JSON emission.

CSV cells use repr() for floats, which round-trips IEEE-754 doubles
exactly; the JSON document is written with sorted keys and carries no
timestamps, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

import mlnpde.customlogger as log

PASS = 'pass'
FAIL = 'fail'
INCONCLUSIVE = 'inconclusive'

EXIT_PASSED = 0
EXIT_PRECONDITION = 1
EXIT_FAILED = 2
EXIT_INCONCLUSIVE = 3
EXIT_IO = 4

_logger = log.get_logger('driver')


@dataclass(frozen=True)
class Verdict:
    name: str
    anchor: str
    status: str
    detail: str = ''

    @classmethod
    def check(cls, name: str, anchor: str, ok: bool, detail: str = '') -> 'Verdict':
        return cls(name, anchor, PASS if ok else FAIL, detail)

    def as_dict(self) -> dict:
        return {'name': self.name, 'anchor': self.anchor, 'status': self.status, 'detail': self.detail}


@dataclass(frozen=True)
class Table:
    name: str
    columns: Sequence[str]
    rows: List[list] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {'columns': list(self.columns), 'rows': [[_plain(v) for v in row] for row in self.rows]}


@dataclass
class ExperimentReport:
    experiment: str
    config: Dict[str, Any]
    verdicts: List[Verdict] = field(default_factory=list)
    tables: List[Table] = field(default_factory=list)

    def add(self, verdict: Verdict) -> Verdict:
        self.verdicts.append(verdict)
        level = _logger.info if verdict.status != FAIL else _logger.error
        level('[%s] %s: %s %s', verdict.anchor, verdict.name, verdict.status, verdict.detail)
        return verdict

    def table(self, name: str, columns: Sequence[str], rows: List[list]) -> Table:
        t = Table(name, list(columns), [list(r) for r in rows])
        self.tables.append(t)
        return t

    @property
    def outcome(self) -> str:
        statuses = {v.status for v in self.verdicts}
        if FAIL in statuses:
            return FAIL
        if INCONCLUSIVE in statuses:
            return INCONCLUSIVE
        return PASS

    @property
    def exit_code(self) -> int:
        return {PASS: EXIT_PASSED, FAIL: EXIT_FAILED, INCONCLUSIVE: EXIT_INCONCLUSIVE}[self.outcome]

    def provenance(self) -> dict:
        canonical = json.dumps(_plain(self.config), sort_keys=True, separators=(',', ':'))
        return {'config': _plain(self.config),
                'input_sha256': hashlib.sha256(canonical.encode('utf-8')).hexdigest()}

    def document(self) -> dict:
        return {
            'experiment': self.experiment,
            'outcome': self.outcome,
            'provenance': self.provenance(),
            'verdicts': [v.as_dict() for v in self.verdicts],
            'tables': {t.name: t.as_dict() for t in self.tables},
        }


def _plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ''
    return str(value)


def parse_cell(text: str) -> Any:
    if text == 'true':
        return True
    if text == 'false':
        return False
    if text == '':
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_csv(table: Table, path: str) -> None:
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_cell(v) for v in row])


def read_csv(path: str, name: str = '') -> Table:
    with open(path, 'r', newline='') as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[parse_cell(c) for c in row] for row in reader]
    return Table(name, columns, rows)


def emit_outputs(report: ExperimentReport, fmt: str, prefix: str) -> int:
    """
    Write ``<prefix>.json`` or ``<prefix>_<table>.csv`` plus
    ``<prefix>_verdicts.csv``; returns the process exit code.
    """
    try:
        directory = os.path.dirname(prefix)
        if directory:
            os.makedirs(directory, exist_ok=True)
        if fmt == 'json':
            with open(f'{prefix}.json', 'w') as fh:
                json.dump(report.document(), fh, sort_keys=True, indent=2)
                fh.write('\n')
        elif fmt == 'csv':
            for t in report.tables:
                write_csv(t, f'{prefix}_{t.name}.csv')
            verdicts = Table('verdicts', ['name', 'anchor', 'status', 'detail'],
                             [[v.name, v.anchor, v.status, v.detail] for v in report.verdicts])
            write_csv(verdicts, f'{prefix}_verdicts.csv')
        else:
            raise ValueError(f'unknown output format {fmt!r}')
    except OSError as e:
        _logger.error('Unable to write outputs to %s: %s', prefix, e)
        return EXIT_IO
    _logger.info('Wrote %s outputs to %s (%s)', fmt, prefix, report.outcome)
    return report.exit_code
