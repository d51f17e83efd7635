"""
Experiment configuration.

A run is described by one JSON document::

    {"experiment": "branch",
     "model": {"N": 2, "p": 1.5, "q": 1.2, "s": 0.5, "eps": 0.5, "lambda": 0.1},
     "geometry": {"kind": "box", "size": [1, 1]},
     "resolution": 24, "seed": 0, "output": "results/branch", "format": "json",
     "solver": {"tol": 1e-8},
     "params": {"lambdas": [0.05, 0.1]}}

Process-wide settings (logging level, kernel budget, worker count,
telemetry endpoint) come from the environment instead.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

from mlnpde.errors import ConfigError, ParameterError
from mlnpde.lattice.grid import BALL, BOX, Geometry
from mlnpde.lattice.params import ModelParams

EXPERIMENTS = (
    'thresholds', 'solve', 'branch', 'two_solution', 'nonexistence', 'scaling',
    'beta_seq', 'harnack', 'bubbles', 'energy_estimate',
)
FORMATS = ('csv', 'json')

REQUIRED_PARAMS = {
    'branch': ('lambdas',),
    'nonexistence': ('lambdas',),
    'beta_seq': ('k_max',),
    'harnack': ('eps_list',),
    'bubbles': ('resolutions',),
}

_MODEL_KEYS = {'N', 'p', 'q', 's', 'eps', 'lambda', 'r'}
_TOP_KEYS = {'experiment', 'model', 'geometry', 'resolution', 'seed', 'output', 'format',
             'solver', 'params'}


@dataclass(frozen=True)
class GeometrySpec:
    kind: str
    size: Tuple[float, ...]
    origin: Optional[Tuple[float, ...]] = None
    dim: Optional[int] = None

    def build(self) -> Geometry:
        if self.kind == BOX:
            return Geometry.box(self.size, self.origin)
        dim = self.dim if self.dim is not None else (len(self.origin) if self.origin else None)
        if dim is None:
            raise ConfigError('ball geometry needs "dim" or an "origin"')
        return Geometry.ball(self.size[0], dim, self.origin)

    def as_dict(self) -> dict:
        return {'kind': self.kind, 'size': list(self.size),
                'origin': None if self.origin is None else list(self.origin), 'dim': self.dim}


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-8
    max_iter: int = 2000
    inner_tol: float = 1e-11
    max_outer: int = 500
    path_nodes: int = 16
    slack: float = 1e-10
    cap_factor: float = 1e3

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: ModelParams
    geometry: GeometrySpec
    resolution: Union[int, Tuple[int, ...]]
    seed: int = 0
    output: str = 'results/run'
    fmt: str = 'json'
    solver: SolverSettings = field(default_factory=SolverSettings)
    params: Dict[str, Any] = field(default_factory=dict)

    def param(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    def with_overrides(self, seed: Optional[int] = None, output: Optional[str] = None,
                       fmt: Optional[str] = None) -> 'ExperimentConfig':
        changes = {}
        if seed is not None:
            changes['seed'] = int(seed)
        if output is not None:
            changes['output'] = output
        if fmt is not None:
            if fmt not in FORMATS:
                raise ConfigError(f'unknown output format {fmt!r}')
            changes['fmt'] = fmt
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            'experiment': self.experiment,
            'model': self.model.as_dict(),
            'geometry': self.geometry.as_dict(),
            'resolution': self.resolution if isinstance(self.resolution, int) else list(self.resolution),
            'seed': self.seed,
            'output': self.output,
            'format': self.fmt,
            'solver': self.solver.as_dict(),
            'params': self.params,
        }


def _tuple(value, name) -> Tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),)
    try:
        return tuple(float(v) for v in value)
    except TypeError:
        raise ConfigError(f'{name} must be a number or a list of numbers')


def _model(raw: dict) -> ModelParams:
    if not isinstance(raw, dict):
        raise ConfigError('"model" must be an object')
    unknown = set(raw) - _MODEL_KEYS
    if unknown:
        raise ConfigError(f'unknown model keys {sorted(unknown)}')
    missing = {'N', 'p', 'q', 's', 'eps'} - set(raw)
    if missing:
        raise ConfigError(f'model is missing {sorted(missing)}')
    try:
        return ModelParams(int(raw['N']), float(raw['p']), float(raw['q']), float(raw['s']),
                           float(raw['eps']), float(raw.get('lambda', 0.0)),
                           None if raw.get('r') is None else float(raw['r']))
    except ParameterError as e:
        raise ConfigError(f'invalid model: {e}') from e


def _geometry(raw: dict, dim_N: int) -> GeometrySpec:
    if not isinstance(raw, dict) or 'kind' not in raw or 'size' not in raw:
        raise ConfigError('"geometry" needs "kind" and "size"')
    kind = raw['kind']
    if kind not in (BOX, BALL):
        raise ConfigError(f'unknown geometry kind {kind!r}')
    size = _tuple(raw['size'], 'geometry.size')
    origin = None if raw.get('origin') is None else _tuple(raw['origin'], 'geometry.origin')
    dim = raw.get('dim')
    if kind == BOX and len(size) == 1:
        d = int(dim) if dim is not None else (len(origin) if origin else min(dim_N, 3))
        size = size * d
    if kind == BALL and dim is None and origin is None:
        dim = min(dim_N, 3)
    spec = GeometrySpec(kind, size, origin, None if dim is None else int(dim))
    try:
        spec.build()
    except ParameterError as e:
        raise ConfigError(f'invalid geometry: {e}') from e
    return spec


def _solver(raw: Optional[dict]) -> SolverSettings:
    raw = raw or {}
    names = {f.name for f in dataclasses.fields(SolverSettings)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f'unknown solver keys {sorted(unknown)}')
    defaults = SolverSettings()
    values = {k: type(getattr(defaults, k))(v) for k, v in raw.items()}
    settings = SolverSettings(**values)
    if min(settings.tol, settings.inner_tol, settings.slack) <= 0:
        raise ConfigError('solver tolerances must be positive')
    if settings.path_nodes < 16:
        raise ConfigError('solver.path_nodes must be at least 16')
    return settings


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError('configuration must be a JSON object')
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f'unknown configuration keys {sorted(unknown)}')
    experiment = raw.get('experiment')
    if experiment not in EXPERIMENTS:
        raise ConfigError(f'unknown experiment {experiment!r}; expected one of {EXPERIMENTS}')
    for key in ('model', 'geometry', 'resolution'):
        if key not in raw:
            raise ConfigError(f'configuration is missing "{key}"')
    model = _model(raw['model'])
    geometry = _geometry(raw['geometry'], model.dim_N)
    resolution = raw['resolution']
    if isinstance(resolution, (int, float)):
        resolution = int(resolution)
    else:
        resolution = tuple(int(n) for n in resolution)
    fmt = raw.get('format', 'json')
    if fmt not in FORMATS:
        raise ConfigError(f'unknown output format {fmt!r}')
    params = raw.get('params') or {}
    if not isinstance(params, dict):
        raise ConfigError('"params" must be an object')
    missing = [k for k in REQUIRED_PARAMS.get(experiment, ()) if k not in params]
    if missing:
        raise ConfigError(f'experiment {experiment!r} needs params {missing}')
    return ExperimentConfig(
        experiment=experiment,
        model=model,
        geometry=geometry,
        resolution=resolution,
        seed=int(raw.get('seed', 0)),
        output=str(raw.get('output', 'results/run')),
        fmt=fmt,
        solver=_solver(raw.get('solver')),
        params=params,
    )


def load_config(path: str, experiment: Optional[str] = None) -> ExperimentConfig:
    """
    Read and validate a JSON config; OSError propagates for unreadable files.
    ``experiment`` fills in a missing "experiment" key and must match a present one.
    """
    with open(path, 'r') as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f'{path}: not valid JSON ({e})') from e
    if experiment is not None and isinstance(raw, dict):
        declared = raw.setdefault('experiment', experiment)
        if declared != experiment:
            raise ConfigError(f"config describes {declared!r}, command asked for {experiment!r}")
    return parse_config(raw)
