"""
Masked uniform tensor grids over boxes and balls.

Nodes are cell centres of a uniform partition of the bounding box of Ω.  A
node is interior when it lies strictly inside Ω; fields store values at
interior nodes only and are zero everywhere else, including all of ℝ^N ∖ Ω.

Local differences are taken across cell faces.  A face between two interior
cells is an *inner* face.  A face between an interior cell and an exterior
cell inside the bounding box is an *edge* face at distance h; a face on the
bounding box itself is an edge face at distance h/2, since the boundary of
Ω passes through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from scipy.special import gamma

import mlnpde.customlogger as log
from mlnpde.errors import GridMismatchError, ParameterError

BOX = 'box'
BALL = 'ball'

_logger = log.get_logger('lattice')


@dataclass(frozen=True)
class Geometry:
    """Axis-aligned box ``origin + [0, size]`` or ball ``B(origin, size[0])``."""
    kind: str
    size: Tuple[float, ...]
    origin: Tuple[float, ...]

    def __post_init__(self):
        if self.kind not in (BOX, BALL):
            raise ParameterError(f'unknown geometry kind {self.kind!r}')
        if any(not v > 0 for v in self.size):
            raise ParameterError(f'degenerate geometry size {self.size}')
        if self.kind == BALL and len(self.size) != 1:
            raise ParameterError('ball geometry takes a single radius')
        if not 1 <= len(self.origin) <= 3:
            raise ParameterError(f'grid dimension must be 1, 2 or 3, got {len(self.origin)}')
        if self.kind == BOX and len(self.size) != len(self.origin):
            raise ParameterError('box sizes and origin differ in dimension')

    @classmethod
    def box(cls, sides: Sequence[float], origin: Sequence[float] = None) -> 'Geometry':
        sides = tuple(float(v) for v in sides)
        origin = tuple(float(v) for v in origin) if origin is not None else (0.0,) * len(sides)
        return cls(BOX, sides, origin)

    @classmethod
    def ball(cls, radius: float, dim: int, center: Sequence[float] = None) -> 'Geometry':
        center = tuple(float(v) for v in center) if center is not None else (0.0,) * dim
        return cls(BALL, (float(radius),), center)

    @property
    def dim(self) -> int:
        return len(self.origin)

    @property
    def lower(self) -> np.ndarray:
        if self.kind == BOX:
            return np.array(self.origin)
        return np.array(self.origin) - self.size[0]

    @property
    def upper(self) -> np.ndarray:
        if self.kind == BOX:
            return np.array(self.origin) + np.array(self.size)
        return np.array(self.origin) + self.size[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def diameter(self) -> float:
        if self.kind == BOX:
            return float(np.linalg.norm(self.size))
        return 2.0 * self.size[0]

    @property
    def measure(self) -> float:
        if self.kind == BOX:
            return float(np.prod(self.size))
        d = self.dim
        return float(math.pi ** (d / 2) * self.size[0] ** d / gamma(d / 2 + 1))

    @property
    def inradius(self) -> float:
        if self.kind == BOX:
            return 0.5 * min(self.size)
        return self.size[0]

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Strict interior test for an (m, d) array of points."""
        points = np.atleast_2d(points)
        if self.kind == BOX:
            return np.all((points > self.lower) & (points < self.upper), axis=1)
        rel = points - np.array(self.origin)
        return np.einsum('ij,ij->i', rel, rel) < self.size[0] ** 2

    def contains_ball(self, center: Sequence[float], radius: float) -> bool:
        center = np.asarray(center, dtype=float)
        if self.kind == BOX:
            return bool(np.all(center - radius >= self.lower) and np.all(center + radius <= self.upper))
        return float(np.linalg.norm(center - np.array(self.origin))) + radius <= self.size[0]

    def distance_to_boundary(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.kind == BOX:
            return np.minimum(points - self.lower, self.upper - points).min(axis=1)
        return self.size[0] - np.linalg.norm(points - np.array(self.origin), axis=1)

    def exit_distance(self, points: np.ndarray, directions: np.ndarray) -> np.ndarray:
        """
        Distance from each interior point along each unit direction to ∂Ω.

        Both geometries are convex, so the ray leaves Ω exactly once.
        Returns an array of shape (len(points), len(directions)).
        """
        points = np.atleast_2d(points)
        if self.kind == BALL:
            rel = points - np.array(self.origin)
            b = rel @ directions.T
            c = np.einsum('ij,ij->i', rel, rel)[:, None] - self.size[0] ** 2
            return -b + np.sqrt(b * b - c)
        with np.errstate(divide='ignore', invalid='ignore'):
            dist = np.full((points.shape[0], directions.shape[0]), np.inf)
            for k in range(self.dim):
                theta = directions[:, k]
                up = (self.upper[k] - points[:, k:k + 1]) / theta
                down = (self.lower[k] - points[:, k:k + 1]) / theta
                step = np.where(theta > 0, up, np.where(theta < 0, down, np.inf))
                dist = np.minimum(dist, step)
        return dist

    def as_dict(self) -> dict:
        return {'kind': self.kind, 'size': list(self.size), 'origin': list(self.origin)}


@dataclass(frozen=True, eq=False)
class FaceSet:
    """Cell faces normal to one axis, split into inner and edge faces."""
    axis: int
    spacing: float
    inner_left: np.ndarray
    inner_right: np.ndarray
    edge_node: np.ndarray
    edge_distance: np.ndarray


@dataclass(frozen=True, eq=False)
class Grid:
    geometry: Geometry
    shape: Tuple[int, ...]
    spacing: Tuple[float, ...]
    nodes: np.ndarray
    interior_mask: np.ndarray
    interior_index: np.ndarray
    faces: Tuple[FaceSet, ...] = field(repr=False)

    @property
    def dim_d(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def n_interior(self) -> int:
        return int(self.interior_index.size)

    @property
    def points(self) -> np.ndarray:
        """Coordinates of the interior nodes, shape (n_interior, d)."""
        return self.nodes[self.interior_index]

    @property
    def measure(self) -> float:
        return self.n_interior * self.cell_volume

    def axes(self) -> Tuple[np.ndarray, ...]:
        lower = self.geometry.lower
        return tuple(lower[k] + (np.arange(n) + 0.5) * self.spacing[k]
                     for k, n in enumerate(self.shape))

    def scatter(self, values: np.ndarray) -> np.ndarray:
        """Interior values placed on the full bounding-box array, zero elsewhere."""
        full = np.zeros(self.nodes.shape[0])
        full[self.interior_index] = values
        return full.reshape(self.shape)


def build_grid(geometry: Geometry, resolution: Union[int, Sequence[int]]) -> Grid:
    """
    Cell-centred grid with ``resolution`` cells per axis over the bounding
    box of ``geometry``.
    """
    d = geometry.dim
    shape = (int(resolution),) * d if np.isscalar(resolution) else tuple(int(n) for n in resolution)
    if len(shape) != d:
        raise ParameterError(f'resolution has {len(shape)} axes for a {d}-d geometry')
    if min(shape) < 3:
        raise ParameterError(f'resolution must be at least 3 per axis, got {shape}')

    lower, upper = geometry.lower, geometry.upper
    spacing = tuple(float((upper[k] - lower[k]) / shape[k]) for k in range(d))
    axes = [lower[k] + (np.arange(shape[k]) + 0.5) * spacing[k] for k in range(d)]
    mesh = np.meshgrid(*axes, indexing='ij')
    nodes = np.stack([m.ravel() for m in mesh], axis=1)
    mask = geometry.contains(nodes)
    interior_index = np.flatnonzero(mask)
    if interior_index.size == 0:
        raise ParameterError('grid has no interior nodes')

    lookup = np.full(nodes.shape[0], -1, dtype=np.int64)
    lookup[interior_index] = np.arange(interior_index.size)
    lookup = lookup.reshape(shape)
    faces = tuple(_faces_along(lookup, k, spacing[k]) for k in range(d))

    _logger.debug('Built %s grid %s with %d interior nodes',
                  geometry.kind, shape, interior_index.size)
    return Grid(geometry, shape, spacing, nodes, mask, interior_index, faces)


def _faces_along(lookup: np.ndarray, axis: int, h: float) -> FaceSet:
    moved = np.moveaxis(lookup, axis, 0)
    left, right = moved[:-1].ravel(), moved[1:].ravel()
    inner = (left >= 0) & (right >= 0)
    masked_left = (left >= 0) & (right < 0)
    masked_right = (left < 0) & (right >= 0)
    first, last = moved[0].ravel(), moved[-1].ravel()
    edge_node = np.concatenate([
        left[masked_left], right[masked_right], first[first >= 0], last[last >= 0]])
    edge_distance = np.concatenate([
        np.full(int(masked_left.sum() + masked_right.sum()), h),
        np.full(int((first >= 0).sum() + (last >= 0).sum()), 0.5 * h)])
    return FaceSet(axis, h, left[inner], right[inner], edge_node, edge_distance)


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values on the interior of a grid, zero-extended outside Ω."""
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_interior,):
            raise ParameterError(
                f'field has shape {values.shape}, grid has {self.grid.n_interior} interior nodes')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, grid: Grid) -> 'Field':
        return cls(np.zeros(grid.n_interior), grid)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> 'Field':
        """Evaluate ``fn`` on the (n, d) array of interior coordinates."""
        return cls(np.asarray(fn(grid.points), dtype=float).reshape(-1), grid)

    def with_values(self, values: np.ndarray) -> 'Field':
        return Field(values, self.grid)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def positive_part(self) -> 'Field':
        return self.with_values(np.maximum(self.values, 0.0))

    def same_grid(self, other: 'Field') -> 'Field':
        if other.grid is not self.grid:
            raise GridMismatchError('fields live on different grids')
        return other

    def __add__(self, other: 'Field') -> 'Field':
        return self.with_values(self.values + self.same_grid(other).values)

    def __sub__(self, other: 'Field') -> 'Field':
        return self.with_values(self.values - self.same_grid(other).values)

    def __mul__(self, factor: float) -> 'Field':
        return self.with_values(float(factor) * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> 'Field':
        return self.with_values(-self.values)


def lt_norm(u: Field, t: float) -> float:
    """
    Discrete L^t norm (Σ |u_i|^t vol)^{1/t}.

    Exponents in (0, 1) give the quasi-norm used for weak Harnack means.
    """
    if not t > 0:
        raise ParameterError(f'L^t exponent must be positive, got {t}')
    if t < 1:
        _logger.debug('lt_norm evaluated as quasi-norm with t=%g', t)
    total = float(np.sum(np.abs(u.values) ** t)) * u.grid.cell_volume
    return total ** (1.0 / t)
