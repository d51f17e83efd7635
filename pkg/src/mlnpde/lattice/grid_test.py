import math

import numpy as np
import pytest

from mlnpde.errors import GridMismatchError, ParameterError
from mlnpde.lattice.grid import Field, Geometry, build_grid, lt_norm


def test_box_grid_uses_cell_centres():
    grid = build_grid(Geometry.box([1.0]), 8)
    assert grid.n_interior == 8
    assert grid.cell_volume == pytest.approx(1.0 / 8)
    np.testing.assert_allclose(grid.points[:, 0], (np.arange(8) + 0.5) / 8)
    np.testing.assert_allclose(grid.axes()[0], grid.points[:, 0])


def test_box_faces_split_inner_and_edge():
    grid = build_grid(Geometry.box([1.0]), 8)
    faces = grid.faces[0]
    assert faces.inner_left.size == 7
    # both box walls, each half a cell away
    assert faces.edge_node.size == 2
    np.testing.assert_allclose(faces.edge_distance, 1.0 / 16)


def test_ball_mask_and_measure():
    geometry = Geometry.ball(1.0, 2)
    grid = build_grid(geometry, 40)
    assert geometry.measure == pytest.approx(math.pi)
    assert grid.measure == pytest.approx(math.pi, rel=0.05)
    assert np.all(np.linalg.norm(grid.points, axis=1) < 1.0)
    assert grid.scatter(np.ones(grid.n_interior)).shape == (40, 40)


def test_geometry_queries():
    square = Geometry.box([1.0, 1.0])
    centre = square.center[None, :]
    assert square.inradius == 0.5
    assert square.distance_to_boundary(centre)[0] == pytest.approx(0.5)
    assert square.exit_distance(centre, np.array([[1.0, 0.0]]))[0, 0] == pytest.approx(0.5)
    assert square.contains_ball([0.5, 0.5], 0.5)
    assert not square.contains_ball([0.5, 0.5], 0.51)
    disc = Geometry.ball(2.0, 2, center=[1.0, 1.0])
    assert disc.exit_distance(np.array([[1.0, 1.0]]), np.array([[0.0, 1.0]]))[0, 0] == pytest.approx(2.0)


@pytest.mark.parametrize('build', [
    lambda: Geometry.box([1.0, 0.0]),
    lambda: Geometry.box([1.0] * 4),
    lambda: Geometry('torus', (1.0,), (0.0,)),
    lambda: build_grid(Geometry.box([1.0]), 2),
    lambda: build_grid(Geometry.box([1.0, 1.0]), (8,)),
])
def test_rejects_bad_geometry(build):
    with pytest.raises(ParameterError):
        build()


def test_fields_are_read_only_and_grid_bound():
    grid = build_grid(Geometry.box([1.0]), 8)
    other = build_grid(Geometry.box([1.0]), 8)
    u = Field.from_function(grid, lambda x: x[:, 0])
    with pytest.raises(ValueError):
        u.values[0] = 1.0
    with pytest.raises(GridMismatchError):
        u + Field.zeros(other)
    with pytest.raises(ParameterError):
        Field(np.zeros(3), grid)
    v = 2.0 * u - u
    np.testing.assert_allclose(v.values, u.values)
    assert (-u).positive_part().sup_norm() == 0.0


def test_lt_norm_of_constant():
    grid = build_grid(Geometry.box([1.0, 1.0]), 10)
    one = Field(np.ones(grid.n_interior), grid)
    assert lt_norm(one, 3.0) == pytest.approx(1.0)
    assert lt_norm(one, 0.5) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        lt_norm(one, 0.0)
