from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualjump import ConfigurationError, SpatialGrid, build_grids

TWO_PI = 2.0 * np.pi


def test_angular_nodes_n4():
    _, angle = build_grids(4, 4, 1.0)
    np.testing.assert_allclose(
        angle.nodes, [np.pi / 4, 3 * np.pi / 4, 5 * np.pi / 4, 7 * np.pi / 4]
    )
    np.testing.assert_allclose(angle.weights, np.pi / 2)


def test_speed_nodes_n4_u4():
    speed, _ = build_grids(4, 4, 4.0)
    np.testing.assert_allclose(speed.nodes, [0.5, 1.5, 2.5, 3.5])
    assert speed.dv == 1.0


@given(
    n_s=st.integers(min_value=2, max_value=300),
    n_theta=st.integers(min_value=4, max_value=300),
    u_max=st.floats(min_value=1e-3, max_value=1e3, allow_nan=False),
)
@settings(max_examples=60, deadline=None)
def test_weight_sums_and_node_ranges(n_s, n_theta, u_max):
    speed, angle = build_grids(n_s, n_theta, u_max)
    assert abs(angle.weights.sum() - TWO_PI) <= 1e-14 * TWO_PI
    assert abs(speed.n * speed.dv - u_max) <= 1e-12 * u_max
    assert np.all(np.diff(angle.nodes) > 0)
    assert angle.nodes[0] >= 0 and angle.nodes[-1] < TWO_PI
    assert np.all(speed.nodes > 0) and np.all(speed.nodes < u_max)


@pytest.mark.parametrize(
    "n_s,n_theta,u_max",
    [(1, 8, 1.0), (8, 3, 1.0), (8, 8, 0.0), (8, 8, -1.0), (0, 8, 1.0)],
)
def test_invalid_grid_config(n_s, n_theta, u_max):
    with pytest.raises(ConfigurationError):
        build_grids(n_s, n_theta, u_max)


def test_spatial_grid_basics():
    g = SpatialGrid(10, 20, 0.0, 2.5, 0.0, 2.5)
    assert g.dx == 0.25
    assert g.dy == 0.125
    assert g.x_centers[0] == pytest.approx(0.125)
    p = g.padded(2.0)
    assert p.x0 == pytest.approx(-1.25)
    assert p.x1 == pytest.approx(3.75)
    assert p.nx == g.nx


def test_spatial_grid_invalid():
    with pytest.raises(ConfigurationError):
        SpatialGrid(1, 10, 0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ConfigurationError):
        SpatialGrid(10, 10, 1.0, 0.0, 0.0, 1.0)
