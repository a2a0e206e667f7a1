"""Velocity-space and position-space grids.

Velocity space is the 2-D product (0, U] x [0, 2pi): a speed magnitude and a
direction angle on the unit circle. Both variables use uniform midpoint
(cell-centered) grids, so every quadrature in the package is a plain weighted
sum with constant weights. Midpoint quadrature is positivity-preserving and
second order, which is what makes the discrete kernel normalizations exact
after a single renormalization pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class AngularGrid:
    """Midpoint grid on [0, 2pi) with uniform weight dtheta per node."""

    n: int
    nodes: np.ndarray = field(repr=False)
    dtheta: float

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, self.dtheta)

    @property
    def unit_vectors(self) -> np.ndarray:
        """Direction unit vectors, shape (n, 2)."""
        return np.stack([np.cos(self.nodes), np.sin(self.nodes)], axis=1)


@dataclass(frozen=True)
class SpeedGrid:
    """Midpoint grid on (0, u_max] with uniform weight dv per node."""

    n: int
    u_max: float
    nodes: np.ndarray = field(repr=False)
    dv: float


def build_grids(n_s: int, n_theta: int, u_max: float) -> tuple[SpeedGrid, AngularGrid]:
    """Build the speed and angular midpoint grids.

    Requires n_s >= 2, n_theta >= 4 and u_max > 0; node sets are strictly
    inside the open speed interval and [0, 2pi).
    """
    if not (isinstance(n_s, (int, np.integer)) and n_s >= 2):
        raise ConfigurationError(f"n_s must be an integer >= 2, got {n_s!r}")
    if not (isinstance(n_theta, (int, np.integer)) and n_theta >= 4):
        raise ConfigurationError(f"n_theta must be an integer >= 4, got {n_theta!r}")
    if not (np.isfinite(u_max) and u_max > 0):
        raise ConfigurationError(f"u_max must be positive and finite, got {u_max!r}")

    dv = u_max / n_s
    speed_nodes = (np.arange(n_s) + 0.5) * dv
    dtheta = TWO_PI / n_theta
    angle_nodes = (np.arange(n_theta) + 0.5) * dtheta
    return (
        SpeedGrid(n=int(n_s), u_max=float(u_max), nodes=speed_nodes, dv=dv),
        AngularGrid(n=int(n_theta), nodes=angle_nodes, dtheta=dtheta),
    )


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform cell-centered rectangle [x0, x1] x [y0, y1]."""

    nx: int
    ny: int
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise ConfigurationError("spatial grid needs nx, ny >= 2")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ConfigurationError("spatial extent must be nonempty")

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def dy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def x_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y_centers(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    def padded(self, factor: float) -> "SpatialGrid":
        """Grid with the same center and cell count, extent scaled by factor."""
        if factor < 1.0:
            raise ConfigurationError("padding factor must be >= 1")
        cx = 0.5 * (self.x0 + self.x1)
        cy = 0.5 * (self.y0 + self.y1)
        hx = 0.5 * (self.x1 - self.x0) * factor
        hy = 0.5 * (self.y1 - self.y0) * factor
        return SpatialGrid(self.nx, self.ny, cx - hx, cx + hx, cy - hy, cy + hy)
