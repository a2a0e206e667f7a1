"""Kinetic solver on a 2-D spatial grid times the velocity grid.

Strang splitting: half transport, full collision, half transport. Transport
is dimension-by-dimension finite-volume advection (first-order upwind by
default, optional minmod-limited second order for convergence studies) with
zero-inflow ghost cells and an outflow ledger; the collision substep is the
homogeneous RK4 update of the chosen collision model, subdivided whenever a
stiff scaling makes the effective rates large.

The phase-space array is laid out as f[ix, iy, i_speed, j_angle] (velocity
fastest), so collision updates are cache-contiguous per spatial cell and
transport broadcasts one velocity node across space.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _fastpath
from .errors import ConfigurationError, StabilityError
from .grids import SpatialGrid
from .kernels import KernelSet

#: runtime switch for the numba kernels (numpy reference path otherwise);
#: also disabled via the DUALJUMP_NO_NUMBA environment variable
USE_FASTPATH = _fastpath.HAVE_NUMBA and not os.environ.get("DUALJUMP_NO_NUMBA")

VARIANTS = ("bgk", "two_jump")
SCALINGS = ("none", "same_order", "fast_direction", "fast_speed")
MAX_COLLISION_STEP_FRACTION = 0.1
NEGATIVITY_TOLERANCE = 1e-14


@dataclass(frozen=True)
class CollisionMode:
    """Collision model variant plus the frequency scaling regime.

    * "bgk": single-operator relaxation toward the combined kernel (the
      classical model; its single rate is the kernel set's speed rate).
    * "two_jump": the two-operator model with distinct speed/direction gains.

    Scalings divide the rates by powers of epsilon: "same_order" scales both
    by 1/eps; "fast_direction" additionally speeds the direction clock to
    1/eps^2; "fast_speed" is the reverse. The BGK variant only supports
    "none" and "same_order" (it has a single clock).
    """

    variant: str
    scaling: str = "none"
    epsilon: float = 1.0

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"variant must be one of {VARIANTS}")
        if self.scaling not in SCALINGS:
            raise ConfigurationError(f"scaling must be one of {SCALINGS}")
        if self.scaling != "none" and not (0 < self.epsilon <= 1):
            raise ConfigurationError("epsilon must lie in (0, 1] for a scaled run")
        if self.variant == "bgk" and self.scaling in ("fast_direction", "fast_speed"):
            raise ConfigurationError(
                "the single-operator model has one clock; fast_direction / "
                "fast_speed scalings apply to the two-operator model only"
            )

    def effective_rates(self, kernels: KernelSet) -> tuple[float, float]:
        eps = self.epsilon
        if self.scaling == "none":
            return kernels.speed_rate, kernels.direction_rate
        if self.scaling == "same_order":
            return kernels.speed_rate / eps, kernels.direction_rate / eps
        if self.scaling == "fast_direction":
            return kernels.speed_rate / eps, kernels.direction_rate / eps**2
        return kernels.speed_rate / eps**2, kernels.direction_rate / eps

    def total_rate(self, kernels: KernelSet) -> float:
        if self.variant == "bgk":
            rate, _ = self.effective_rates(kernels)
            return rate
        return sum(self.effective_rates(kernels))

    def equilibrium(self, kernels: KernelSet) -> np.ndarray:
        return kernels.combined_kernel if self.variant == "bgk" else kernels.equilibrium


@dataclass
class KineticField:
    """Phase-space density with its grids and conservation ledger."""

    grid: SpatialGrid
    kernels: KernelSet
    f: np.ndarray = field(repr=False)  # (nx, ny, n_s, n_theta)
    time: float = 0.0
    outflow: float = 0.0       # cumulative mass through the boundary
    clipped_mass: float = 0.0  # mass added by clipping sub-tolerance negatives

    @classmethod
    def from_density(
        cls,
        grid: SpatialGrid,
        kernels: KernelSet,
        rho0: np.ndarray,
        mode: CollisionMode,
        velocity_init: str = "equilibrium",
    ) -> "KineticField":
        rho0 = np.asarray(rho0, dtype=float)
        if rho0.shape != (grid.nx, grid.ny):
            raise ConfigurationError(f"rho0 must have shape {(grid.nx, grid.ny)}")
        if velocity_init == "equilibrium":
            profile = mode.equilibrium(kernels)
        elif velocity_init == "uniform":
            profile = np.full_like(
                kernels.equilibrium, 1.0 / (kernels.speed.u_max * 2.0 * np.pi)
            )
        else:
            raise ConfigurationError("velocity_init must be 'equilibrium' or 'uniform'")
        f = rho0[:, :, None, None] * profile[None, None, :, :]
        return cls(grid=grid, kernels=kernels, f=f)

    @property
    def phase_cell_measure(self) -> float:
        return self.grid.cell_area * self.kernels.cell_measure

    def mass(self) -> float:
        return float(self.f.sum() * self.phase_cell_measure)

    def rho(self) -> np.ndarray:
        return self.f.sum(axis=(2, 3)) * self.kernels.cell_measure


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------

def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def _sweep(
    f: np.ndarray,
    vel: np.ndarray,
    dt_over_d: float,
    axis: int,
    boundary: str,
    limiter: str,
) -> tuple[np.ndarray, float]:
    """One conservative advection sweep along a spatial axis.

    vel broadcasts over space with shape (1, 1, n_s, n_theta). Returns the
    updated array and the outflow (in units of f * cells; the caller scales
    by dt and the transverse measures). Zero-inflow boundaries pad with
    zeros; periodic wraps and never loses mass.
    """
    work = np.moveaxis(f, axis, 0)  # view: (N, ..., n_s, n_theta)
    if boundary == "periodic":
        pad_lo, pad_hi = work[-1:], work[:1]
    else:
        zeros = np.zeros_like(work[:1])
        pad_lo = pad_hi = zeros
    ext = np.concatenate([pad_lo, work, pad_hi], axis=0)  # (N+2, ...)

    if limiter == "minmod":
        dlo = ext[1:-1] - ext[:-2]
        dhi = ext[2:] - ext[1:-1]
        slope = np.zeros_like(ext)
        slope[1:-1] = _minmod(dlo, dhi)
        if boundary == "periodic":
            slope[0] = slope[-2]
            slope[-1] = slope[1]
        left_state = ext[:-1] + 0.5 * slope[:-1]   # upwind state for v > 0
        right_state = ext[1:] - 0.5 * slope[1:]    # upwind state for v < 0
    else:
        left_state = ext[:-1]
        right_state = ext[1:]

    v_plus = np.maximum(vel, 0.0)
    v_minus = np.minimum(vel, 0.0)
    flux = v_plus * left_state + v_minus * right_state  # (N+1, ...) faces

    out = work - dt_over_d * (flux[1:] - flux[:-1])

    if boundary == "periodic":
        outflow = 0.0
    else:
        outflow = float(-flux[0].sum() + flux[-1].sum())
    np.copyto(work, out)
    return f, outflow


def transport_half_step(field: KineticField, dt: float, boundary: str, limiter: str,
                        order: tuple[int, int] = (0, 1)) -> None:
    ks = field.kernels
    ang = ks.angle.nodes
    vx = ks.speed.nodes[:, None] * np.cos(ang)[None, :]
    vy = ks.speed.nodes[:, None] * np.sin(ang)[None, :]
    g = field.grid
    fast = USE_FASTPATH and limiter == "upwind" and boundary == "zero_inflow"
    for axis in order:
        vel, d, transverse = (vx, g.dx, g.dy) if axis == 0 else (vy, g.dy, g.dx)
        if fast:
            sweep = _fastpath.sweep_axis0 if axis == 0 else _fastpath.sweep_axis1
            per_node = sweep(field.f, vel, dt / d)
            out = float(per_node.sum())
        else:
            _, out = _sweep(field.f, vel[None, None, :, :], dt / d, axis, boundary, limiter)
        field.outflow += out * dt * transverse * ks.cell_measure


# ---------------------------------------------------------------------------
# collision
# ---------------------------------------------------------------------------

def _collision_rhs_two_jump(
    f: np.ndarray, kernels: KernelSet, speed_rate: float, dir_rate: float
) -> np.ndarray:
    speed_marg = f.sum(axis=3) * kernels.dtheta            # (nx, ny, n_s)
    dir_marg = f.sum(axis=2) * kernels.dv                  # (nx, ny, n_theta)
    out = dir_rate * speed_marg[..., None] * kernels.direction_kernel
    out += speed_rate * kernels.speed_kernel[None, None] * dir_marg[..., None, :]
    out -= (speed_rate + dir_rate) * f
    return out


def _collision_rhs_bgk(
    f: np.ndarray, kernels: KernelSet, rate: float, target: np.ndarray
) -> np.ndarray:
    rho = f.sum(axis=(2, 3)) * kernels.cell_measure
    return rate * (rho[:, :, None, None] * target[None, None] - f)


def collision_step(field: KineticField, mode: CollisionMode, dt: float) -> None:
    """RK4 integration of the collision model over dt, with substeps bounded
    by MAX_COLLISION_STEP_FRACTION / (effective total rate)."""
    ks = field.kernels
    total = mode.total_rate(ks)
    n_sub = max(1, int(np.ceil(dt * total / MAX_COLLISION_STEP_FRACTION)))
    h = dt / n_sub

    if mode.variant == "bgk":
        rate, _ = mode.effective_rates(ks)
        target = ks.combined_kernel
        if USE_FASTPATH:
            _fastpath.collision_rk4_bgk(field.f, target, ks.dv, ks.dtheta, rate, h, n_sub)
            return

        def rhs(f: np.ndarray) -> np.ndarray:
            return _collision_rhs_bgk(f, ks, rate, target)
    else:
        speed_rate, dir_rate = mode.effective_rates(ks)
        if USE_FASTPATH:
            _fastpath.collision_rk4_two_jump(
                field.f, ks.speed_kernel, ks.direction_kernel,
                ks.dv, ks.dtheta, speed_rate, dir_rate, h, n_sub,
            )
            return

        def rhs(f: np.ndarray) -> np.ndarray:
            return _collision_rhs_two_jump(f, ks, speed_rate, dir_rate)

    f = field.f
    for _ in range(n_sub):
        k1 = rhs(f)
        k2 = rhs(f + 0.5 * h * k1)
        k3 = rhs(f + 0.5 * h * k2)
        k4 = rhs(f + h * k3)
        f += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# full step and driver
# ---------------------------------------------------------------------------

def cfl_time_step(grid: SpatialGrid, kernels: KernelSet, cfl: float) -> float:
    return cfl * min(grid.dx, grid.dy) / kernels.speed.u_max


def step_kinetic(
    field: KineticField,
    mode: CollisionMode,
    dt: float,
    boundary: str = "zero_inflow",
    limiter: str = "upwind",
    cfl: float = 0.9,
) -> KineticField:
    """One Strang step: half transport, collision, half transport.

    The sweep order alternates (x,y / y,x) between the two halves so the
    full step treats the dimensions symmetrically.
    """
    if boundary not in ("zero_inflow", "periodic"):
        raise ConfigurationError("boundary must be 'zero_inflow' or 'periodic'")
    if limiter not in ("upwind", "minmod"):
        raise ConfigurationError("limiter must be 'upwind' or 'minmod'")
    if dt > cfl_time_step(field.grid, field.kernels, cfl) * (1 + 1e-12):
        raise StabilityError(
            f"dt={dt:g} violates the CFL bound "
            f"{cfl_time_step(field.grid, field.kernels, cfl):g}"
        )
    transport_half_step(field, 0.5 * dt, boundary, limiter, order=(0, 1))
    collision_step(field, mode, dt)
    transport_half_step(field, 0.5 * dt, boundary, limiter, order=(1, 0))
    field.time += dt

    # positivity ledger: tolerate roundoff-scale negatives, clip and record
    # anything below tolerance so the mass ledger stays honest
    fmin = float(field.f.min())
    if fmin < 0.0:
        floor = -NEGATIVITY_TOLERANCE * float(field.f.max())
        if fmin < floor:
            neg = np.minimum(field.f - floor, 0.0)
            field.clipped_mass += float(-neg.sum() * field.phase_cell_measure)
            np.maximum(field.f, floor, out=field.f)
    return field


@dataclass
class KineticResult:
    grid: SpatialGrid
    mode: CollisionMode
    snapshot_times: np.ndarray
    rho_snapshots: list[np.ndarray]
    step_times: np.ndarray
    mass_series: np.ndarray
    outflow_series: np.ndarray
    final: KineticField

    def mass_ledger_drift(self) -> float:
        """Max relative drift of interior mass + cumulative outflow."""
        total = self.mass_series + self.outflow_series
        return float(np.abs(total - total[0]).max() / abs(total[0]))


def run_kinetic(
    kernels: KernelSet,
    mode: CollisionMode,
    grid: SpatialGrid,
    rho0: np.ndarray,
    t_end: float,
    snapshot_times: list[float] | None = None,
    velocity_init: str = "equilibrium",
    boundary: str = "zero_inflow",
    limiter: str = "upwind",
    cfl: float = 0.9,
) -> KineticResult:
    """Integrate to t_end, recording density snapshots and the mass ledger."""
    snaps = sorted(snapshot_times) if snapshot_times else [t_end]
    if any(t > t_end + 1e-12 for t in snaps):
        raise ConfigurationError("snapshot times must not exceed t_end")
    field = KineticField.from_density(grid, kernels, rho0, mode, velocity_init)

    dt_base = cfl_time_step(grid, kernels, cfl)
    times = [0.0]
    masses = [field.mass()]
    outflows = [0.0]
    rho_snaps: list[np.ndarray] = []
    snap_times: list[float] = []

    pending = list(snaps)
    t = 0.0
    while t < t_end - 1e-12:
        dt = min(dt_base, t_end - t)
        if pending and t + dt > pending[0] - 1e-12:
            dt = pending[0] - t
        if dt > 1e-14:
            step_kinetic(field, mode, dt, boundary, limiter, cfl)
        t = field.time
        times.append(t)
        masses.append(field.mass())
        outflows.append(field.outflow)
        if pending and t >= pending[0] - 1e-9:
            rho_snaps.append(field.rho())
            snap_times.append(pending.pop(0))

    return KineticResult(
        grid=grid,
        mode=mode,
        snapshot_times=np.asarray(snap_times),
        rho_snapshots=rho_snaps,
        step_times=np.asarray(times),
        mass_series=np.asarray(masses),
        outflow_series=np.asarray(outflows),
        final=field,
    )
