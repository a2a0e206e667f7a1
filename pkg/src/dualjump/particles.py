"""Monte Carlo simulation of the microscopic jump processes.

Two schemes over the same discretized kernels:

* a discrete-time scheme: free drift over a fixed step, then two independent
  Bernoulli clocks decide whether the speed and/or the direction resample;
* an event-driven scheme: each particle carries two independent exponential
  clocks; it drifts ballistically between firings and resamples the variable
  whose clock fired.

Sampling draws from the *discretized* kernels (per-column CDF inversion), so
the Monte Carlo and the deterministic solvers share one model and
cross-validate up to sampling noise only.

Particles are organized in fixed-size chunks; each chunk owns a
deterministically seeded generator (seed = master_seed XOR chunk index) and
the chunks are advanced and reduced in index order, so a run is bit-identical
for a given seed regardless of how chunks are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .grids import SpatialGrid
from .kernels import KernelSet

CHUNK_SIZE = 1 << 16


def _chunk_rngs(master_seed: int, n: int) -> list[np.random.Generator]:
    n_chunks = (n + CHUNK_SIZE - 1) // CHUNK_SIZE
    return [
        np.random.default_rng(np.uint64(master_seed) ^ np.uint64(idx))
        for idx in range(n_chunks)
    ]


def _chunk_slices(n: int) -> list[slice]:
    return [slice(s, min(s + CHUNK_SIZE, n)) for s in range(0, n, CHUNK_SIZE)]


def _sample_direction(kernels: KernelSet, rng: np.random.Generator, size: int) -> np.ndarray:
    """Indices into the angle grid, drawn from the direction kernel."""
    cdf = np.cumsum(kernels.direction_kernel) * kernels.dtheta
    cdf /= cdf[-1]
    return np.searchsorted(cdf, rng.random(size), side="right").astype(np.int64)


def _sample_speed_given_direction(
    kernels: KernelSet, rng: np.random.Generator, angle_idx: np.ndarray
) -> np.ndarray:
    """Speed indices drawn from the speed kernel column of each particle's angle.

    One uniform draw per particle in input order (deterministic), inverted
    against the per-column CDFs grouped by angle index.
    """
    cdf = np.cumsum(kernels.speed_kernel, axis=0) * kernels.dv
    cdf /= cdf[-1:, :]
    u = rng.random(angle_idx.size)
    out = np.empty(angle_idx.size, dtype=np.int64)
    for j in np.unique(angle_idx):
        sel = angle_idx == j
        out[sel] = np.searchsorted(cdf[:, j], u[sel], side="right")
    return out


@dataclass
class ParticleEnsemble:
    """Positions, velocity grid indices and per-particle jump counters."""

    kernels: KernelSet
    x: np.ndarray                      # (n, 2)
    speed_idx: np.ndarray              # (n,) int64 into the speed grid
    angle_idx: np.ndarray              # (n,) int64 into the angle grid
    n_speed_jumps: np.ndarray          # (n,) int64
    n_dir_jumps: np.ndarray            # (n,) int64
    master_seed: int
    rngs: list[np.random.Generator] = field(repr=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def speed(self) -> np.ndarray:
        return self.kernels.speed.nodes[self.speed_idx]

    @property
    def angle(self) -> np.ndarray:
        return self.kernels.angle.nodes[self.angle_idx]

    @property
    def velocity(self) -> np.ndarray:
        ang = self.angle
        return self.speed[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=1)

    @classmethod
    def from_density(
        cls,
        kernels: KernelSet,
        n: int,
        seed: int,
        f0: np.ndarray | None = None,
        x0: np.ndarray | tuple[float, float] = (0.0, 0.0),
    ) -> "ParticleEnsemble":
        """Sample n particles from a velocity density (default: equilibrium).

        All particles start at x0; velocity pairs are drawn from the joint
        discrete density by inversion on its flattened CDF, chunk by chunk.
        """
        if n <= 0:
            raise ConfigurationError("particle count must be positive")
        if f0 is None:
            f0 = kernels.equilibrium
        f0 = np.asarray(f0, dtype=float)
        if f0.shape != kernels.equilibrium.shape or np.any(f0 < 0) or f0.sum() <= 0:
            raise ConfigurationError("f0 must be a nonnegative density on the velocity grid")
        p = (f0 / f0.sum()).ravel()
        cdf = np.cumsum(p)
        cdf /= cdf[-1]

        rngs = _chunk_rngs(seed, n)
        flat = np.empty(n, dtype=np.int64)
        for sl, rng in zip(_chunk_slices(n), rngs):
            flat[sl] = np.searchsorted(cdf, rng.random(sl.stop - sl.start), side="right")
        speed_idx, angle_idx = np.divmod(flat, kernels.angle.n)
        x = np.tile(np.asarray(x0, dtype=float), (n, 1))
        return cls(
            kernels=kernels,
            x=x,
            speed_idx=speed_idx,
            angle_idx=angle_idx,
            n_speed_jumps=np.zeros(n, dtype=np.int64),
            n_dir_jumps=np.zeros(n, dtype=np.int64),
            master_seed=int(seed),
            rngs=rngs,
        )


@dataclass(frozen=True)
class JumpStatistics:
    zero_jump_fraction: float
    mean_speed_jumps: float
    mean_dir_jumps: float

    @classmethod
    def of(cls, ens: ParticleEnsemble) -> "JumpStatistics":
        both_zero = (ens.n_speed_jumps == 0) & (ens.n_dir_jumps == 0)
        return cls(
            zero_jump_fraction=float(both_zero.mean()),
            mean_speed_jumps=float(ens.n_speed_jumps.mean()),
            mean_dir_jumps=float(ens.n_dir_jumps.mean()),
        )


# ---------------------------------------------------------------------------
# discrete-time scheme
# ---------------------------------------------------------------------------

def step_discrete(ens: ParticleEnsemble, dt: float) -> ParticleEnsemble:
    """One step of the discrete-time scheme, in place.

    Drift uses the pre-step velocity; then, independently per particle, the
    speed resamples with probability (speed rate * dt) from the kernel column
    of the *current* direction, and the direction resamples with probability
    (direction rate * dt). Both Bernoulli probabilities must be valid, which
    bounds the step by the inverse rates.
    """
    ks = ens.kernels
    # a zero rate is a frozen clock (Bernoulli(0)) and puts no bound on dt
    bounds = [1.0 / r for r in (ks.speed_rate, ks.direction_rate) if r > 0]
    if bounds and dt > min(bounds):
        raise ConfigurationError(
            "dt exceeds min(1/speed_rate, 1/direction_rate); the Bernoulli "
            "jump probabilities would leave [0, 1]"
        )
    ens.x += dt * ens.velocity
    for sl, rng in zip(_chunk_slices(ens.n), ens.rngs):
        m = sl.stop - sl.start
        # fixed draw order per chunk: speed clock, direction clock, then the
        # resampling uniforms for whoever jumped
        jump_speed = rng.random(m) < ks.speed_rate * dt
        jump_dir = rng.random(m) < ks.direction_rate * dt
        if jump_speed.any():
            cur_angles = ens.angle_idx[sl][jump_speed]
            new_speed = _sample_speed_given_direction(ks, rng, cur_angles)
            ens.speed_idx[sl][jump_speed] = new_speed
            ens.n_speed_jumps[sl][jump_speed] += 1
        if jump_dir.any():
            new_dir = _sample_direction(ks, rng, int(jump_dir.sum()))
            ens.angle_idx[sl][jump_dir] = new_dir
            ens.n_dir_jumps[sl][jump_dir] += 1
    return ens


def run_discrete(ens: ParticleEnsemble, dt: float, t_end: float) -> ParticleEnsemble:
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9 * max(t_end, 1.0):
        raise ConfigurationError("t_end must be an integer number of steps")
    for _ in range(n_steps):
        step_discrete(ens, dt)
    return ens


# ---------------------------------------------------------------------------
# event-driven scheme
# ---------------------------------------------------------------------------

def simulate_event_driven(
    ens: ParticleEnsemble, t_end: float
) -> tuple[ParticleEnsemble, JumpStatistics]:
    """Advance every particle to t_end with two exponential clocks.

    Per chunk: both pending firing times start exponentially distributed;
    the earlier clock fires, the corresponding variable resamples, that clock
    re-arms, and the particle drifts ballistically in between. Counters
    accumulate across calls, and because the clocks are memoryless the
    pending times can be redrawn at the start of each call without changing
    the law of the process.
    """
    if t_end <= 0:
        raise ConfigurationError("t_end must be positive")
    ks = ens.kernels
    for sl, rng in zip(_chunk_slices(ens.n), ens.rngs):
        m = sl.stop - sl.start
        t_now = np.zeros(m)
        next_speed = rng.exponential(1.0 / ks.speed_rate, m)
        next_dir = rng.exponential(1.0 / ks.direction_rate, m)
        x = ens.x[sl]
        speed_idx = ens.speed_idx[sl]
        angle_idx = ens.angle_idx[sl]
        while True:
            t_next = np.minimum(next_speed, next_dir)
            active = np.flatnonzero(t_next < t_end)
            if active.size == 0:
                break
            # drift the firing particles to their event time
            dt = (t_next[active] - t_now[active])[:, None]
            ang = ks.angle.nodes[angle_idx[active]]
            vel = ks.speed.nodes[speed_idx[active]][:, None] * np.stack(
                [np.cos(ang), np.sin(ang)], axis=1
            )
            x[active] += dt * vel
            t_now[active] = t_next[active]

            fired_speed = active[next_speed[active] <= next_dir[active]]
            fired_dir = active[next_dir[active] < next_speed[active]]
            if fired_speed.size:
                speed_idx[fired_speed] = _sample_speed_given_direction(
                    ks, rng, angle_idx[fired_speed]
                )
                ens.n_speed_jumps[sl][fired_speed] += 1
                next_speed[fired_speed] = t_now[fired_speed] + rng.exponential(
                    1.0 / ks.speed_rate, fired_speed.size
                )
            if fired_dir.size:
                angle_idx[fired_dir] = _sample_direction(ks, rng, fired_dir.size)
                ens.n_dir_jumps[sl][fired_dir] += 1
                next_dir[fired_dir] = t_now[fired_dir] + rng.exponential(
                    1.0 / ks.direction_rate, fired_dir.size
                )
        # final ballistic segment to t_end
        ang = ks.angle.nodes[angle_idx]
        vel = ks.speed.nodes[speed_idx][:, None] * np.stack(
            [np.cos(ang), np.sin(ang)], axis=1
        )
        x += (t_end - t_now)[:, None] * vel
    return ens, JumpStatistics.of(ens)


# ---------------------------------------------------------------------------
# density estimation
# ---------------------------------------------------------------------------

def estimate_density(
    ens: ParticleEnsemble, spatial_grid: SpatialGrid | None = None
) -> tuple[np.ndarray | None, float, np.ndarray]:
    """Histogram estimates of the spatial and velocity densities.

    Returns (rho_hist, overflow_fraction, f_hist). rho_hist is a density per
    unit area on the spatial grid (None when no grid is given); particles
    outside the grid are counted in the overflow fraction, so that
    sum(rho_hist) * cell_area + overflow = 1. f_hist is the velocity density
    per unit speed per unit angle, normalized to unit mass (velocity states
    live exactly on the grid nodes, so this binning is exact).
    """
    ks = ens.kernels
    counts = np.bincount(
        ens.speed_idx * ks.angle.n + ens.angle_idx, minlength=ks.speed.n * ks.angle.n
    ).reshape(ks.speed.n, ks.angle.n)
    f_hist = counts / (ens.n * ks.cell_measure)

    if spatial_grid is None:
        return None, 0.0, f_hist

    g = spatial_grid
    ix = np.floor((ens.x[:, 0] - g.x0) / g.dx).astype(np.int64)
    iy = np.floor((ens.x[:, 1] - g.y0) / g.dy).astype(np.int64)
    inside = (ix >= 0) & (ix < g.nx) & (iy >= 0) & (iy < g.ny)
    counts_xy = np.bincount(
        ix[inside] * g.ny + iy[inside], minlength=g.nx * g.ny
    ).reshape(g.nx, g.ny)
    rho_hist = counts_xy / (ens.n * g.cell_area)
    overflow = 1.0 - float(inside.mean())
    return rho_hist, overflow, f_hist
