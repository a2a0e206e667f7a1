"""Spatially homogeneous relaxation of a velocity density.

Integrates d/dt f = collision(f) with classical RK4. The system is linear
with spectrum bounded by the total jump rate, so an explicit step of at most
0.1 / (total rate) is comfortably stable and keeps the per-step error near
roundoff for the entropy monotonicity checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, StabilityError
from .kernels import KernelSet
from .operators import EntropyReport, collision, entropy_report, marginals

MAX_STEP_FRACTION = 0.1


def rk4_step(f: np.ndarray, kernels: KernelSet, dt: float) -> np.ndarray:
    k1 = collision(f, kernels)
    k2 = collision(f + 0.5 * dt * k1, kernels)
    k3 = collision(f + 0.5 * dt * k2, kernels)
    k4 = collision(f + dt * k3, kernels)
    return f + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class RelaxationTrajectory:
    times: np.ndarray
    states: list[np.ndarray]
    masses: np.ndarray
    dir_marginal_err: np.ndarray
    entropy_times: np.ndarray
    entropy: list[EntropyReport] = field(default_factory=list)

    def final_state(self) -> np.ndarray:
        return self.states[-1]


def exact_direction_marginal(
    f0: np.ndarray, kernels: KernelSet, t: float | np.ndarray
) -> np.ndarray:
    """Closed-form direction marginal of the homogeneous dynamics.

    The direction-marginal equation closes on itself, relaxing exponentially
    at the direction-jump rate toward rho * direction_kernel.
    """
    rho, _, dir0 = marginals(f0, kernels)
    target = rho * kernels.direction_kernel
    decay = np.exp(-kernels.direction_rate * np.asarray(t, dtype=float))
    if decay.ndim == 0:
        return target + decay * (dir0 - target)
    return target[None, :] + decay[:, None] * (dir0 - target)[None, :]


def relax(
    f0: np.ndarray,
    kernels: KernelSet,
    dt: float,
    t_end: float,
    store_stride: int = 1,
    entropy_stride: int | None = 10,
) -> RelaxationTrajectory:
    """Integrate the homogeneous relaxation and record diagnostics.

    States (and the exact-direction-marginal error) are stored every
    store_stride steps; entropy reports every entropy_stride stored states
    (they cost O(grid^2), pass None to skip them entirely, e.g. for sharply
    concentrated kernels whose inverse weights are degenerate).
    """
    f0 = np.asarray(f0, dtype=float)
    if f0.shape != kernels.speed_kernel.shape:
        raise ConfigurationError(f"f0 must have shape {kernels.speed_kernel.shape}")
    if np.any(f0 < 0):
        raise ConfigurationError("initial density must be nonnegative")
    if dt > MAX_STEP_FRACTION / kernels.rate_sum:
        raise StabilityError(
            f"dt={dt:g} exceeds {MAX_STEP_FRACTION:g}/(total jump rate)="
            f"{MAX_STEP_FRACTION / kernels.rate_sum:g}"
        )
    if t_end < 0:
        raise ConfigurationError("t_end must be nonnegative")

    n_steps = int(np.ceil(t_end / dt - 1e-12)) if t_end > 0 else 0

    rho0, _, dir0 = marginals(f0, kernels)

    times = [0.0]
    states = [f0.copy()]
    masses = [rho0]
    dir_err = [0.0]
    entropy_times: list[float] = []
    entropy: list[EntropyReport] = []

    def record_entropy(t: float, f: np.ndarray) -> None:
        entropy_times.append(t)
        entropy.append(entropy_report(f, kernels))

    if entropy_stride is not None:
        record_entropy(0.0, f0)

    f = f0.copy()
    t = 0.0
    stored = 0
    for step in range(1, n_steps + 1):
        h = min(dt, t_end - t)
        f = rk4_step(f, kernels, h)
        t += h
        if step % store_stride == 0 or step == n_steps:
            stored += 1
            times.append(t)
            states.append(f.copy())
            rho, _, dir_now = marginals(f, kernels)
            masses.append(rho)
            exact = exact_direction_marginal(f0, kernels, t)
            dir_err.append(float(np.abs(dir_now - exact).max()))
            if entropy_stride is not None and stored % entropy_stride == 0:
                record_entropy(t, f)

    if entropy_stride is not None and (not entropy_times or entropy_times[-1] != t):
        record_entropy(t, f)

    return RelaxationTrajectory(
        times=np.asarray(times),
        states=states,
        masses=np.asarray(masses),
        dir_marginal_err=np.asarray(dir_err),
        entropy_times=np.asarray(entropy_times),
        entropy=entropy,
    )
