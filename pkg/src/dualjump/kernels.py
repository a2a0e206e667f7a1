"""Transition kernels of the two jump processes and their equilibrium.

The speed-jump kernel gives the density of the new speed conditioned on the
current direction; the direction-jump kernel gives the density of the new
direction. Both are discretized on the midpoint grids and renormalized
numerically at construction so the discrete normalization identities are
exact. Derived densities (the direction-averaged speed kernel, its
rate-weighted conditional combination, and the joint equilibrium) are *not*
renormalized: their normalization is a consequence of quadrature consistency
and is asserted by the test suite instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import i0

from .errors import ConfigurationError
from .grids import AngularGrid, SpeedGrid, build_grids

if TYPE_CHECKING:
    from .moments import MomentSet


# ---------------------------------------------------------------------------
# mean-speed profiles over the direction angle
# ---------------------------------------------------------------------------

def mean_speed_constant(value: float, angle: AngularGrid) -> np.ndarray:
    return np.full(angle.n, float(value))


def mean_speed_piecewise(upper: float, lower: float, angle: AngularGrid) -> np.ndarray:
    """`upper` on [0, pi), `lower` on [pi, 2pi)."""
    return np.where(angle.nodes < np.pi, float(upper), float(lower))


def mean_speed_abs_cos(amplitude: float, angle: AngularGrid) -> np.ndarray:
    return float(amplitude) * np.abs(np.cos(angle.nodes))


# ---------------------------------------------------------------------------
# kernel constructors
# ---------------------------------------------------------------------------

def speed_kernel_vonmises(
    speed: SpeedGrid,
    angle: AngularGrid,
    concentration: float,
    mean_speed: np.ndarray | float,
) -> np.ndarray:
    """Unimodal von Mises density in the speed, rescaled to (0, u_max].

    Column j is exp(k * cos(2pi (v - m_j) / u_max)) / (2pi I0(k)) evaluated at
    the speed nodes for the per-direction mean m_j, then renormalized so each
    column integrates to exactly 1 with the midpoint weights. Shape
    (n_s, n_theta).
    """
    if not (np.isfinite(concentration) and concentration >= 0):
        raise ConfigurationError(f"concentration must be >= 0, got {concentration!r}")
    means = np.asarray(mean_speed, dtype=float)
    if means.ndim == 0:
        means = np.full(angle.n, float(means))
    if means.shape != (angle.n,):
        raise ConfigurationError(
            f"mean_speed must be scalar or shape ({angle.n},), got {means.shape}"
        )
    if np.any(means < 0) or np.any(means > speed.u_max):
        raise ConfigurationError("mean_speed values must lie in [0, u_max]")

    phase = 2.0 * np.pi * (speed.nodes[:, None] - means[None, :]) / speed.u_max
    # subtract the per-column max exponent before exponentiating; the
    # analytic 1/(2pi I0(k)) prefactor is constant per column and cancels in
    # the renormalization anyway
    expo = concentration * np.cos(phase)
    expo -= expo.max(axis=0, keepdims=True)
    kern = np.exp(expo) / (2.0 * np.pi * i0(concentration))
    kern /= kern.sum(axis=0, keepdims=True) * speed.dv
    return kern


def direction_kernel_vonmises(
    angle: AngularGrid,
    concentration: float,
    preferred: float,
) -> np.ndarray:
    """Bimodal von Mises density on the circle, modes at +-preferred.

    Proportional to exp(k cos(t - t_q)) + exp(-k cos(t - t_q)); renormalized
    to integrate to exactly 1 with the midpoint weights. Shape (n_theta,).
    """
    if not (np.isfinite(concentration) and concentration >= 0):
        raise ConfigurationError(f"concentration must be >= 0, got {concentration!r}")
    c = concentration * np.cos(angle.nodes - float(preferred))
    # scale by e^{-k} to keep exp() in range at large concentration
    kern = (np.exp(c - concentration) + np.exp(-c - concentration)) / (
        4.0 * np.pi * i0(concentration)
    )
    kern /= kern.sum() * angle.dtheta
    return kern


def derive_equilibrium(
    speed_kernel: np.ndarray,
    direction_kernel: np.ndarray,
    speed: SpeedGrid,
    angle: AngularGrid,
    speed_rate: float,
    direction_rate: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stationary speed marginal, conditional equilibrium, joint equilibrium.

    Returns (stationary_speed, stationary_speed_cond, equilibrium):

    * stationary_speed[i]        = sum_j speed_kernel[i,j] q[j] dtheta
    * stationary_speed_cond[i,j] = (mu_dir * stationary_speed[i]
                                    + mu_speed * speed_kernel[i,j])
                                   / (mu_dir + mu_speed)
    * equilibrium[i,j]           = q[j] * stationary_speed_cond[i,j]

    None of the three is renormalized; with exactly normalized inputs their
    discrete normalizations hold automatically. Zero rates are accepted here
    (the convex combination degenerates to one endpoint); `KernelSet` itself
    requires strictly positive rates.
    """
    total = speed_rate + direction_rate
    if total <= 0:
        raise ConfigurationError("at least one jump rate must be positive")
    stationary_speed = speed_kernel @ (direction_kernel * angle.dtheta)
    stationary_speed_cond = (
        direction_rate * stationary_speed[:, None] + speed_rate * speed_kernel
    ) / total
    equilibrium = direction_kernel[None, :] * stationary_speed_cond
    return stationary_speed, stationary_speed_cond, equilibrium


# ---------------------------------------------------------------------------
# kernel container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelSet:
    """Discrete kernels, jump rates and derived equilibrium densities.

    Immutable after construction; safe to share across threads. Use
    :meth:`build` so the derived fields are consistent with the inputs.
    """

    speed: SpeedGrid
    angle: AngularGrid
    speed_kernel: np.ndarray = field(repr=False)       # (n_s, n_theta)
    direction_kernel: np.ndarray = field(repr=False)   # (n_theta,)
    speed_rate: float
    direction_rate: float
    stationary_speed: np.ndarray = field(repr=False)       # (n_s,)
    stationary_speed_cond: np.ndarray = field(repr=False)  # (n_s, n_theta)
    equilibrium: np.ndarray = field(repr=False)            # (n_s, n_theta)

    @classmethod
    def build(
        cls,
        speed: SpeedGrid,
        angle: AngularGrid,
        speed_kernel: np.ndarray,
        direction_kernel: np.ndarray,
        speed_rate: float,
        direction_rate: float,
    ) -> "KernelSet":
        speed_kernel = np.asarray(speed_kernel, dtype=float)
        direction_kernel = np.asarray(direction_kernel, dtype=float)
        if speed_kernel.shape != (speed.n, angle.n):
            raise ConfigurationError(
                f"speed_kernel must have shape {(speed.n, angle.n)}, got {speed_kernel.shape}"
            )
        if direction_kernel.shape != (angle.n,):
            raise ConfigurationError(
                f"direction_kernel must have shape {(angle.n,)}, got {direction_kernel.shape}"
            )
        if np.any(speed_kernel < 0) or np.any(direction_kernel < 0):
            raise ConfigurationError("kernels must be nonnegative")
        if not (speed_rate > 0 and direction_rate > 0):
            raise ConfigurationError("jump rates must be positive")
        col_norms = speed_kernel.sum(axis=0) * speed.dv
        if np.any(np.abs(col_norms - 1.0) > 1e-10):
            raise ConfigurationError("speed_kernel columns must integrate to 1")
        if abs(direction_kernel.sum() * angle.dtheta - 1.0) > 1e-10:
            raise ConfigurationError("direction_kernel must integrate to 1")

        psi_q, psi_qc, equil = derive_equilibrium(
            speed_kernel, direction_kernel, speed, angle, speed_rate, direction_rate
        )
        return cls(
            speed=speed,
            angle=angle,
            speed_kernel=speed_kernel,
            direction_kernel=direction_kernel,
            speed_rate=float(speed_rate),
            direction_rate=float(direction_rate),
            stationary_speed=psi_q,
            stationary_speed_cond=psi_qc,
            equilibrium=equil,
        )

    @classmethod
    def vonmises(
        cls,
        n_s: int,
        n_theta: int,
        u_max: float,
        k_speed: float,
        mean_speed: np.ndarray | float,
        k_dir: float,
        theta_preferred: float,
        speed_rate: float = 1.0,
        direction_rate: float = 1.0,
    ) -> "KernelSet":
        """Grids plus the two von Mises kernel families in one call."""
        speed, angle = build_grids(n_s, n_theta, u_max)
        if callable(mean_speed):
            mean_speed = np.asarray([mean_speed(t) for t in angle.nodes], dtype=float)
        psi = speed_kernel_vonmises(speed, angle, k_speed, mean_speed)
        q = direction_kernel_vonmises(angle, k_dir, theta_preferred)
        return cls.build(speed, angle, psi, q, speed_rate, direction_rate)

    # -- convenience ------------------------------------------------------

    @property
    def rate_sum(self) -> float:
        return self.speed_rate + self.direction_rate

    @property
    def dv(self) -> float:
        return self.speed.dv

    @property
    def dtheta(self) -> float:
        return self.angle.dtheta

    @property
    def cell_measure(self) -> float:
        return self.speed.dv * self.angle.dtheta

    @property
    def combined_kernel(self) -> np.ndarray:
        """Joint density speed_kernel * direction_kernel (the single-operator
        scattering kernel of the classical model)."""
        return self.speed_kernel * self.direction_kernel[None, :]

    @property
    def product_equilibrium(self) -> np.ndarray:
        """Factorized density stationary_speed x direction_kernel (the
        fast-direction limit equilibrium)."""
        return self.stationary_speed[:, None] * self.direction_kernel[None, :]

    def speed_kernel_is_unconditioned(self, rtol: float = 1e-12) -> bool:
        """True when the speed kernel does not depend on the direction."""
        ref = self.speed_kernel[:, :1]
        return bool(np.all(np.abs(self.speed_kernel - ref) <= rtol * np.abs(ref).max()))

    def with_rates(self, speed_rate: float, direction_rate: float) -> "KernelSet":
        """Same kernels, different jump rates (equilibrium is re-derived)."""
        return KernelSet.build(
            self.speed, self.angle, self.speed_kernel, self.direction_kernel,
            speed_rate, direction_rate,
        )

    @cached_property
    def moments(self) -> "MomentSet":
        """Quadrature moments; computed once per kernel set."""
        from .moments import compute_moments

        return compute_moments(self)
