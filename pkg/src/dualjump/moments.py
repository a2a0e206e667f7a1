"""Macroscopic moments of the kernels, by midpoint quadrature.

Drift vectors and second-moment tensors of the three reference equilibria:
the combined kernel (single-operator model), the joint equilibrium of the
two-operator model, and the factorized product equilibrium. These feed the
drift-diffusion limits directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSet


@dataclass(frozen=True)
class MomentSet:
    mean_speed_dir: np.ndarray = field(repr=False)  # (n_theta,) mean new speed per direction
    speed_sq_dir: np.ndarray = field(repr=False)    # (n_theta,) second speed moment per direction
    mean_dir: np.ndarray = field(repr=False)        # (2,) mean direction of the direction kernel
    mean_speed: float                                # mean of the stationary speed marginal
    speed_sq: float                                  # its second moment
    dir_second: np.ndarray = field(repr=False)      # (2,2) direction second-moment tensor
    dir_cov: np.ndarray = field(repr=False)         # (2,2) direction covariance
    drift_combined: np.ndarray = field(repr=False)     # (2,) mean velocity of the combined kernel
    drift_equilibrium: np.ndarray = field(repr=False)  # (2,) mean velocity of the joint equilibrium
    drift_product: np.ndarray = field(repr=False)      # (2,) mean velocity of the product equilibrium
    cov_combined: np.ndarray = field(repr=False)       # (2,2)
    cov_equilibrium: np.ndarray = field(repr=False)    # (2,2)
    cov_product: np.ndarray = field(repr=False)        # (2,2)

    @property
    def speed_sq_spread(self) -> float:
        """max over directions of |per-direction second moment - marginal one|.

        The macroscopic limits assume the per-direction second speed moment
        does not depend on the direction; this is the model-validity
        diagnostic for that assumption.
        """
        return float(np.max(np.abs(self.speed_sq_dir - self.speed_sq)))


def compute_moments(kernels: KernelSet) -> MomentSet:
    speed, angle = kernels.speed, kernels.angle
    v = speed.nodes
    dv, dth = speed.dv, angle.dtheta
    units = angle.unit_vectors                      # (n_theta, 2)
    q_w = kernels.direction_kernel * dth            # (n_theta,) quadrature mass per node

    mean_speed_dir = (v[:, None] * kernels.speed_kernel).sum(axis=0) * dv
    speed_sq_dir = (v[:, None] ** 2 * kernels.speed_kernel).sum(axis=0) * dv
    mean_dir = units.T @ q_w
    mean_speed = float(v @ kernels.stationary_speed * dv)
    speed_sq = float((v**2) @ kernels.stationary_speed * dv)

    dir_second = np.einsum("j,ja,jb->ab", q_w, units, units)
    dir_cov = dir_second - np.outer(mean_dir, mean_dir)

    drift_combined = units.T @ (q_w * mean_speed_dir)
    drift_product = mean_speed * mean_dir
    # mean velocity of the joint equilibrium, by direct quadrature on it
    vel_wt = (v[:, None] * kernels.equilibrium).sum(axis=0) * dv  # (n_theta,)
    drift_equilibrium = units.T @ (vel_wt * dth)

    second_common = speed_sq * dir_second
    cov_combined = second_common - np.outer(drift_combined, drift_combined)
    cov_equilibrium = second_common - np.outer(drift_equilibrium, drift_equilibrium)
    cov_product = second_common - np.outer(drift_product, drift_product)

    return MomentSet(
        mean_speed_dir=mean_speed_dir,
        speed_sq_dir=speed_sq_dir,
        mean_dir=mean_dir,
        mean_speed=mean_speed,
        speed_sq=speed_sq,
        dir_second=dir_second,
        dir_cov=dir_cov,
        drift_combined=drift_combined,
        drift_equilibrium=drift_equilibrium,
        drift_product=drift_product,
        cov_combined=cov_combined,
        cov_equilibrium=cov_equilibrium,
        cov_product=cov_product,
    )
