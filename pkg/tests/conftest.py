from __future__ import annotations

import numpy as np
import pytest

from dualjump import KernelSet, build_grids, mean_speed_piecewise


@pytest.fixture(scope="session")
def mild_kernels() -> KernelSet:
    """Conditioned speed kernel, moderate concentrations: weights stay benign."""
    _, angle = build_grids(12, 8, 4.0)
    return KernelSet.vonmises(
        12, 8, 4.0,
        k_speed=5.0, mean_speed=mean_speed_piecewise(2.5, 1.0, angle),
        k_dir=1.5, theta_preferred=np.pi / 2,
        speed_rate=1.0, direction_rate=1.0,
    )


@pytest.fixture(scope="session")
def uncond_kernels() -> KernelSet:
    """Direction-independent speed kernel (the entropy theorem's regime)."""
    return KernelSet.vonmises(
        12, 8, 4.0,
        k_speed=4.0, mean_speed=1.8,
        k_dir=2.0, theta_preferred=np.pi / 2,
        speed_rate=1.0, direction_rate=1.0,
    )


@pytest.fixture(scope="session")
def uneven_rate_kernels() -> KernelSet:
    """Conditioned kernel with distinct jump rates."""
    _, angle = build_grids(10, 8, 3.0)
    return KernelSet.vonmises(
        10, 8, 3.0,
        k_speed=6.0, mean_speed=mean_speed_piecewise(2.0, 0.8, angle),
        k_dir=1.0, theta_preferred=np.pi / 3,
        speed_rate=0.7, direction_rate=2.3,
    )


def random_density(kernels: KernelSet, rng: np.random.Generator) -> np.ndarray:
    """Strictly positive random density with O(1) mass."""
    f = 0.05 + rng.random(kernels.speed_kernel.shape)
    return f / (f.sum() * kernels.cell_measure) * (0.5 + rng.random())


def random_zero_mass(kernels: KernelSet, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal(kernels.speed_kernel.shape)
    return g - g.mean()
