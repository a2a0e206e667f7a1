from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from dualjump import (
    ConfigurationError,
    JumpStatistics,
    ParticleEnsemble,
    SpatialGrid,
    estimate_density,
    run_discrete,
    simulate_event_driven,
    step_discrete,
)


def _frozen_clock(kernels, which: str):
    """Kernel set with one clock frozen (bypasses the positive-rate check;
    the derived equilibrium fields are stale but unused by the steppers)."""
    return dataclasses.replace(kernels, **{which: 0.0})


def test_free_drift_single_particle(mild_kernels):
    ks = _frozen_clock(_frozen_clock(mild_kernels, "speed_rate"), "direction_rate")
    ens = ParticleEnsemble.from_density(ks, 4, seed=0)
    # force a definite state: speed node 2.0 (if present) and angle pi/2
    i_speed = int(np.argmin(np.abs(ks.speed.nodes - 2.0)))
    j_angle = int(np.argmin(np.abs(ks.angle.nodes - np.pi / 2)))
    ens.speed_idx[:] = i_speed
    ens.angle_idx[:] = j_angle
    ens.x[:] = 0.0
    step_discrete(ens, 0.5)
    v = ks.speed.nodes[i_speed]
    th = ks.angle.nodes[j_angle]
    expected = np.tile([0.5 * v * np.cos(th), 0.5 * v * np.sin(th)], (ens.n, 1))
    np.testing.assert_allclose(ens.x, expected)
    assert not ens.n_speed_jumps.any() and not ens.n_dir_jumps.any()


def test_frozen_direction_clock_never_reorients(mild_kernels):
    ks = _frozen_clock(mild_kernels, "direction_rate")
    ens = ParticleEnsemble.from_density(ks, 2000, seed=1)
    angles0 = ens.angle_idx.copy()
    speeds0 = ens.speed_idx.copy()
    for _ in range(20):
        step_discrete(ens, 0.3)
    np.testing.assert_array_equal(ens.angle_idx, angles0)
    assert (ens.speed_idx != speeds0).any()  # the other clock still runs
    assert not ens.n_dir_jumps.any()


def test_frozen_speed_clock_never_changes_speed(mild_kernels):
    ks = _frozen_clock(mild_kernels, "speed_rate")
    ens = ParticleEnsemble.from_density(ks, 2000, seed=2)
    speeds0 = ens.speed_idx.copy()
    for _ in range(20):
        step_discrete(ens, 0.3)
    np.testing.assert_array_equal(ens.speed_idx, speeds0)
    assert not ens.n_speed_jumps.any()


def test_bernoulli_jump_fraction(mild_kernels):
    # one step at speed_rate*dt = 0.1: binomial concentration around 0.1
    ks = mild_kernels
    n = 200_000
    ens = ParticleEnsemble.from_density(ks, n, seed=3)
    dt = 0.1 / ks.speed_rate
    step_discrete(ens, dt)
    frac = (ens.n_speed_jumps > 0).mean()
    assert abs(frac - 0.1) <= 3 * np.sqrt(0.1 * 0.9 / n)


def test_step_discrete_rejects_large_dt(mild_kernels):
    ens = ParticleEnsemble.from_density(mild_kernels, 10, seed=4)
    with pytest.raises(ConfigurationError):
        step_discrete(ens, 1.5 / mild_kernels.speed_rate)


def test_event_driven_zero_jump_fraction(mild_kernels):
    ks = mild_kernels  # unit rates
    n = 100_000
    ens = ParticleEnsemble.from_density(ks, n, seed=5)
    _, stats = simulate_event_driven(ens, 1.0)
    target = np.exp(-ks.rate_sum * 1.0)
    se = np.sqrt(target * (1 - target) / n)
    assert abs(stats.zero_jump_fraction - target) <= 3 * se


def test_event_driven_mean_jump_counts(uneven_rate_kernels):
    ks = uneven_rate_kernels
    n = 100_000
    t_end = 2.0
    ens = ParticleEnsemble.from_density(ks, n, seed=6)
    _, stats = simulate_event_driven(ens, t_end)
    for mean, rate in (
        (stats.mean_dir_jumps, ks.direction_rate),
        (stats.mean_speed_jumps, ks.speed_rate),
    ):
        se = np.sqrt(rate * t_end / n)  # Poisson variance
        assert abs(mean - rate * t_end) <= 3 * se


def test_event_driven_long_run_reaches_equilibrium():
    # concentrated kernels: the 4/sqrt(n) budget implies a small effective
    # number of occupied bins (sum of sqrt(p_k) below ~5)
    from dualjump import KernelSet

    ks = KernelSet.vonmises(10, 8, 4.0, 30.0, 1.5, 8.0, np.pi / 2)
    n = 100_000
    # start far from equilibrium: everything in one velocity cell
    f0 = np.zeros_like(ks.equilibrium)
    f0[0, 0] = 1.0
    ens = ParticleEnsemble.from_density(ks, n, seed=7, f0=f0)
    t_end = 50.0 / min(ks.speed_rate, ks.direction_rate)
    _, _ = simulate_event_driven(ens, t_end)
    _, _, f_hist = estimate_density(ens)
    l1 = np.abs(f_hist - ks.equilibrium).sum() * ks.cell_measure
    assert l1 <= 4.0 / np.sqrt(n)


def test_determinism_bit_identical(mild_kernels):
    ks = mild_kernels

    def run():
        ens = ParticleEnsemble.from_density(ks, 70_000, seed=42)  # spans 2 chunks
        run_discrete(ens, 0.25, 1.0)
        simulate_event_driven(ens, 0.7)
        return ens

    a, b = run(), run()
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.speed_idx, b.speed_idx)
    np.testing.assert_array_equal(a.angle_idx, b.angle_idx)
    np.testing.assert_array_equal(a.n_speed_jumps, b.n_speed_jumps)
    np.testing.assert_array_equal(a.n_dir_jumps, b.n_dir_jumps)


def test_discrete_converges_to_event_driven(uncond_kernels):
    # zero-jump probability: exact Bernoulli product at each dt, approaching
    # the exponential as dt -> 0; the finer step must sit within Monte Carlo
    # error of its exact value and closer to the exponential than the coarse
    ks = uncond_kernels
    n = 100_000
    t_end = 1.0
    target = np.exp(-ks.rate_sum * t_end)

    results = {}
    for frac in (0.1, 0.01):
        dt = frac * min(1.0 / ks.speed_rate, 1.0 / ks.direction_rate)
        steps = int(round(t_end / dt))
        ens = ParticleEnsemble.from_density(ks, n, seed=8)
        run_discrete(ens, dt, steps * dt)
        frac_zero = JumpStatistics.of(ens).zero_jump_fraction
        exact = ((1 - ks.speed_rate * dt) * (1 - ks.direction_rate * dt)) ** steps
        se = np.sqrt(exact * (1 - exact) / n)
        assert abs(frac_zero - exact) <= 3 * se
        results[frac] = frac_zero
    assert abs(results[0.01] - target) < abs(results[0.1] - target)
    se = np.sqrt(target * (1 - target) / n)
    assert abs(results[0.01] - target) <= 4 * se


def test_estimate_density_indicator(mild_kernels):
    ks = mild_kernels
    grid = SpatialGrid(8, 8, 0.0, 1.0, 0.0, 1.0)
    ens = ParticleEnsemble.from_density(ks, 1000, seed=9)
    ens.x[:] = [grid.x_centers[3], grid.y_centers[5]]
    rho, overflow, _ = estimate_density(ens, grid)
    assert overflow == 0.0
    assert rho[3, 5] == pytest.approx(1.0 / grid.cell_area)
    assert rho.sum() * grid.cell_area == pytest.approx(1.0)


def test_estimate_density_uniform_and_overflow(mild_kernels):
    ks = mild_kernels
    grid = SpatialGrid(5, 5, 0.0, 1.0, 0.0, 1.0)
    n = 250_000
    rng = np.random.default_rng(10)
    ens = ParticleEnsemble.from_density(ks, n, seed=11)
    ens.x[:] = rng.random((n, 2)) * 1.2  # 1/1.44 of the square is inside
    rho, overflow, _ = estimate_density(ens, grid)
    p_cell = (0.2 * 0.2) / 1.44  # each 0.2x0.2 cell, positions uniform on 1.2^2
    se = np.sqrt(p_cell * (1 - p_cell) / n)
    counts = rho * grid.cell_area
    assert np.all(np.abs(counts - p_cell) <= 4 * se)
    assert rho.sum() * grid.cell_area + overflow == pytest.approx(1.0, abs=1e-12)
    assert overflow == pytest.approx(1 - 1 / 1.44, abs=4 * np.sqrt(0.3 / n) + 1e-3)


def test_from_density_validation(mild_kernels):
    with pytest.raises(ConfigurationError):
        ParticleEnsemble.from_density(mild_kernels, 0, seed=1)
    with pytest.raises(ConfigurationError):
        ParticleEnsemble.from_density(
            mild_kernels, 10, seed=1, f0=-mild_kernels.equilibrium
        )
