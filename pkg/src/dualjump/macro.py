"""Drift-diffusion limits of the kinetic model and a finite-volume stepper.

Four macroscopic models, assembled term by term from the kernel moments:

* m1 -- classical single-operator limit: drift is the combined-kernel mean
  velocity, diffusion its covariance over the single rate;
* m2 -- two-operator limit with both rates scaled by 1/eps: drift is the
  joint-equilibrium mean velocity, diffusion collects the mixed first-order
  correction terms (including the angular quadratures of the per-direction
  mean-speed profile);
* m3 -- fast-direction regime (direction rate 1/eps^2): slow drift toward
  the combined-kernel velocity plus a rank-one diffusion along the mean
  direction, weighted by the speed variance;
* m4 -- fast-speed regime (speed rate 1/eps^2): full drift with a first-order
  flux correction, diffusion from the mean-square speed profile.

The second speed moment is taken from the stationary marginal wherever the
derivation assumes it direction-independent; the spread of the per-direction
moments around it is exposed as a model-validity diagnostic on the MomentSet.

All epsilon factors are folded into the assembled coefficients, so the
stepper is a plain constant-coefficient drift-diffusion scheme: upwind drift
fluxes, centered diffusion fluxes with corner-averaged cross gradients,
zero-flux walls, conservative by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ModelAssemblyError, StabilityError
from .grids import SpatialGrid
from .kernels import KernelSet

MACRO_VARIANTS = ("m1", "m2", "m3", "m4")


@dataclass(frozen=True)
class MacroModel:
    variant: str
    epsilon: float
    drift: np.ndarray = field(repr=False)      # (2,)
    diffusion: np.ndarray = field(repr=False)  # (2,2), symmetric PSD


def _angular_quadratures(kernels: KernelSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three direction integrals entering the m2/m4 corrections."""
    m = kernels.moments
    q_w = kernels.direction_kernel * kernels.dtheta
    units = kernels.angle.unit_vectors
    u_psi = m.mean_speed_dir
    mu_s, mu_d = kernels.speed_rate, kernels.direction_rate

    w_vec = units.T @ (q_w * (mu_s * u_psi**2 + mu_d * m.speed_sq))
    w_tensor = np.einsum(
        "j,ja,jb->ab", q_w * (mu_d * m.mean_speed * u_psi + mu_s * u_psi**2), units, units
    )
    sq_tensor = np.einsum("j,ja,jb->ab", q_w * u_psi**2, units, units)
    return w_vec, w_tensor, sq_tensor


def assemble_macro_model(kernels: KernelSet, variant: str, epsilon: float) -> MacroModel:
    """Drift vector and diffusion tensor of the requested limit.

    The assembled diffusion is symmetrized (only the symmetric part of a
    constant tensor acts in divergence form) and must be positive
    semidefinite; an indefinite assembly raises with the offending
    eigenvalue rather than clipping it.
    """
    if variant not in MACRO_VARIANTS:
        raise ConfigurationError(f"variant must be one of {MACRO_VARIANTS}")
    if not (0 < epsilon <= 1):
        raise ConfigurationError("epsilon must lie in (0, 1]")
    m = kernels.moments
    mu_s, mu_d = kernels.speed_rate, kernels.direction_rate
    total = mu_s + mu_d
    u_q = m.mean_dir
    v_sq = m.speed_sq
    u_speed = m.mean_speed

    if variant == "m1":
        drift = m.drift_combined.copy()
        diff = (epsilon / mu_s) * m.cov_combined
    elif variant == "m2":
        w_vec, w_tensor, _ = _angular_quadratures(kernels)
        u_t = m.drift_equilibrium
        diff = v_sq * m.dir_second / total
        diff = diff - (2 * mu_d + mu_s) / (mu_d * total) * np.outer(u_t, u_t)
        diff = diff + mu_d**2 / (mu_s * total**2) * (v_sq - u_speed**2) * np.outer(u_q, u_q)
        diff = diff + np.outer(u_q, w_vec) / total**2
        diff = diff + mu_s / (mu_d * total**2) * w_tensor
        diff = epsilon * diff
        drift = u_t.copy()
    elif variant == "m3":
        ratio = epsilon * mu_s / mu_d
        drift = u_speed * u_q * (1.0 - ratio) + ratio * m.drift_combined
        diff = (epsilon / mu_s) * (v_sq - u_speed**2) * np.outer(u_q, u_q)
    else:  # m4
        ratio = epsilon * mu_d / mu_s
        drift = m.drift_combined * (1.0 + epsilon) - ratio * (
            m.drift_combined - u_speed * u_q
        )
        _, _, sq_tensor = _angular_quadratures(kernels)
        diff = (epsilon / mu_d) * (
            sq_tensor - np.outer(m.drift_combined, m.drift_combined)
        )

    diff = _validated_diffusion(diff, variant)
    return MacroModel(variant=variant, epsilon=float(epsilon), drift=drift, diffusion=diff)


def _validated_diffusion(diff: np.ndarray, variant: str) -> np.ndarray:
    """Symmetrize and reject indefinite tensors (never clip them)."""
    diff = 0.5 * (diff + diff.T)
    eigs = np.linalg.eigvalsh(diff)
    scale = max(float(np.abs(diff).max()), 1e-30)
    if eigs.min() < -1e-12 * scale:
        raise ModelAssemblyError(
            f"assembled {variant} diffusion tensor is indefinite "
            f"(eigenvalue {eigs.min():.3e})"
        )
    return diff


# ---------------------------------------------------------------------------
# finite-volume stepper
# ---------------------------------------------------------------------------

def macro_time_step_bound(model: MacroModel, grid: SpatialGrid) -> float:
    """Stability bound for the explicit update.

    Advection and diffusion share the step, so the bound is on the *sum* of
    their Courant numbers (taking the advective and diffusive limits
    separately is not sufficient when both are near-critical).
    """
    ux, uy = np.abs(model.drift)
    lam = float(np.linalg.eigvalsh(model.diffusion).max())
    rate = (
        ux / grid.dx
        + uy / grid.dy
        + 2.0 * lam * (1.0 / grid.dx**2 + 1.0 / grid.dy**2)
    )
    return 0.9 / rate if rate > 0 else np.inf


def step_macro(rho: np.ndarray, model: MacroModel, grid: SpatialGrid, dt: float) -> np.ndarray:
    """One conservative update: upwind drift + centered tensor diffusion.

    Zero-flux walls: boundary faces carry no flux at all, so total mass is
    conserved to roundoff. Cross-derivative terms use corner-averaged
    gradients with edge-reflected ghost cells.
    """
    if dt > macro_time_step_bound(model, grid) * (1 + 1e-12):
        raise StabilityError(
            f"dt={dt:g} exceeds the stability bound {macro_time_step_bound(model, grid):g}"
        )
    ux, uy = model.drift
    dxx, dxy = model.diffusion[0]
    _, dyy = model.diffusion[1]
    dx, dy = grid.dx, grid.dy

    # edge-reflected ghosts for the tangential gradients at faces
    p = np.pad(rho, 1, mode="edge")

    # x faces between cells i and i+1 (interior only): shape (nx-1, ny)
    flux_x = (max(ux, 0.0) * rho[:-1, :] + min(ux, 0.0) * rho[1:, :])
    flux_x = flux_x - dxx * (rho[1:, :] - rho[:-1, :]) / dx
    if dxy != 0.0:
        # d rho / dy averaged over the two cells adjacent to the face
        grad_y = (p[1:, 2:] - p[1:, :-2]) / (2.0 * dy)  # rows 0..nx at cells
        grad_y_face = 0.5 * (grad_y[:-2, :] + grad_y[1:-1, :])  # (nx-1, ny)
        flux_x = flux_x - dxy * grad_y_face

    # y faces between cells j and j+1: shape (nx, ny-1)
    flux_y = (max(uy, 0.0) * rho[:, :-1] + min(uy, 0.0) * rho[:, 1:])
    flux_y = flux_y - dyy * (rho[:, 1:] - rho[:, :-1]) / dy
    if dxy != 0.0:
        grad_x = (p[2:, 1:] - p[:-2, 1:]) / (2.0 * dx)  # cols 0..ny at cells
        grad_x_face = 0.5 * (grad_x[:, :-2] + grad_x[:, 1:-1])  # (nx, ny-1)
        flux_y = flux_y - dxy * grad_x_face

    out = rho.copy()
    out[:-1, :] -= dt / dx * flux_x
    out[1:, :] += dt / dx * flux_x
    out[:, :-1] -= dt / dy * flux_y
    out[:, 1:] += dt / dy * flux_y
    return out


@dataclass
class MacroResult:
    grid: SpatialGrid
    model: MacroModel
    snapshot_times: np.ndarray
    rho_snapshots: list[np.ndarray]
    mass_series: np.ndarray


def run_macro(
    model: MacroModel,
    grid: SpatialGrid,
    rho0: np.ndarray,
    t_end: float,
    snapshot_times: list[float] | None = None,
    dt_safety: float = 0.5,
) -> MacroResult:
    """Integrate to t_end with an automatic stable step."""
    rho0 = np.asarray(rho0, dtype=float)
    if rho0.shape != (grid.nx, grid.ny):
        raise ConfigurationError(f"rho0 must have shape {(grid.nx, grid.ny)}")
    if np.any(rho0 < 0):
        raise ConfigurationError("rho0 must be nonnegative")
    snaps = sorted(snapshot_times) if snapshot_times else [t_end]
    if any(t > t_end + 1e-12 for t in snaps):
        raise ConfigurationError("snapshot times must not exceed t_end")

    bound = macro_time_step_bound(model, grid)
    dt_base = dt_safety * bound if np.isfinite(bound) else t_end

    rho = rho0.copy()
    t = 0.0
    masses = [float(rho.sum() * grid.cell_area)]
    rho_snaps: list[np.ndarray] = []
    snap_times: list[float] = []
    pending = list(snaps)
    while t < t_end - 1e-12:
        dt = min(dt_base, t_end - t)
        if pending and t + dt > pending[0] - 1e-12:
            dt = pending[0] - t
        if dt > 1e-14:
            rho = step_macro(rho, model, grid, dt)
            t += dt
        masses.append(float(rho.sum() * grid.cell_area))
        if pending and t >= pending[0] - 1e-9:
            rho_snaps.append(rho.copy())
            snap_times.append(pending.pop(0))

    return MacroResult(
        grid=grid,
        model=model,
        snapshot_times=np.asarray(snap_times),
        rho_snapshots=rho_snaps,
        mass_series=np.asarray(masses),
    )
