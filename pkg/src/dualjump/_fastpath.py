"""Numba kernels for the kinetic solver's hot loops.

The collision substep is independent per spatial cell and the transport
sweep independent per velocity node, so both parallelize without shared
mutable state. Determinism: all parallel writes go to disjoint slices, and
the only reduction (boundary outflow) is accumulated per velocity node into
an array that is summed sequentially afterwards, so results are bit-identical
across thread counts.

Pure-numpy reference implementations live in `kinetic`; the test suite
checks the two paths against each other. Import failure (no numba) simply
disables the fast path.
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - exercised implicitly via the dispatch flag
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def deco(fn):
            return fn

        return deco

    prange = range  # type: ignore[assignment]


@njit(parallel=True, cache=True)
def sweep_axis0(f, vel, coef):
    """Upwind sweep along axis 0, zero-inflow; returns per-node outflow sums.

    In-place: for v > 0 the cells update in descending index order (each cell
    reads its not-yet-updated upwind neighbor), ascending for v < 0.
    """
    nx, ny, ns, nt = f.shape
    outflow = np.zeros(ns * nt)
    for k in prange(ns * nt):
        i = k // nt
        j = k % nt
        v = vel[i, j]
        if v == 0.0:
            continue
        acc = 0.0
        if v > 0.0:
            for iy in range(ny):
                acc += v * f[nx - 1, iy, i, j]
                for ix in range(nx - 1, 0, -1):
                    f[ix, iy, i, j] -= coef * v * (f[ix, iy, i, j] - f[ix - 1, iy, i, j])
                f[0, iy, i, j] -= coef * v * f[0, iy, i, j]
        else:
            for iy in range(ny):
                acc += -v * f[0, iy, i, j]
                for ix in range(nx - 1):
                    f[ix, iy, i, j] -= coef * v * (f[ix + 1, iy, i, j] - f[ix, iy, i, j])
                f[nx - 1, iy, i, j] -= coef * v * (-f[nx - 1, iy, i, j])
        outflow[k] = acc
    return outflow


@njit(parallel=True, cache=True)
def sweep_axis1(f, vel, coef):
    """Same as sweep_axis0 along axis 1."""
    nx, ny, ns, nt = f.shape
    outflow = np.zeros(ns * nt)
    for k in prange(ns * nt):
        i = k // nt
        j = k % nt
        v = vel[i, j]
        if v == 0.0:
            continue
        acc = 0.0
        if v > 0.0:
            for ix in range(nx):
                acc += v * f[ix, ny - 1, i, j]
                for iy in range(ny - 1, 0, -1):
                    f[ix, iy, i, j] -= coef * v * (f[ix, iy, i, j] - f[ix, iy - 1, i, j])
                f[ix, 0, i, j] -= coef * v * f[ix, 0, i, j]
        else:
            for ix in range(nx):
                acc += -v * f[ix, 0, i, j]
                for iy in range(ny - 1):
                    f[ix, iy, i, j] -= coef * v * (f[ix, iy + 1, i, j] - f[ix, iy, i, j])
                f[ix, ny - 1, i, j] -= coef * v * (-f[ix, ny - 1, i, j])
        outflow[k] = acc
    return outflow


@njit(cache=True)
def _cell_rhs_two_jump(cell, psi, q, dv, dth, mu_s, mu_d, out, sm, dm):
    ns, nt = cell.shape
    for i in range(ns):
        s = 0.0
        for j in range(nt):
            s += cell[i, j]
        sm[i] = s * dth
    for j in range(nt):
        s = 0.0
        for i in range(ns):
            s += cell[i, j]
        dm[j] = s * dv
    total = mu_s + mu_d
    for i in range(ns):
        for j in range(nt):
            out[i, j] = mu_d * sm[i] * q[j] + mu_s * psi[i, j] * dm[j] - total * cell[i, j]


@njit(cache=True)
def _cell_rhs_bgk(cell, target, dv, dth, rate, out):
    ns, nt = cell.shape
    rho = 0.0
    for i in range(ns):
        for j in range(nt):
            rho += cell[i, j]
    rho *= dv * dth
    for i in range(ns):
        for j in range(nt):
            out[i, j] = rate * (rho * target[i, j] - cell[i, j])


@njit(parallel=True, cache=True)
def collision_rk4_two_jump(f, psi, q, dv, dth, mu_s, mu_d, h, n_sub):
    """Full collision step: n_sub RK4 substeps per spatial cell, one pass."""
    nx, ny, ns, nt = f.shape
    for c in prange(nx * ny):
        ix = c // ny
        iy = c % ny
        cell = f[ix, iy].copy()
        k1 = np.empty((ns, nt))
        k2 = np.empty((ns, nt))
        k3 = np.empty((ns, nt))
        k4 = np.empty((ns, nt))
        stage = np.empty((ns, nt))
        sm = np.empty(ns)
        dm = np.empty(nt)
        for _ in range(n_sub):
            _cell_rhs_two_jump(cell, psi, q, dv, dth, mu_s, mu_d, k1, sm, dm)
            for i in range(ns):
                for j in range(nt):
                    stage[i, j] = cell[i, j] + 0.5 * h * k1[i, j]
            _cell_rhs_two_jump(stage, psi, q, dv, dth, mu_s, mu_d, k2, sm, dm)
            for i in range(ns):
                for j in range(nt):
                    stage[i, j] = cell[i, j] + 0.5 * h * k2[i, j]
            _cell_rhs_two_jump(stage, psi, q, dv, dth, mu_s, mu_d, k3, sm, dm)
            for i in range(ns):
                for j in range(nt):
                    stage[i, j] = cell[i, j] + h * k3[i, j]
            _cell_rhs_two_jump(stage, psi, q, dv, dth, mu_s, mu_d, k4, sm, dm)
            for i in range(ns):
                for j in range(nt):
                    cell[i, j] += (h / 6.0) * (
                        k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j]
                    )
        f[ix, iy] = cell


@njit(parallel=True, cache=True)
def collision_rk4_bgk(f, target, dv, dth, rate, h, n_sub):
    nx, ny, ns, nt = f.shape
    for c in prange(nx * ny):
        ix = c // ny
        iy = c % ny
        cell = f[ix, iy].copy()
        k1 = np.empty((ns, nt))
        k2 = np.empty((ns, nt))
        k3 = np.empty((ns, nt))
        k4 = np.empty((ns, nt))
        stage = np.empty((ns, nt))
        for _ in range(n_sub):
            _cell_rhs_bgk(cell, target, dv, dth, rate, k1)
            for i in range(ns):
                for j in range(nt):
                    stage[i, j] = cell[i, j] + 0.5 * h * k1[i, j]
            _cell_rhs_bgk(stage, target, dv, dth, rate, k2)
            for i in range(ns):
                for j in range(nt):
                    stage[i, j] = cell[i, j] + 0.5 * h * k2[i, j]
            _cell_rhs_bgk(stage, target, dv, dth, rate, k3)
            for i in range(ns):
                for j in range(nt):
                    stage[i, j] = cell[i, j] + h * k3[i, j]
            _cell_rhs_bgk(stage, target, dv, dth, rate, k4)
            for i in range(ns):
                for j in range(nt):
                    cell[i, j] += (h / 6.0) * (
                        k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j]
                    )
        f[ix, iy] = cell
