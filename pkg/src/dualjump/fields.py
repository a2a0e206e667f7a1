"""Density-field statistics, snapshot files, CSV and heatmap output.

Snapshot format (version 1): a flat little-endian float64 array, row-major
[ny x nx] (y rows, x columns), in a `.f64` file, with a JSON sidecar holding
the grid extent, time, format version and the configuration hash. Heatmaps
are diagnostics only: viridis, linear scale, min/max annotated.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grids import SpatialGrid

FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# field statistics
# ---------------------------------------------------------------------------

def gaussian_blob(grid: SpatialGrid, amplitude: float, variance: float,
                  center: tuple[float, float]) -> np.ndarray:
    """Isotropic Gaussian evaluated at the cell centers, shape (nx, ny)."""
    x = grid.x_centers[:, None]
    y = grid.y_centers[None, :]
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2
    return amplitude * np.exp(-r2 / (2.0 * variance))


def center_of_mass(rho: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    total = rho.sum()
    cx = float((rho.sum(axis=1) * grid.x_centers).sum() / total)
    cy = float((rho.sum(axis=0) * grid.y_centers).sum() / total)
    return np.array([cx, cy])


def second_moments(rho: np.ndarray, grid: SpatialGrid,
                   about: tuple[float, float] | np.ndarray) -> np.ndarray:
    """2x2 second-moment tensor of the density about a fixed point."""
    x = grid.x_centers[:, None] - about[0]
    y = grid.y_centers[None, :] - about[1]
    total = rho.sum()
    mxx = float((rho * x * x).sum() / total)
    myy = float((rho * y * y).sum() / total)
    mxy = float((rho * x * y).sum() / total)
    return np.array([[mxx, mxy], [mxy, myy]])


def l1_distance(a: np.ndarray, b: np.ndarray, grid: SpatialGrid) -> float:
    return float(np.abs(a - b).sum() * grid.cell_area)


# ---------------------------------------------------------------------------
# snapshot files
# ---------------------------------------------------------------------------

def write_field(path: Path | str, rho: np.ndarray, grid: SpatialGrid, time: float,
                config_hash: str = "", extra: dict | None = None) -> Path:
    """Write rho (indexed [ix, iy]) as row-major [ny x nx] plus a sidecar."""
    path = Path(path)
    data = np.ascontiguousarray(rho.T, dtype="<f8")  # rows are y
    data.tofile(path.with_suffix(".f64"))
    meta = {
        "format_version": FORMAT_VERSION,
        "nx": grid.nx,
        "ny": grid.ny,
        "extent": [grid.x0, grid.x1, grid.y0, grid.y1],
        "time": time,
        "config_hash": config_hash,
    }
    if extra:
        meta.update(extra)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=1, sort_keys=True))
    return path.with_suffix(".f64")


def read_field(path: Path | str) -> tuple[np.ndarray, dict]:
    """Read a snapshot back as ([ix, iy] array, metadata)."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    if meta.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported field format version {meta.get('format_version')}")
    flat = np.fromfile(path.with_suffix(".f64"), dtype="<f8")
    rho = flat.reshape(meta["ny"], meta["nx"]).T
    return rho, meta


def write_csv(path: Path | str, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    return path


def write_matrix_csv(path: Path | str, matrix: np.ndarray) -> Path:
    path = Path(path)
    np.savetxt(path, np.atleast_2d(matrix), delimiter=",", fmt="%.17g")
    return path


def write_heatmap(path: Path | str, rho: np.ndarray, grid: SpatialGrid,
                  title: str = "") -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    lo, hi = float(rho.min()), float(rho.max())
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(
        rho.T,
        origin="lower",
        extent=(grid.x0, grid.x1, grid.y0, grid.y1),
        cmap="viridis",
        vmin=lo,
        vmax=hi,
    )
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"{title}  min={lo:.3e} max={hi:.3e}".strip(), fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
