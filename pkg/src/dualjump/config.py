"""Run configuration: INI parsing, presets, and the config hash.

The file format is flat INI (configparser): one section per concern, scalar
values, lists comma-separated. Mean-speed profiles are spec strings
(`const:v`, `piecewise:hi,lo`, `abs_cos:a`, or `table:v1,v2,...` with one
value per angle node). Per-variant overrides append `_<variant>` to a key in
[kernels] (Test 1 uses this to give the unconditioned run its constant mean
speed). Per-variant end times use `variant:value` pairs in [time] t_end.

Presets shipped with the package reproduce the paper-style experiments:

* test1    -- kinetic comparison of the single-operator model (unconditioned
              and conditioned) against the two-operator model;
* test2_1  -- the four macroscopic limits on the Test-1 kernels;
* test2_2  -- the four limits with the |cos| mean-speed profile;
* defaults -- mild kernels on small grids, used when no config is given.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .grids import AngularGrid, SpatialGrid, build_grids
from .kernels import (
    KernelSet,
    mean_speed_abs_cos,
    mean_speed_constant,
    mean_speed_piecewise,
)

PRESETS = ("test1", "test2_1", "test2_2", "defaults")
CONFIG_FORMAT_VERSION = 1


def mean_speed_from_spec(spec: str, angle: AngularGrid) -> np.ndarray:
    kind, _, args = spec.partition(":")
    try:
        values = [float(v) for v in args.split(",")] if args else []
    except ValueError as exc:
        raise ConfigurationError(f"bad mean_speed spec {spec!r}") from exc
    if kind == "const" and len(values) == 1:
        return mean_speed_constant(values[0], angle)
    if kind == "piecewise" and len(values) == 2:
        return mean_speed_piecewise(values[0], values[1], angle)
    if kind == "abs_cos" and len(values) == 1:
        return mean_speed_abs_cos(values[0], angle)
    if kind == "table":
        if len(values) != angle.n:
            raise ConfigurationError(
                f"mean_speed table needs {angle.n} values, got {len(values)}"
            )
        return np.asarray(values)
    raise ConfigurationError(f"bad mean_speed spec {spec!r}")


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration plus the raw key-value map it came from."""

    name: str
    kind: str                      # kinetic | macro | homogeneous | particles
    variants: tuple[str, ...]
    raw: dict = field(repr=False)

    # -- section accessors --------------------------------------------------

    def _get(self, section: str, key: str, default=None):
        sect = self.raw.get(section, {})
        if key in sect:
            return sect[key]
        if default is None:
            raise ConfigurationError(f"missing [{section}] {key}")
        return default

    def _kernel_value(self, key: str, variant: str | None, default=None):
        sect = self.raw.get("kernels", {})
        if variant and f"{key}_{variant}" in sect:
            return sect[f"{key}_{variant}"]
        return self._get("kernels", key, default)

    def velocity_grid_sizes(self) -> tuple[int, int]:
        return int(self._get("grid", "n_s")), int(self._get("grid", "n_theta"))

    def spatial_grid(self) -> SpatialGrid:
        g = self.raw.get("grid", {})
        grid = SpatialGrid(
            nx=int(g.get("nx", 64)),
            ny=int(g.get("ny", 64)),
            x0=float(g.get("x0", 0.0)),
            x1=float(g.get("x1", 2.5)),
            y0=float(g.get("y0", 0.0)),
            y1=float(g.get("y1", 2.5)),
        )
        padding = float(g.get("padding", 1.0))
        return grid.padded(padding) if padding != 1.0 else grid

    def kernels(self, variant: str | None = None) -> KernelSet:
        n_s, n_theta = self.velocity_grid_sizes()
        u_max = float(self._kernel_value("u_max", variant))
        _, angle = build_grids(n_s, n_theta, u_max)
        means = mean_speed_from_spec(str(self._kernel_value("mean_speed", variant)), angle)
        return KernelSet.vonmises(
            n_s, n_theta, u_max,
            k_speed=float(self._kernel_value("k_speed", variant)),
            mean_speed=means,
            k_dir=float(self._kernel_value("k_dir", variant)),
            theta_preferred=float(self._kernel_value("theta_preferred", variant)),
            speed_rate=float(self._kernel_value("speed_rate", variant, 1.0)),
            direction_rate=float(self._kernel_value("direction_rate", variant, 1.0)),
        )

    def scaling(self) -> tuple[str, float]:
        s = self.raw.get("scaling", {})
        return str(s.get("mode", "none")), float(s.get("epsilon", 1.0))

    def initial_blob(self) -> tuple[float, float, tuple[float, float]]:
        s = self.raw.get("initial", {})
        return (
            float(s.get("r0", 1.0)),
            float(s.get("sigma2", 0.01)),
            (float(s.get("x_center", 1.25)), float(s.get("y_center", 1.25))),
        )

    def velocity_init(self) -> str:
        return str(self.raw.get("initial", {}).get("velocity_init", "equilibrium"))

    def t_end(self, variant: str | None = None) -> float:
        spec = str(self._get("time", "t_end"))
        if ":" not in spec:
            return float(spec)
        table = {}
        for item in spec.split(","):
            key, _, val = item.strip().partition(":")
            table[key.strip()] = float(val)
        if variant is None or variant not in table:
            raise ConfigurationError(f"no t_end entry for variant {variant!r}")
        return table[variant]

    def snapshots(self, variant: str | None = None) -> list[float]:
        s = self.raw.get("time", {})
        if "snapshots" in s:
            return [float(v) for v in str(s["snapshots"]).split(",")]
        return [self.t_end(variant)]

    def run_option(self, key: str, default):
        val = self.raw.get("run", {}).get(key, default)
        return type(default)(val)

    # -- hashing -------------------------------------------------------------

    def config_hash(self) -> str:
        canon = json.dumps(
            {"format": CONFIG_FORMAT_VERSION, "config": self.raw},
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _parse(parser: configparser.ConfigParser, origin: str) -> RunConfig:
    raw = {section: dict(parser.items(section)) for section in parser.sections()}
    exp = raw.get("experiment", {})
    name = exp.get("name", Path(origin).stem)
    kind = exp.get("kind", "kinetic")
    if kind not in ("kinetic", "macro", "homogeneous", "particles"):
        raise ConfigurationError(f"unknown experiment kind {kind!r}")
    variants = tuple(
        v.strip() for v in exp.get("variants", "").split(",") if v.strip()
    )
    return RunConfig(name=name, kind=kind, variants=variants, raw=raw)


def load_config(source: str | Path) -> RunConfig:
    """Load a preset by name or an INI file by path."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if str(source) in PRESETS:
        text = resources.files("dualjump.presets").joinpath(f"{source}.ini").read_text()
        parser.read_string(text)
        return _parse(parser, str(source))
    path = Path(source)
    if not path.exists():
        raise ConfigurationError(f"no such preset or config file: {source}")
    parser.read_string(path.read_text())
    return _parse(parser, str(path))
