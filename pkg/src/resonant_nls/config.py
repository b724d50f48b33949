"""Run configuration: a line-oriented ``section.key = value`` format.

Example::

    # comments start with '#'
    grid.L = 20.0
    grid.N = 128
    band.J = 2
    init.family = random_gaussians
    stepper.dt = 1e-3
    stepper.T = 1.0

Every key has a documented default (see ``DEFAULTS``). Parsing collects
all violations before failing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .dynamics import StepperConfig
from .grid import SpatialGrid
from .initial import gaussian_state, make_rng, random_gaussian_state
from .state import VectorField

__all__ = ["ConfigError", "DEFAULTS", "RunConfig", "parse_config", "load_config"]

# mass outside this many widths of a Gaussian is below 1e-8
SPREAD_WIDTHS = math.sqrt(math.log(1e8))

FAMILIES = ("gaussian", "random_gaussians", "zero")


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _pair(s: str) -> Tuple[float, float]:
    parts = [p for p in s.replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {s!r}")
    return float(parts[0]), float(parts[1])


def _intlist(s: str) -> Tuple[int, ...]:
    parts = [p for p in s.replace(" ", "").split(",") if p]
    if not parts:
        raise ValueError("expected a comma-separated list of integers")
    return tuple(int(p) for p in parts)


def _opt_int(s: str) -> Optional[int]:
    return None if s.strip().lower() in ("none", "") else int(s)


def _family(s: str) -> str:
    s = s.strip()
    if s not in FAMILIES:
        raise ValueError(f"unknown family {s!r}; choose from {', '.join(FAMILIES)}")
    return s


def _str(s: str) -> str:
    return s.strip()


# key -> (parser, default)
DEFAULTS: Dict[str, tuple] = {
    "grid.L": (float, 20.0),
    "grid.N": (int, 128),
    "band.J": (int, 2),
    "init.family": (_family, "gaussian"),
    "init.modes": (_intlist, (0,)),
    "init.amplitude": (float, 1.0),
    "init.width": (float, 1.0),
    "init.center": (_pair, (0.0, 0.0)),
    "init.xi": (_pair, (0.0, 0.0)),
    "init.center_spread": (float, 1.5),
    "stepper.dt": (float, 1e-3),
    "stepper.T": (float, 1.0),
    "stepper.dealias": (_bool, True),
    "stepper.snapshot_stride": (int, 10),
    "diagnostics.morawetz": (_bool, True),
    "diagnostics.morawetz_cutoff": (_opt_int, None),
    "diagnostics.n_fraction": (float, 0.5),
    "diagnostics.snapshots": (_bool, False),
    "diagnostics.validate_domain": (_bool, True),
    "scatter.windows": (int, 8),
    "scatter.threshold": (float, 0.01),
    "bilinear.i_high": (int, 6),
    "bilinear.i_lows": (_intlist, (3, 2, 1, 0)),
    "bilinear.p": (float, 2.0),
    "bilinear.L": (float, 4.0),
    "bilinear.N": (int, 512),
    "bilinear.J": (int, 1),
    "bilinear.window": (float, 0.03),
    "bilinear.n_times": (int, 61),
    "bilinear.slope_tolerance": (float, 0.15),
    "bilinear.min_r2": (float, 0.98),
    "covariance.max_ratio": (float, 3.0),
    "seed": (int, 0),
    "output.dir": (_str, "out"),
}


class ConfigError(ValueError):
    def __init__(self, errors: List[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class RunConfig:
    values: Dict[str, object]
    lines: Dict[str, int] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def grid(self) -> SpatialGrid:
        return SpatialGrid(self["grid.L"], self["grid.N"])

    @property
    def J(self) -> int:
        return self["band.J"]

    @property
    def seed(self) -> int:
        return self["seed"]

    @property
    def stepper(self) -> StepperConfig:
        return StepperConfig(dt=self["stepper.dt"], T=self["stepper.T"],
                             dealias=self["stepper.dealias"],
                             snapshot_stride=self["stepper.snapshot_stride"])

    def initial_state(self) -> VectorField:
        fam = self["init.family"]
        grid = self.grid
        if fam == "zero":
            return VectorField.zeros(grid, self.J)
        if fam == "gaussian":
            return gaussian_state(grid, self.J, self["init.modes"], center=self["init.center"],
                                  width=self["init.width"], amplitude=self["init.amplitude"],
                                  xi=self["init.xi"])
        rng = make_rng(self.seed)
        w = self["init.width"]
        return random_gaussian_state(grid, self.J, rng, amplitude=self["init.amplitude"],
                                     width_range=(0.8 * w, 1.5 * w),
                                     center_spread=self["init.center_spread"],
                                     modes=self["init.modes"])

    def replace(self, **overrides) -> "RunConfig":
        vals = dict(self.values)
        for k, v in overrides.items():
            vals[k.replace("__", ".")] = v
        cfg = RunConfig(vals, dict(self.lines))
        errs = _validate(cfg)
        if errs:
            raise ConfigError(errs)
        return cfg

    def echo(self) -> Dict[str, object]:
        out = {}
        for k, v in sorted(self.values.items()):
            out[k] = list(v) if isinstance(v, tuple) else v
        return out


def _where(cfg: RunConfig, key: str) -> str:
    ln = cfg.lines.get(key)
    return f"line {ln}: {key}" if ln else key


def _validate(cfg: RunConfig) -> List[str]:
    errs = []
    v = cfg.values
    N = v["grid.N"]
    if N < 8 or (N & (N - 1)) != 0:
        errs.append(f"{_where(cfg, 'grid.N')}: N must be a power of two >= 8, got {N}")
    if not v["grid.L"] > 0:
        errs.append(f"{_where(cfg, 'grid.L')}: L must be positive")
    J = v["band.J"]
    if J < 0:
        errs.append(f"{_where(cfg, 'band.J')}: J must be >= 0")
    bad = [j for j in v["init.modes"] if abs(j) > J]
    if J >= 0 and bad and v["init.family"] != "zero":
        errs.append(f"{_where(cfg, 'init.modes')}: modes {bad} lie outside the band set by "
                    f"{_where(cfg, 'band.J')} = {J}")
    if not v["stepper.dt"] > 0:
        errs.append(f"{_where(cfg, 'stepper.dt')}: dt must be > 0")
    elif not v["stepper.T"] >= v["stepper.dt"]:
        errs.append(f"{_where(cfg, 'stepper.T')}: T must be >= dt")
    if v["stepper.snapshot_stride"] < 1:
        errs.append(f"{_where(cfg, 'stepper.snapshot_stride')}: must be >= 1")
    if not 0 < v["diagnostics.n_fraction"] < 1:
        errs.append(f"{_where(cfg, 'diagnostics.n_fraction')}: must lie in (0, 1)")
    if not v["init.width"] > 0:
        errs.append(f"{_where(cfg, 'init.width')}: width must be positive")
    bN = v["bilinear.N"]
    if bN < 8 or (bN & (bN - 1)) != 0:
        errs.append(f"{_where(cfg, 'bilinear.N')}: N must be a power of two >= 8, got {bN}")
    if errs or not v["diagnostics.validate_domain"] or v["init.family"] == "zero":
        return errs
    # resolution heuristics: the run must stay inside the box and the 2/3 band
    x_spread, k_spread = _spreads(v)
    need = x_spread + 2.0 * k_spread * v["stepper.T"]
    if v["grid.L"] < need:
        errs.append(f"{_where(cfg, 'grid.L')}: L = {v['grid.L']:g} too small for horizon "
                    f"{_where(cfg, 'stepper.T')} = {v['stepper.T']:g}; need L >= x_spread + 2 k_max T = {need:.4g}")
    kn = math.pi * N / (2.0 * v["grid.L"])
    kcap = (2.0 / 3.0) * kn if v["stepper.dealias"] else kn
    if k_spread > kcap:
        errs.append(f"{_where(cfg, 'grid.N')}: N = {N} under-resolves the data (k_max = {k_spread:.4g} "
                    f"exceeds usable {kcap:.4g})")
    return errs


def _spreads(v) -> Tuple[float, float]:
    c = SPREAD_WIDTHS
    w = v["init.width"]
    if v["init.family"] == "random_gaussians":
        s = v["init.center_spread"]
        return s * math.sqrt(2.0) + c * 1.5 * w, c / (0.8 * w)
    cx, cy = v["init.center"]
    kx, ky = v["init.xi"]
    return math.hypot(cx, cy) + c * w, math.hypot(kx, ky) + c / w


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    errs = []
    values = {k: d for k, (_, d) in DEFAULTS.items()}
    lines: Dict[str, int] = {}
    seen: Dict[str, int] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errs.append(f"line {ln}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            errs.append(f"line {ln}: unknown key {key!r}")
            continue
        if key in seen:
            errs.append(f"line {ln}: duplicate key {key!r} (first set on line {seen[key]})")
            continue
        seen[key] = ln
        parser = DEFAULTS[key][0]
        try:
            values[key] = parser(val)
        except (TypeError, ValueError) as exc:
            errs.append(f"line {ln}: {key}: type mismatch ({exc})")
            continue
        lines[key] = ln
    cfg = RunConfig(values, lines)
    # keys that failed to parse keep their defaults, so validation still reports the rest
    errs += _validate(cfg)
    if errs:
        raise ConfigError(errs)
    return cfg


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
