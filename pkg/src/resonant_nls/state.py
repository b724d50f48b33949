"""Vector-valued states and the functionals defined on them."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .grid import SpatialGrid, fft2
from .resonance import ModeBand

__all__ = [
    "DIAGNOSTICS_HEADER",
    "DiagnosticsRecord",
    "TimeNormAccumulator",
    "VectorField",
    "WeightSpec",
    "density",
    "energy",
    "kinetic_energy",
    "interaction_energy",
    "mass",
    "norm",
    "pointwise_norm",
    "write_diagnostics_csv",
]


class VectorField:
    """One complex ``N x N`` field per mode ``j in [-J, J]``.

    ``data[j + J]`` is mode ``j``. The array is owned by the instance; the
    operations in this package never modify it in place.
    """

    __slots__ = ("grid", "band", "data")

    def __init__(self, data, grid: SpatialGrid, band):
        band = band if isinstance(band, ModeBand) else ModeBand(int(band))
        data = np.array(data, dtype=complex)
        if data.ndim != 3 or data.shape[0] != band.size or data.shape[1:] != grid.shape:
            raise ValueError(
                f"state array shape {data.shape} incompatible with band J={band.J} and grid {grid.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("state contains non-finite entries")
        self.grid = grid
        self.band = band
        self.data = data

    @classmethod
    def zeros(cls, grid: SpatialGrid, band) -> "VectorField":
        band = band if isinstance(band, ModeBand) else ModeBand(int(band))
        return cls(np.zeros((band.size,) + grid.shape, dtype=complex), grid, band)

    @classmethod
    def single_mode(cls, profile, j: int, grid: SpatialGrid, band) -> "VectorField":
        v = cls.zeros(grid, band)
        v.data[v.band.index(j)] = profile
        return v

    @property
    def J(self) -> int:
        return self.band.J

    def mode(self, j: int) -> np.ndarray:
        return self.data[self.band.index(j)]

    def with_data(self, data) -> "VectorField":
        return VectorField(data, self.grid, self.band)

    def copy(self) -> "VectorField":
        return VectorField(self.data, self.grid, self.band)

    def __repr__(self):
        return f"VectorField(J={self.J}, N={self.grid.N}, L={self.grid.L})"


@dataclass(frozen=True)
class WeightSpec:
    """Mass weight ``g(j) = a + b j + c j^2`` (``a, c >= 0``)."""

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if self.a < 0 or self.c < 0:
            raise ValueError(f"weight needs a >= 0 and c >= 0, got a={self.a}, c={self.c}")

    def __call__(self, j):
        j = np.asarray(j, dtype=float)
        return self.a + self.b * j + self.c * j * j


UNIT_WEIGHT = WeightSpec()
H1_WEIGHT = WeightSpec(1.0, 0.0, 1.0)


def _jweights(band: ModeBand, a: int) -> np.ndarray:
    j = np.arange(-band.J, band.J + 1, dtype=float)
    return (1.0 + j * j) ** a


def density(u: VectorField) -> np.ndarray:
    """``rho = sum_j |u_j|^2``."""
    return np.sum(np.abs(u.data) ** 2, axis=0)


def pointwise_norm(u: VectorField, a: int = 0) -> np.ndarray:
    """``(sum_j <j>^{2a} |u_j(x)|^2)^{1/2}`` at every grid point."""
    if a not in (0, 1):
        raise ValueError(f"weight exponent must be 0 or 1, got {a}")
    w = _jweights(u.band, a)[:, None, None]
    return np.sqrt(np.sum(w * np.abs(u.data) ** 2, axis=0))


def mass(u: VectorField, w: WeightSpec = UNIT_WEIGHT) -> float:
    g = w(np.arange(-u.J, u.J + 1))
    per_mode = np.sum(np.abs(u.data) ** 2, axis=(1, 2))
    return float(np.dot(g, per_mode) * u.grid.dx**2)


def kinetic_energy(u: VectorField) -> float:
    """``1/2 sum_j \\int |grad u_j|^2``, computed on the Fourier side."""
    g = u.grid
    uh = fft2(u.data)
    # Parseval for the unnormalised FFT: sum |f|^2 = sum |F|^2 / N^2
    s = np.sum(g.k2 * np.sum(np.abs(uh) ** 2, axis=0)) / g.N**2
    return 0.5 * float(s) * g.dx**2


def interaction_energy(u: VectorField) -> float:
    """``1/4 \\int [2 rho^2 - sum_j |u_j|^4]``; nonnegative."""
    a2 = np.abs(u.data) ** 2
    rho = np.sum(a2, axis=0)
    return 0.25 * u.grid.integrate(2.0 * rho**2 - np.sum(a2**2, axis=0))


def energy(u: VectorField) -> float:
    return kinetic_energy(u) + interaction_energy(u)


def norm(u: VectorField, p=2, a: int = 0) -> float:
    """``|| (sum_j <j>^{2a} |u_j|^2)^{1/2} ||_{L^p_x}`` for ``p`` in ``{2, 4, inf}``."""
    if p not in (2, 4, math.inf, "inf"):
        raise ValueError(f"unsupported spatial exponent {p!r}; use 2, 4 or inf")
    pn = pointwise_norm(u, a)
    if p in (math.inf, "inf"):
        return float(np.max(pn))
    return u.grid.integrate(pn**p) ** (1.0 / p)


class TimeNormAccumulator:
    """Running ``\\int ||u(t)||^p_{L^q_x h^a} dt`` by the trapezoid rule.

    Feed samples in increasing time order; ``value`` is the integral of the
    p-th power and ``norm`` its p-th root.
    """

    def __init__(self, p: float = 4, q=4, a: int = 0):
        if p <= 0 or math.isinf(p):
            raise ValueError("time exponent must be finite and positive")
        self.p, self.q, self.a = p, q, a
        self.value = 0.0
        self._last: Optional[tuple] = None

    def add(self, t: float, u: VectorField) -> float:
        return self.add_value(t, norm(u, self.q, self.a) ** self.p)

    def add_value(self, t: float, fp: float) -> float:
        if self._last is not None:
            t0, f0 = self._last
            if t < t0:
                raise ValueError("samples must be added in nondecreasing time order")
            self.value += 0.5 * (t - t0) * (f0 + fp)
        self._last = (t, fp)
        return self.value

    @property
    def norm(self) -> float:
        return self.value ** (1.0 / self.p)


DIAGNOSTICS_HEADER = ("t", "mass", "mass_h1", "energy", "l4_accum", "morawetz",
                      "xc_1", "xc_2", "xi_1", "xi_2", "N_scale")


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    mass_h1: float
    energy: float
    l4_accum: float
    morawetz: float
    x_center: Sequence[float] = field(default=(0.0, 0.0))
    xi_center: Sequence[float] = field(default=(0.0, 0.0))
    N_scale: float = 0.0

    def row(self):
        return (self.t, self.mass, self.mass_h1, self.energy, self.l4_accum, self.morawetz,
                self.x_center[0], self.x_center[1], self.xi_center[0], self.xi_center[1],
                self.N_scale)


def _fmt(v) -> str:
    return repr(float(v))


def write_diagnostics_csv(path, records: Iterable[DiagnosticsRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGNOSTICS_HEADER)
        for r in records:
            w.writerow([_fmt(v) for v in r.row()])
