"""Periodic square grid standing in for R^2, with spectral operators.

Fields live on ``[-L, L)^2`` sampled at ``N x N`` points. Multi-mode states
are arrays of shape ``(..., N, N)``; every operator here acts on the last
two axes, so a whole vector state can be transformed in one call.

Continuous Fourier convention: ``f_hat(k) = (2 pi)^-1 \\int e^{-i k.x} f(x) dx``.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Tuple

import numpy as np
import scipy.fft as sfft

__all__ = [
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_VERSION",
    "SpatialGrid",
    "bump",
    "free_propagate",
    "galilean_project",
    "get_workers",
    "half_derivative",
    "lp_project",
    "lp_symbol",
    "read_snapshot",
    "set_workers",
    "transform_forward",
    "transform_inverse",
    "write_snapshot",
]

_WORKERS = 1


def set_workers(n: int) -> None:
    """Thread count handed to ``scipy.fft`` for every transform."""
    global _WORKERS
    if n < 1:
        raise ValueError("worker count must be >= 1")
    _WORKERS = int(n)


def get_workers() -> int:
    return _WORKERS


def fft2(a: np.ndarray) -> np.ndarray:
    return sfft.fft2(a, axes=(-2, -1), workers=_WORKERS)


def ifft2(a: np.ndarray) -> np.ndarray:
    return sfft.ifft2(a, axes=(-2, -1), workers=_WORKERS)


def _smooth_step(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def bump(r):
    """Radial cutoff: 1 on ``r <= 1``, 0 on ``r >= 2``, smooth and nonincreasing between.

    On ``(1, 2)`` it is ``s(2-r) / (s(2-r) + s(r-1))`` with ``s(t) = exp(-1/t)``.
    """
    r = np.asarray(r, dtype=float)
    out = np.where(r <= 1.0, 1.0, 0.0)
    mid = (r > 1.0) & (r < 2.0)
    if np.any(mid):
        rm = r[mid]
        a = _smooth_step(2.0 - rm)
        b = _smooth_step(rm - 1.0)
        out[mid] = a / (a + b)
    return out


def lp_symbol(kabs, i: int, mode: str = "shell"):
    """Littlewood-Paley multiplier at dyadic index ``i``.

    ``mode="shell"`` gives ``psi_i`` (``psi_0 = phi``, ``psi_i = phi(2^-i k) - phi(2^{1-i} k)``,
    zero for ``i < 0``); ``mode="lowpass"`` gives ``phi(2^-i k)`` for any integer ``i``.
    """
    kabs = np.asarray(kabs, dtype=float)
    if mode == "lowpass":
        return bump(kabs * 2.0 ** (-i))
    if mode != "shell":
        raise ValueError(f"unknown projector mode {mode!r}")
    if i < 0:
        return np.zeros_like(kabs)
    if i == 0:
        return bump(kabs)
    return bump(kabs * 2.0 ** (-i)) - bump(kabs * 2.0 ** (1 - i))


@dataclass(frozen=True)
class SpatialGrid:
    """``N x N`` periodic grid on ``[-L, L)^2``."""

    L: float
    N: int
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 8 and (self.N & (self.N - 1)) == 0):
            raise ValueError(f"N must be a power of two >= 8, got {self.N}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"L must be positive and finite, got {self.L}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dk(self) -> float:
        return math.pi / self.L

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.N, self.N)

    @property
    def k_nyquist(self) -> float:
        return math.pi / self.dx

    def _cached(self, name, build):
        if name not in self._cache:
            arr = build()
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)
            self._cache[name] = arr
        return self._cache[name]

    @property
    def x(self) -> np.ndarray:
        return self._cached("x", lambda: -self.L + self.dx * np.arange(self.N))

    @property
    def k(self) -> np.ndarray:
        # fftfreq puts the Nyquist row at -N/2
        return self._cached("k", lambda: 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx))

    def mesh(self):
        return self._cached("mesh", lambda: tuple(np.meshgrid(self.x, self.x, indexing="ij")))

    def kmesh(self):
        return self._cached("kmesh", lambda: tuple(np.meshgrid(self.k, self.k, indexing="ij")))

    @property
    def k2(self) -> np.ndarray:
        def build():
            kx, ky = self.kmesh()
            return kx**2 + ky**2
        return self._cached("k2", build)

    @property
    def kabs(self) -> np.ndarray:
        return self._cached("kabs", lambda: np.sqrt(self.k2))

    @property
    def r2(self) -> np.ndarray:
        def build():
            X, Y = self.mesh()
            return X**2 + Y**2
        return self._cached("r2", build)

    def dealias_mask(self) -> np.ndarray:
        """Square 2/3-rule mask."""
        def build():
            kx, ky = self.kmesh()
            cut = (2.0 / 3.0) * self.k_nyquist
            return ((np.abs(kx) <= cut) & (np.abs(ky) <= cut)).astype(float)
        return self._cached("dealias", build)

    def integrate(self, f) -> float:
        """Riemann sum ``dx^2 * sum f`` over the last two axes (and any leading ones)."""
        return float(np.sum(f) * self.dx**2)

    def check_field(self, f) -> np.ndarray:
        f = np.asarray(f)
        if f.shape[-2:] != self.shape:
            raise ValueError(f"field trailing shape {f.shape[-2:]} does not match grid {self.shape}")
        return f

    def is_lattice_frequency(self, xi, tol: float = 1e-9) -> bool:
        m = np.asarray(xi, dtype=float) / self.dk
        return bool(np.all(np.abs(m - np.round(m)) <= tol * np.maximum(1.0, np.abs(m))))

    def check_frequency(self, xi) -> np.ndarray:
        """Validate a shift frequency: must be a lattice point within the Nyquist range."""
        xi = np.asarray(xi, dtype=float).reshape(2)
        if np.any(np.abs(xi) >= self.k_nyquist):
            raise ValueError(f"frequency ({xi[0]:g}, {xi[1]:g}) outside representable range |k_i| < {self.k_nyquist:.6g}")
        if not self.is_lattice_frequency(xi):
            raise ValueError(f"frequency ({xi[0]:g}, {xi[1]:g}) is not on the lattice (pi/L) Z^2; pi/L = {self.dk:.6g}")
        return xi

    def plane_wave(self, xi) -> np.ndarray:
        X, Y = self.mesh()
        return np.exp(1j * (xi[0] * X + xi[1] * Y))


def _phase(grid: SpatialGrid) -> np.ndarray:
    # accounts for the grid starting at -L rather than 0
    def build():
        kx, ky = grid.kmesh()
        return np.exp(1j * grid.L * (kx + ky))
    return grid._cached("phase", build)


def transform_forward(field, grid: SpatialGrid) -> np.ndarray:
    """Unitary transform approximating the continuous Fourier transform.

    Coefficients are ordered like ``numpy.fft.fftfreq``; Parseval reads
    ``dx^2 * sum |f|^2 == dk^2 * sum |f_hat|^2``.
    """
    f = grid.check_field(field)
    return fft2(f) * (grid.dx**2 / (2.0 * np.pi)) * _phase(grid)


def transform_inverse(coeffs, grid: SpatialGrid) -> np.ndarray:
    c = grid.check_field(coeffs)
    return ifft2(c * np.conj(_phase(grid))) * (2.0 * np.pi / grid.dx**2)


def apply_multiplier(field, symbol, grid: SpatialGrid) -> np.ndarray:
    f = grid.check_field(field)
    return ifft2(fft2(f) * symbol)


def free_propagate(field, t: float, grid: SpatialGrid) -> np.ndarray:
    """``e^{it Laplacian}``: multiply each coefficient by ``exp(-i |k|^2 t)``."""
    if not math.isfinite(t):
        raise ValueError("propagation time must be finite")
    if t == 0:
        return np.array(grid.check_field(field), dtype=complex)
    return apply_multiplier(field, np.exp(-1j * grid.k2 * t), grid)


def lp_project(field, i: int, grid: SpatialGrid, mode: str = "shell") -> np.ndarray:
    """Littlewood-Paley projection ``P_i`` (shell) or ``P_{<=i}`` (lowpass)."""
    f = grid.check_field(field)
    if mode == "shell" and i < 0:
        return np.zeros(f.shape, dtype=complex)
    return apply_multiplier(f, lp_symbol(grid.kabs, i, mode), grid)


def galilean_project(field, xi0, i: int, grid: SpatialGrid, mode: str = "shell") -> np.ndarray:
    """``e^{i x.xi0} P (e^{-i x.xi0} f)``: projector recentred at frequency ``xi0``."""
    xi0 = grid.check_frequency(xi0)
    if not np.any(xi0):
        return lp_project(field, i, grid, mode)
    w = grid.plane_wave(xi0)
    return w * lp_project(np.conj(w) * grid.check_field(field), i, grid, mode)


def half_derivative(density, grid: SpatialGrid) -> np.ndarray:
    """``|nabla|^{1/2}`` of a real field; returns a real array."""
    d = grid.check_field(density)
    if np.iscomplexobj(d) and np.any(np.abs(d.imag) > 0):
        raise ValueError("half_derivative expects a real-valued density")
    out = apply_multiplier(np.real(d), np.sqrt(grid.kabs), grid)
    return out.real


def gradient(field, grid: SpatialGrid):
    """Spectral gradient; returns ``(d/dx, d/dy)``."""
    kx, ky = grid.kmesh()
    fh = fft2(grid.check_field(field))
    return ifft2(1j * kx * fh), ifft2(1j * ky * fh)


def translate(field, shift, grid: SpatialGrid) -> np.ndarray:
    """``f(x - shift)`` via the Fourier shift theorem (exact for band-limited periodic data)."""
    kx, ky = grid.kmesh()
    s = np.asarray(shift, dtype=float).reshape(2)
    if not np.any(s):
        return np.array(grid.check_field(field), dtype=complex)
    return apply_multiplier(field, np.exp(-1j * (kx * s[0] + ky * s[1])), grid)


# ---------------------------------------------------------------------------
# binary snapshots

SNAPSHOT_MAGIC = b"RNLSSNAP"
SNAPSHOT_VERSION = 1
# magic, version, N, L, J, t -- little endian, no padding
_HEADER = struct.Struct("<8sIIdId")


def write_snapshot(fh_or_path, modes: np.ndarray, grid: SpatialGrid, J: int, t: float) -> None:
    """Write modes ``j = -J..J`` as row-major interleaved little-endian float64 pairs."""
    modes = np.asarray(modes)
    if modes.shape != (2 * J + 1, grid.N, grid.N):
        raise ValueError(f"modes shape {modes.shape} does not match band J={J} on grid N={grid.N}")
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.N, float(grid.L), J, float(t))
    payload = np.ascontiguousarray(modes, dtype="<c16").tobytes(order="C")
    if isinstance(fh_or_path, (str, os.PathLike)):
        with open(fh_or_path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    else:
        fh_or_path.write(header)
        fh_or_path.write(payload)


def read_snapshot(fh_or_path):
    """Inverse of :func:`write_snapshot`; returns ``(modes, grid, J, t)``."""
    if isinstance(fh_or_path, (str, os.PathLike)):
        with open(fh_or_path, "rb") as fh:
            return _read_snapshot(fh)
    return _read_snapshot(fh_or_path)


def _read_snapshot(fh: BinaryIO):
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise ValueError("truncated snapshot header")
    magic, version, N, L, J, t = _HEADER.unpack(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    count = (2 * J + 1) * N * N
    data = np.frombuffer(fh.read(count * 16), dtype="<c16")
    if data.size != count:
        raise ValueError("truncated snapshot payload")
    modes = data.reshape(2 * J + 1, N, N).astype(complex)
    return modes, SpatialGrid(L, N), J, t
