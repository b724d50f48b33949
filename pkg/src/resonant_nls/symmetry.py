"""Phase, Galilean, translation and dilation symmetries acting on states
and trajectories.

The action of ``g = (theta, xi0, x0, lam)`` is

    (T_g u)(t, x) = lam^-1 e^{i theta} e^{i x.xi0} e^{-i t |xi0|^2}
                    u(t / lam^2, (x - x0 - 2 xi0 t) / lam).

Composition ``T_{g1} T_{g2} = T_{g1 * g2}`` with

    g1 * g2 = (theta1 + theta2 - x1.xi2 / lam1, xi1 + xi2 / lam1,
               x1 + lam1 x2, lam1 lam2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .dynamics import Trajectory, nonlinearity
from .grid import SpatialGrid, fft2, free_propagate, ifft2, translate
from .state import VectorField

__all__ = [
    "CovarianceReport",
    "GroupElement",
    "OutOfResolution",
    "apply",
    "apply_trajectory",
    "dilate",
    "pde_residuals",
    "verify_covariance",
]


class OutOfResolution(ValueError):
    """The transformed state would not be resolved on the grid."""


@dataclass(frozen=True)
class GroupElement:
    theta: float = 0.0
    xi0: Tuple[float, float] = (0.0, 0.0)
    x0: Tuple[float, float] = (0.0, 0.0)
    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"scale must be positive, got {self.lam}")
        object.__setattr__(self, "xi0", tuple(float(v) for v in self.xi0))
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls()

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        """``self @ other`` acts as ``other`` first, then ``self``."""
        l1 = self.lam
        xi1, xi2 = np.array(self.xi0), np.array(other.xi0)
        x1, x2 = np.array(self.x0), np.array(other.x0)
        return GroupElement(theta=self.theta + other.theta - float(x1 @ xi2) / l1,
                            xi0=tuple(xi1 + xi2 / l1), x0=tuple(x1 + l1 * x2),
                            lam=l1 * other.lam)

    def inverse(self) -> "GroupElement":
        lam = 1.0 / self.lam
        xi = -self.lam * np.array(self.xi0)
        x0 = -np.array(self.x0) / self.lam
        theta = -self.theta - float(np.array(self.x0) @ np.array(self.xi0))
        return GroupElement(theta, tuple(xi), tuple(x0), lam)

    @property
    def dyadic_exponent(self) -> int:
        m = math.log2(self.lam)
        if abs(m - round(m)) > 1e-12:
            raise OutOfResolution(f"only dyadic scales 2^m are supported, got lam={self.lam}")
        return int(round(m))


def _relative_mass_outside(data, keep) -> float:
    tot = float(np.sum(np.abs(data) ** 2))
    if tot == 0:
        return 0.0
    return float(np.sum(np.abs(data[..., ~keep]) ** 2)) / tot


def _dilate_up(data: np.ndarray, grid: SpatialGrid, tol: float) -> np.ndarray:
    # v(x) = u(x/2) / 2: needs u negligible outside the central half box
    N = grid.N
    q = N // 4
    keep = np.zeros(grid.shape, dtype=bool)
    keep[q:N - q, q:N - q] = True
    if _relative_mass_outside(data, keep) > tol:
        raise OutOfResolution("dilation by 2 would push mass beyond the box")
    uh = fft2(data)
    big = np.zeros(data.shape[:-2] + (2 * N, 2 * N), dtype=complex)
    h = N // 2
    # lattice frequencies 0..h-1 and -h..-1 land in the corners of the padded spectrum
    big[..., :h, :h] = uh[..., :h, :h]
    big[..., :h, -h:] = uh[..., :h, -h:]
    big[..., -h:, :h] = uh[..., -h:, :h]
    big[..., -h:, -h:] = uh[..., -h:, -h:]
    fine = ifft2(big) * 4.0
    return 0.5 * fine[..., h:h + N, h:h + N]


def _dilate_down(data: np.ndarray, grid: SpatialGrid, tol: float) -> np.ndarray:
    # v(x) = 2 u(2x): exact subsampling, needs spectrum inside half the Nyquist box
    N = grid.N
    uh = fft2(data)
    kx, ky = grid.kmesh()
    half = 0.5 * grid.k_nyquist
    keep = (np.abs(kx) < half) & (np.abs(ky) < half)
    if _relative_mass_outside(uh, keep) > tol:
        raise OutOfResolution("contraction by 2 would exceed the frequency resolution")
    edge = np.ones(grid.shape, dtype=bool)
    edge[1:-1, 1:-1] = False
    if _relative_mass_outside(data, ~edge) > tol:
        raise OutOfResolution("state does not vanish at the box edge; contraction would wrap")
    out = np.zeros_like(data, dtype=complex)
    q = N // 4
    out[..., q:N - q, q:N - q] = 2.0 * data[..., ::2, ::2]
    return out


def dilate(data: np.ndarray, lam: float, grid: SpatialGrid, tol: float = 1e-10) -> np.ndarray:
    """``lam^-1 u(x / lam)`` for dyadic ``lam`` by spectral resampling."""
    m = GroupElement(lam=lam).dyadic_exponent
    out = np.asarray(data, dtype=complex)
    for _ in range(abs(m)):
        out = _dilate_up(out, grid, tol) if m > 0 else _dilate_down(out, grid, tol)
    return out


def _check_boost(data: np.ndarray, xi0, grid: SpatialGrid, tol: float) -> None:
    if not np.any(xi0):
        return
    grid.check_frequency(xi0)
    uh = fft2(data)
    kx, ky = grid.kmesh()
    kn = grid.k_nyquist
    keep = (np.abs(kx + xi0[0]) < kn) & (np.abs(ky + xi0[1]) < kn)
    if _relative_mass_outside(uh, keep) > tol:
        raise OutOfResolution(f"boost by {tuple(xi0)} shifts spectrum past the Nyquist frequency")


def apply(g: GroupElement, u: VectorField, t: float = 0.0, tol: float = 1e-10) -> VectorField:
    """``(T_g u)(t)`` given the snapshot ``u = u(t / lam^2)``."""
    grid = u.grid
    xi0 = np.array(g.xi0)
    data = dilate(u.data, g.lam, grid, tol) if g.lam != 1.0 else np.array(u.data, dtype=complex)
    _check_boost(data, xi0, grid, tol)
    shift = np.array(g.x0) + 2.0 * xi0 * t
    if np.any(shift):
        data = translate(data, shift, grid)
    phase = np.exp(1j * (g.theta - t * float(xi0 @ xi0)))
    if np.any(xi0):
        data = data * grid.plane_wave(xi0)
    return u.with_data(phase * data)


def apply_trajectory(g: GroupElement, traj: Trajectory, tol: float = 1e-10) -> Trajectory:
    """Image of a trajectory; snapshot ``u(s)`` becomes ``(T_g u)(lam^2 s)``."""
    out = Trajectory()
    for s, u in zip(traj.times, traj.states):
        t = g.lam**2 * s
        out.append(t, apply(g, u, t, tol))
    return out


def pde_residuals(traj: Trajectory) -> np.ndarray:
    """Relative residuals ``||i d_t v + Lap v - F(v)|| / ||F(v)||`` at interior snapshots.

    Time derivatives are centred differences of the pulled-back states
    ``w(t) = e^{-it Lap} v(t)``, using ``i d_t v + Lap v = e^{it Lap} i d_t w``;
    this keeps the free oscillation out of the difference quotient.
    """
    n = len(traj)
    if n < 3:
        raise ValueError(f"need at least 3 snapshots for centred differences, got {n}")
    grid = traj.grid
    t = np.asarray(traj.times)
    pulled = [free_propagate(s.data, -tt, grid) for tt, s in zip(t, traj.states)]
    res = np.empty(n - 2)
    for k in range(1, n - 1):
        dw = (pulled[k + 1] - pulled[k - 1]) / (t[k + 1] - t[k - 1])
        lhs = free_propagate(1j * dw, t[k], grid)
        F = nonlinearity(traj.states[k]).data
        fn = math.sqrt(float(np.sum(np.abs(F) ** 2)))
        rn = math.sqrt(float(np.sum(np.abs(lhs - F) ** 2)))
        res[k - 1] = rn / fn if fn > 0 else (0.0 if rn == 0 else math.inf)
    return res


def _fd_floor(traj: Trajectory) -> Optional[float]:
    # Delta t^2 / 6 * |d^3 w / dt^3| estimated by third differences, relative to |F|
    t = np.asarray(traj.times)
    n = len(t)
    if n < 4:
        return None
    h = np.diff(t)
    if np.max(np.abs(h - h[0])) > 1e-9 * abs(h[0]):
        return None
    grid = traj.grid
    w = [free_propagate(s.data, -tt, grid) for tt, s in zip(t, traj.states)]
    worst = 0.0
    for k in range(n - 3):
        d3 = (w[k + 3] - 3 * w[k + 2] + 3 * w[k + 1] - w[k]) / h[0] ** 3
        F = nonlinearity(traj.states[k + 1]).data
        fn = math.sqrt(float(np.sum(np.abs(F) ** 2)))
        if fn > 0:
            worst = max(worst, h[0] ** 2 / 6.0 * math.sqrt(float(np.sum(np.abs(d3) ** 2))) / fn)
    return worst


@dataclass
class CovarianceReport:
    element: GroupElement
    residual: float
    baseline: float
    residuals: np.ndarray
    baseline_residuals: np.ndarray
    fd_floor: Optional[float] = None

    @property
    def ratio(self) -> float:
        if self.baseline == 0:
            return 1.0 if self.residual == 0 else math.inf
        return self.residual / self.baseline


def verify_covariance(g: GroupElement, trajectory: Trajectory, tol: float = 1e-10) -> CovarianceReport:
    """Transform every snapshot by ``g`` and compare PDE residuals with the original run."""
    base = pde_residuals(trajectory)
    moved = apply_trajectory(g, trajectory, tol)
    res = pde_residuals(moved)
    return CovarianceReport(element=g, residual=float(res.max()), baseline=float(base.max()),
                            residuals=res, baseline_residuals=base, fd_floor=_fd_floor(moved))
