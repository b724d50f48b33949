"""Measured functionals: compactness parameters, interaction Morawetz
quantities, scattering probes and bilinear Strichartz scaling fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .grid import (SpatialGrid, fft2, free_propagate, get_workers, gradient, half_derivative,
                   ifft2, lp_project, lp_symbol)
from .initial import make_rng
from .resonance import ModeBand
from .state import (DiagnosticsRecord, TimeNormAccumulator, VectorField, H1_WEIGHT,
                    density, energy, mass, norm)

__all__ = [
    "BilinearFit",
    "ScatterReport",
    "bilinear_norm",
    "bilinear_pair",
    "bilinear_probe",
    "extract_params",
    "interaction_morawetz",
    "make_record",
    "momentum_density",
    "morawetz_ceiling",
    "morawetz_kernel",
    "morawetz_lhs",
    "morawetz_lhs_integrand",
    "scattering_probe",
]


# ---------------------------------------------------------------------------
# almost-periodicity parameters


def extract_params(u: VectorField, fraction: float = 0.5):
    """Spatial centre, frequency centre and concentration scale of a state.

    ``N_scale`` is the radius of the smallest ball about the frequency
    centre holding ``fraction`` of the mass (reference radius 1). Lattice
    points at equal distance are pooled into shells; each shell's mass is
    credited half inside and half outside its radius, and the resulting
    cumulative curve is interpolated linearly. This keeps the scale
    continuous in the state and removes most of the lattice bias.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    g = u.grid
    rho = density(u)
    m = g.integrate(rho)
    if not m > 0:
        raise ValueError("cannot extract parameters of a zero-mass state")
    X, Y = g.mesh()
    xc = np.array([g.integrate(X * rho), g.integrate(Y * rho)]) / m

    spec = np.sum(np.abs(fft2(u.data)) ** 2, axis=0)
    kx, ky = g.kmesh()
    stot = spec.sum()
    xi = np.array([np.sum(kx * spec), np.sum(ky * spec)]) / stot

    dist = np.round(np.hypot(kx - xi[0], ky - xi[1]).ravel(), 12)
    order = np.argsort(dist, kind="stable")
    d = dist[order]
    radii, starts = np.unique(d, return_index=True)
    shell = np.add.reduceat(spec.ravel()[order], starts)
    c = np.cumsum(shell) - 0.5 * shell
    R = np.interp(fraction * stot, c, radii)
    return xc, xi, float(R)


# ---------------------------------------------------------------------------
# interaction Morawetz


def morawetz_kernel(grid: SpatialGrid):
    """Spectrum of the vector kernel ``z/|z|`` on the doubled (zero-padded) grid.

    Differences ``z`` range over ``(-2L, 2L)^2`` so the padded circular
    convolution equals the free-space (non-periodic) sum. Value 0 at ``z = 0``.
    """
    def build():
        n2 = 2 * grid.N
        m = np.fft.fftfreq(n2, d=1.0 / n2)  # 0..N-1, -N..-1
        z = m * grid.dx
        ZX, ZY = np.meshgrid(z, z, indexing="ij")
        r = np.hypot(ZX, ZY)
        with np.errstate(invalid="ignore", divide="ignore"):
            kx = np.where(r > 0, ZX / r, 0.0)
            ky = np.where(r > 0, ZY / r, 0.0)
        s = (n2, n2)
        return (sfft.rfft2(kx, s=s, workers=get_workers()),
                sfft.rfft2(ky, s=s, workers=get_workers()))
    return grid._cached("morawetz_kernel", build)


def momentum_density(w: VectorField):
    """``p = sum_j Im[conj(w_j) grad w_j]`` as ``(p_x, p_y)``.

    Written as ``a grad b - b grad a`` with ``w = a + ib`` and real
    gradients, so real states give exactly zero momentum.
    """
    a, b = w.data.real, w.data.imag
    ax, ay = (d.real for d in gradient(a, w.grid))
    bx, by = (d.real for d in gradient(b, w.grid))
    return np.sum(a * bx - b * ax, axis=0), np.sum(a * by - b * ay, axis=0)


def _lowpass_state(u: VectorField, cutoff) -> VectorField:
    if cutoff is None:
        return u
    return u.with_data(lp_project(u.data, int(cutoff), u.grid, mode="lowpass"))


def interaction_morawetz(u: VectorField, cutoff: Optional[int] = None) -> float:
    """``M = \\int\\int rho(y) (x-y)/|x-y| . p(x) dx dy`` for ``w = P_{<=cutoff} u``.

    Evaluated as an FFT convolution of ``rho`` with the kernel on a
    zero-padded grid.
    """
    w = _lowpass_state(u, cutoff)
    g = w.grid
    rho = density(w)
    px, py = momentum_density(w)
    n2 = 2 * g.N
    Kx, Ky = morawetz_kernel(g)
    rh = sfft.rfft2(rho, s=(n2, n2), workers=get_workers())
    cx = sfft.irfft2(Kx * rh, s=(n2, n2), workers=get_workers())[: g.N, : g.N]
    cy = sfft.irfft2(Ky * rh, s=(n2, n2), workers=get_workers())[: g.N, : g.N]
    return float(np.sum(px * cx + py * cy) * g.dx**4)


def morawetz_ceiling(u: VectorField, cutoff: Optional[int] = None) -> float:
    """``mass(w) * ||w||_{L^2 l^2} * ||grad w||_{L^2 l^2}``, an upper bound for ``|M|``."""
    w = _lowpass_state(u, cutoff)
    m = mass(w)
    gx, gy = gradient(w.data, w.grid)
    kin = w.grid.integrate(np.abs(gx) ** 2 + np.abs(gy) ** 2)
    return m * math.sqrt(m) * math.sqrt(kin)


def morawetz_lhs_integrand(u: VectorField, cutoff: Optional[int] = None) -> float:
    """``|| sum_j |nabla|^{1/2} |w_j|^2 ||^2_{L^2_x}``."""
    w = _lowpass_state(u, cutoff)
    hd = half_derivative(density(w), w.grid)
    return w.grid.integrate(hd**2)


def morawetz_lhs(trajectory, cutoff: Optional[int] = None) -> float:
    """Trapezoid time integral of :func:`morawetz_lhs_integrand` over the snapshots."""
    times = np.asarray(trajectory.times, dtype=float)
    if len(times) == 0:
        raise ValueError("empty trajectory")
    vals = np.array([morawetz_lhs_integrand(s, cutoff) for s in trajectory.states])
    if len(times) == 1:
        return 0.0
    return float(np.trapezoid(vals, times))


# ---------------------------------------------------------------------------
# diagnostics records


def make_record(t: float, u: VectorField, l4: TimeNormAccumulator, morawetz_cutoff=None,
                morawetz: bool = True, n_fraction: float = 0.5) -> DiagnosticsRecord:
    """One diagnostics row; centres are reported as 0 for zero-mass states."""
    m = mass(u)
    acc = l4.add_value(t, norm(u, 4, 0) ** 4)
    mw = interaction_morawetz(u, morawetz_cutoff) if morawetz else 0.0
    if m > 0:
        xc, xi, ns = extract_params(u, n_fraction)
    else:
        xc, xi, ns = (0.0, 0.0), (0.0, 0.0), 0.0
    return DiagnosticsRecord(t=float(t), mass=m, mass_h1=mass(u, H1_WEIGHT), energy=energy(u),
                             l4_accum=acc, morawetz=mw, x_center=tuple(map(float, xc)),
                             xi_center=tuple(map(float, xi)), N_scale=float(ns))


# ---------------------------------------------------------------------------
# scattering probe


@dataclass
class ScatterReport:
    """Outcome of :func:`scattering_probe`.

    ``gaps[n]`` is ``||v(t_n) - v(t_last)||_{L^2 h^1}`` for the pulled-back
    states ``v(t) = e^{-it Laplacian} u(t)``; ``consecutive_gaps[n]`` compares
    snapshots ``n`` and ``n + 1``.
    """

    times: np.ndarray
    l4_running: np.ndarray
    window_edges: np.ndarray
    window_values: np.ndarray
    gaps: np.ndarray
    consecutive_gaps: np.ndarray
    final_gap: float
    tail_fraction: float
    onset: float
    threshold: float
    pairwise: Optional[np.ndarray] = None

    @property
    def total(self) -> float:
        return float(self.l4_running[-1])

    @property
    def small_data(self) -> bool:
        return self.tail_fraction < self.threshold


def _h1_norm_array(data: np.ndarray, grid: SpatialGrid) -> float:
    J = (data.shape[0] - 1) // 2
    j = np.arange(-J, J + 1, dtype=float)
    w = (1.0 + j * j)[:, None, None]
    return math.sqrt(float(np.sum(w * np.abs(data) ** 2)) * grid.dx**2)


def scattering_probe(trajectory, windows: int = 8, threshold: float = 0.01,
                     pairwise: bool = False) -> ScatterReport:
    """Scattering diagnostics for a recorded trajectory (at least 8 snapshots).

    The L^4_{t,x} l^2 integral is accumulated by the trapezoid rule; the
    window values are its increments over ``windows`` equal time windows, and
    ``tail_fraction`` is the last window's share of the total (0 when the
    total vanishes). The small-data verdict is ``tail_fraction < threshold``.
    ``final_gap`` is the pulled-back gap across the last window. ``onset`` is
    the earliest snapshot time after which ``gaps`` never increases.
    """
    n = len(trajectory)
    if n < 8:
        raise ValueError(f"scattering probe needs at least 8 snapshots, got {n}")
    times = np.asarray(trajectory.times, dtype=float)
    grid = trajectory.grid
    f = np.array([norm(s, 4, 0) ** 4 for s in trajectory.states])
    running = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(times) * (f[1:] + f[:-1]))])
    edges = np.linspace(times[0], times[-1], windows + 1)
    at_edges = np.interp(edges, times, running)
    wv = np.diff(at_edges)
    total = running[-1]
    tail = float(wv[-1] / total) if total > 0 else 0.0

    pulled = [free_propagate(s.data, -t, grid) for t, s in zip(times, trajectory.states)]
    last = pulled[-1]
    gaps = np.array([_h1_norm_array(p - last, grid) for p in pulled])
    cons = np.array([_h1_norm_array(pulled[i + 1] - pulled[i], grid) for i in range(n - 1)])
    k_last_window = int(np.searchsorted(times, edges[-2], side="left"))
    final_gap = float(gaps[min(k_last_window, n - 1)])

    # earliest index beyond which gaps are nonincreasing
    k = n - 1
    while k > 0 and gaps[k - 1] >= gaps[k]:
        k -= 1
    pw = None
    if pairwise:
        pw = np.zeros((n, n))
        for a in range(n):
            for b in range(a + 1, n):
                pw[a, b] = pw[b, a] = _h1_norm_array(pulled[a] - pulled[b], grid)
    return ScatterReport(times=times, l4_running=running, window_edges=edges, window_values=wv,
                         gaps=gaps, consecutive_gaps=cons, final_gap=final_gap, tail_fraction=tail,
                         onset=float(times[k]), threshold=threshold, pairwise=pw)


# ---------------------------------------------------------------------------
# bilinear Strichartz scaling


@dataclass
class BilinearFit:
    """Log-log fit of normalised bilinear norms against ``M/N``."""

    ratios: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    r2: float
    slope_stderr: float
    p: float
    q: float
    extra: dict = field(default_factory=dict)


def _localized_shell_data(grid: SpatialGrid, band: ModeBand, i: int, width: float,
                          rng: np.random.Generator, mode: str = "shell") -> np.ndarray:
    # white noise under a narrow Gaussian window, then projected to the shell
    shape = (band.size,) + grid.shape
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    env = np.exp(-grid.r2 / (2.0 * width**2))
    raw = noise * env
    return ifft2(fft2(raw) * lp_symbol(grid.kabs, i, mode))


def _l2l2(data: np.ndarray, grid: SpatialGrid) -> float:
    return math.sqrt(float(np.sum(np.abs(data) ** 2)) * grid.dx**2)


def bilinear_norm(uh0: np.ndarray, vh0: np.ndarray, grid: SpatialGrid, times: np.ndarray,
                  p: float, q: float, sign: int = 1) -> float:
    """``|| ||e^{it Lap} u0||_{l^2} ||e^{+-it Lap} v0||_{l^2} ||_{L^p_t L^q_x}`` over ``times``.

    ``uh0``/``vh0`` are unnormalised FFTs of the mode stacks. The time norm
    is a trapezoid integral for finite ``p`` and a maximum for ``p = inf``.
    """
    vals = np.empty(len(times))
    for n, t in enumerate(times):
        prop = np.exp(-1j * grid.k2 * t)
        uu = np.sqrt(np.sum(np.abs(ifft2(uh0 * prop)) ** 2, axis=0))
        vprop = prop if sign > 0 else np.conj(prop)
        vv = np.sqrt(np.sum(np.abs(ifft2(vh0 * vprop)) ** 2, axis=0))
        prod = uu * vv
        if math.isinf(q):
            vals[n] = prod.max()
        else:
            vals[n] = (float(np.sum(prod**q)) * grid.dx**2) ** (1.0 / q)
    if math.isinf(p):
        return float(vals.max())
    return float(np.trapezoid(vals**p, times)) ** (1.0 / p)


def _fit_loglog(x, y):
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = max(len(lx) - 2, 1)
    s2 = ss_res / dof
    se = math.sqrt(s2 / float(np.sum((lx - lx.mean()) ** 2)))
    return float(coef[0]), float(coef[1]), r2, se


def _conjugate_exponent(p: float) -> float:
    return math.inf if p == 1 else (1.0 if math.isinf(p) else p / (p - 1.0))


def bilinear_pair(i_high: int, i_low: int, p: float = 2.0, q: Optional[float] = None,
                  grid: Optional[SpatialGrid] = None, J: int = 1, window: float = 0.03,
                  n_times: int = 61, seed: int = 0, sign: int = 1) -> float:
    """Normalised bilinear norm for a single pair of shells (``i_low`` may equal ``i_high``).

    Same data construction as :func:`bilinear_probe`; returns the measured
    norm divided by ``||u0|| ||v0||``.
    """
    q = _conjugate_exponent(p) if q is None else q
    grid = SpatialGrid(4.0, 512) if grid is None else grid
    band = ModeBand(J)
    rng = make_rng(seed)
    width = 2.0 ** (-i_high)
    u0 = _localized_shell_data(grid, band, i_high, width, rng)
    v0 = _localized_shell_data(grid, band, i_low, width, rng)
    times = np.linspace(0.0, window, n_times)
    return bilinear_norm(fft2(u0), fft2(v0), grid, times, p, q, sign) / (_l2l2(u0, grid) * _l2l2(v0, grid))


def bilinear_probe(i_high: int, i_lows: Sequence[int], p: float = 2.0, q: Optional[float] = None,
                   grid: Optional[SpatialGrid] = None, J: int = 1, window: float = 0.03,
                   n_times: int = 61, seed: int = 0, sign: int = 1) -> BilinearFit:
    """Fit the decay of the bilinear free-evolution norm in ``M/N``.

    Data ``u0`` sits on the dyadic shell ``N = 2^i_high`` and ``v0`` on
    ``M = 2^i_low`` for each entry of ``i_lows``; both are random (complex
    white noise per mode under a Gaussian window of width ``2^-i_high``,
    then shell-projected) and colocated at the origin. The measured norm
    over ``t in [0, window]`` is divided by ``||u0|| ||v0||`` and a
    least-squares line is fitted to ``log(value)`` against ``log(M/N)``.

    ``p`` and ``q`` must satisfy ``1/p + 1/q = 1``. The fit needs at least
    four ratios spanning at least three octaves.
    """
    if q is None:
        q = _conjugate_exponent(p)
    inv = (0.0 if math.isinf(p) else 1.0 / p) + (0.0 if math.isinf(q) else 1.0 / q)
    if abs(inv - 1.0) > 1e-12:
        raise ValueError(f"exponents must satisfy 1/p + 1/q = 1, got p={p}, q={q}")
    i_lows = list(i_lows)
    if len(set(i_lows)) < 4 or max(i_lows) - min(i_lows) < 3:
        raise ValueError(f"need >= 4 distinct low shells spanning >= 3 octaves, got {i_lows}")
    if min(i_lows) < 0 or max(i_lows) >= i_high:
        raise ValueError("low shells must satisfy 0 <= i_low < i_high")
    if grid is None:
        grid = SpatialGrid(4.0, 512)
    top = 2.0 ** (i_high + 1)
    if top >= grid.k_nyquist:
        raise ValueError(f"shell 2^{i_high} (support up to {top:g}) not resolved; Nyquist {grid.k_nyquist:.4g}")
    ratios = np.array([2.0 ** (il - i_high) for il in i_lows])
    band = ModeBand(J)
    rng = make_rng(seed)
    width = 2.0 ** (-i_high)
    u0 = _localized_shell_data(grid, band, i_high, width, rng)
    uh0 = fft2(u0)
    nu = _l2l2(u0, grid)
    times = np.linspace(0.0, window, n_times)
    vals = []
    for il in i_lows:
        v0 = _localized_shell_data(grid, band, il, width, rng)
        nv = _l2l2(v0, grid)
        vals.append(bilinear_norm(uh0, fft2(v0), grid, times, p, q, sign) / (nu * nv))
    vals = np.array(vals)
    slope, intercept, r2, se = _fit_loglog(ratios, vals)
    return BilinearFit(ratios=ratios, values=vals, slope=slope, intercept=intercept, r2=r2,
                       slope_stderr=se, p=p, q=q,
                       extra={"i_high": i_high, "i_lows": i_lows, "window": window,
                              "n_times": n_times, "seed": seed, "J": J,
                              "L": grid.L, "N": grid.N})
