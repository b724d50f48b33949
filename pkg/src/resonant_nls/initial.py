"""Initial-data families and seeded random ensembles.

Randomness always comes from ``numpy.random.Generator(PCG64(seed))`` so that
ensembles are reproducible from an integer seed.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from .grid import SpatialGrid
from .resonance import ModeBand
from .state import VectorField

__all__ = [
    "gaussian",
    "gaussian_state",
    "make_rng",
    "random_gaussian_state",
    "random_white_state",
]


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gaussian(grid: SpatialGrid, center=(0.0, 0.0), width: float = 1.0,
             amplitude: complex = 1.0, xi=(0.0, 0.0)) -> np.ndarray:
    """``amplitude * exp(i x.xi) * exp(-|x - center|^2 / (2 width^2))``."""
    X, Y = grid.mesh()
    r2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2
    out = amplitude * np.exp(-r2 / (2.0 * width**2))
    if xi[0] or xi[1]:
        out = out * np.exp(1j * (xi[0] * X + xi[1] * Y))
    return out


def gaussian_state(grid: SpatialGrid, J: int, modes: Iterable[int] = (0,), **kw) -> VectorField:
    """Same Gaussian profile placed in each listed mode."""
    u = VectorField.zeros(grid, J)
    prof = gaussian(grid, **kw)
    for j in modes:
        u.data[u.band.index(j)] = prof
    return u


def random_gaussian_state(grid: SpatialGrid, J: int, rng: np.random.Generator,
                          amplitude: float = 1.0, width_range=(0.8, 1.5),
                          center_spread: float = 1.5, xi_spread: float = 0.0,
                          modes: Optional[Sequence[int]] = None) -> VectorField:
    """One randomly placed, randomly phased Gaussian per mode.

    Amplitudes are uniform in ``[amplitude/2, amplitude]``; centres are
    uniform in ``[-center_spread, center_spread]^2``.
    """
    band = ModeBand(J)
    u = VectorField.zeros(grid, band)
    modes = list(band.modes) if modes is None else list(modes)
    for j in modes:
        amp = rng.uniform(0.5, 1.0) * amplitude * np.exp(2j * np.pi * rng.uniform())
        width = rng.uniform(*width_range)
        center = rng.uniform(-center_spread, center_spread, size=2)
        xi = rng.uniform(-xi_spread, xi_spread, size=2) if xi_spread else (0.0, 0.0)
        u.data[band.index(j)] = gaussian(grid, center, width, amp, xi)
    return u


def random_white_state(grid: SpatialGrid, J: int, rng: np.random.Generator,
                       scale: float = 1.0) -> VectorField:
    """Independent complex normal value at every point and mode (no smoothness)."""
    band = ModeBand(J)
    shape = (band.size,) + grid.shape
    data = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return VectorField(data, grid, band)
