"""Resonance sets of the cubic resonant system on the integer lattice.

For a target mode ``j`` the resonance set consists of integer triples
``(j1, j2, j3)`` with

    j1 - j2 + j3 = j    and    j1**2 - j2**2 + j3**2 = j**2.

On ``Z`` these two constraints force ``{j1, j3} = {j, j2}``, which is what
makes the coupled nonlinearity collapse to ``(2 rho - |u_j|^2) u_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple

__all__ = [
    "MAX_INDEX",
    "ModeBand",
    "ResonanceTriple",
    "closed_form_resonances",
    "enumerate_resonances",
    "japanese_sq",
    "kernel_sum",
]

# squares of indices must stay well inside native integer range
MAX_INDEX = 2**15


class ResonanceTriple(NamedTuple):
    j1: int
    j2: int
    j3: int

    def is_resonant(self, j: int) -> bool:
        return (self.j1 - self.j2 + self.j3 == j
                and self.j1 * self.j1 - self.j2 * self.j2 + self.j3 * self.j3 == j * j)


@dataclass(frozen=True)
class ModeBand:
    """Symmetric truncation ``|j| <= J`` of the mode lattice."""

    J: int

    def __post_init__(self):
        if not isinstance(self.J, int) or isinstance(self.J, bool):
            raise TypeError(f"band radius must be an int, got {type(self.J).__name__}")
        if self.J < 0:
            raise ValueError(f"band radius must be >= 0, got {self.J}")
        if self.J > MAX_INDEX:
            raise ValueError(f"band radius {self.J} exceeds supported limit {MAX_INDEX}")

    @property
    def size(self) -> int:
        return 2 * self.J + 1

    @property
    def modes(self) -> range:
        return range(-self.J, self.J + 1)

    def index(self, j: int) -> int:
        """Position of mode ``j`` along the mode axis of a state array."""
        self.check(j)
        return j + self.J

    def check(self, j: int) -> None:
        if abs(j) > self.J:
            raise ValueError(f"target mode {j} lies outside the band |j| <= {self.J}")


def _as_band(band) -> ModeBand:
    return band if isinstance(band, ModeBand) else ModeBand(int(band))


def enumerate_resonances(j: int, band) -> List[ResonanceTriple]:
    """All in-band resonant triples for ``j``, found by exhaustive search.

    Loops over ``(j1, j2)``; ``j3`` is fixed by the linear constraint and
    the quadratic one is checked in exact integer arithmetic. Triples come
    out in lexicographic order.
    """
    band = _as_band(band)
    band.check(j)
    J = band.J
    out = []
    for j1 in range(-J, J + 1):
        for j2 in range(-J, J + 1):
            j3 = j - j1 + j2
            if -J <= j3 <= J and j1 * j1 - j2 * j2 + j3 * j3 == j * j:
                out.append(ResonanceTriple(j1, j2, j3))
    return out


def closed_form_resonances(j: int, band) -> List[ResonanceTriple]:
    """The resonance set from its explicit description ``{(j,k,k)} U {(k,k,j)}``."""
    band = _as_band(band)
    band.check(j)
    triples = {ResonanceTriple(j, k, k) for k in band.modes}
    triples.update(ResonanceTriple(k, k, j) for k in band.modes)
    return sorted(triples)


def japanese_sq(k: int) -> int:
    """``<k>^2 = 1 + k^2``."""
    return 1 + k * k


def kernel_sum(j: int, band) -> float:
    """``<j>^2 * sum over R(j) of <j1>^-2 <j2>^-2 <j3>^-2`` restricted to the band.

    Uses the closed-form triple list, which keeps ``J = 10**4`` cheap.
    Terms are accumulated with ``math.fsum``.
    """
    band = _as_band(band)
    band.check(j)
    wj = japanese_sq(j)
    terms = [
        wj / (japanese_sq(a) * japanese_sq(b) * japanese_sq(c))
        for a, b, c in closed_form_resonances(j, band)
    ]
    return math.fsum(terms)
