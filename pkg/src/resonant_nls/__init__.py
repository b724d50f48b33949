"""Pseudospectral simulation and measurement toolkit for the cubic resonant
Schroedinger system on R^2 x Z."""

__version__ = "0.1.0"
