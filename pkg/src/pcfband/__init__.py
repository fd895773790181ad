"""Planewave band structure, corner exponents and convergence diagnostics for photonic-crystal fibres."""

__version__ = "0.1.0"
