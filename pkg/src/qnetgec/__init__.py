"""Exact Pauli-frame Monte Carlo simulation of entanglement distribution
with global error correction on 2D network lattices."""

from __future__ import annotations

__version__ = "0.1.0"
