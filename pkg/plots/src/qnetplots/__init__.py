"""Deterministic chart rendering for qnetgec result CSVs."""

from __future__ import annotations

__version__ = "0.1.0"
