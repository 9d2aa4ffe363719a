"""Generalized Ruijsenaars-Schneider systems from multiplicative quiver varieties."""
from __future__ import annotations

__version__ = "0.1.0"
