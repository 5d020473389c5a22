"""Numerical tolerances used across the package, kept in one place."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Single source of truth for the numerical thresholds of the toolkit.

    hermiticity / trace guard density-matrix validation, psd bounds the most
    negative admissible eigenvalue, unitarity applies to constructed gates,
    and fixed_point_residual is the acceptance bound for steady states.
    """

    hermiticity: float = 1e-12
    trace: float = 1e-12
    psd: float = 1e-10
    unitarity: float = 1e-12
    caching_unitarity: float = 1e-11
    kraus_completeness: float = 1e-11
    fixed_point_residual: float = 1e-9
    power_iteration_step: float = 1e-12
    power_iteration_state: float = 1e-10
    power_iteration_cap: int = 4 * 10 ** 6


DEFAULT_TOL = Tolerances()
