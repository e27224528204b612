"""Kaya-identity decomposition and recomposition.

Emissions factor as F = P * (G/P) * (E/G) * (F/E); the electricity shares are
each source's generation divided by total generation.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError
from .panel import RawRecord


def kaya_decompose(record: RawRecord) -> np.ndarray:
    """Turn a raw record into the 7-vector of indicators, canonical order.

    Raises DegenerateInputError if a divisor is zero or a field is missing.
    """
    r = record
    fields = (r.population, r.gdp, r.energy, r.emissions,
              r.gen_fossil, r.gen_nuclear, r.gen_renewable)
    if any(f is None for f in fields):
        raise DegenerateInputError(
            f"{r.country} {r.year}: record incomplete, cannot decompose")
    gen_total = r.gen_fossil + r.gen_nuclear + r.gen_renewable
    if r.population == 0 or r.gdp == 0 or r.energy == 0 or gen_total == 0:
        raise DegenerateInputError(
            f"{r.country} {r.year}: zero divisor in Kaya decomposition")
    return np.array([
        r.population,
        r.gdp / r.population,
        r.energy / r.gdp,
        r.emissions / r.energy,
        r.gen_fossil / gen_total,
        r.gen_nuclear / gen_total,
        r.gen_renewable / gen_total,
    ])


def kaya_recompose(values: np.ndarray) -> float:
    """Product of the four Kaya factors: emissions in physical mass units.

    The share components are ignored; they describe the electricity mix, not
    the emissions level.
    """
    v = np.asarray(values, dtype=float)
    if v.shape[-1] != 7:
        raise ValueError(f"expected a 7-vector, got shape {v.shape}")
    return float(v[0] * v[1] * v[2] * v[3])


def kaya_recompose_rows(values: np.ndarray) -> np.ndarray:
    """Vectorized recomposition over a (T, 7) matrix -> (T,) emissions."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[1] != 7:
        raise ValueError(f"expected a (T, 7) matrix, got shape {v.shape}")
    return v[:, 0] * v[:, 1] * v[:, 2] * v[:, 3]
