"""Assembling user-facing forecasts in physical units.

Trajectories live in normalized units internally; this module denormalizes
them, recomposes the emissions column, and clamps reported share values into
[0, 1] at presentation time only, flagging every clamp in the metadata so
nothing is silently repaired.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .kaya import kaya_recompose_rows
from .normalize import Normalizer
from .variables import N_VARIABLES, SHARE_SLICE, VARIABLE_KEYS


def stable_hash(doc: dict) -> str:
    """Short content hash of a JSON-serializable document."""
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ForecastResult:
    country: str
    model_kind: str
    years: np.ndarray          # (T,) ints
    values: np.ndarray         # (T, 7) physical units, shares clamped
    emissions: np.ndarray      # (T,) recomposed F
    metadata: dict

    def to_dict(self) -> dict:
        return {
            "country": self.country,
            "model": self.model_kind,
            "years": [int(y) for y in self.years],
            "variables": {key: self.values[:, i].tolist()
                          for i, key in enumerate(VARIABLE_KEYS)},
            "emissions": self.emissions.tolist(),
            "metadata": self.metadata,
        }


def build_forecast_result(country: str, model_kind: str, years: np.ndarray,
                          states_norm: np.ndarray, normalizer: Normalizer,
                          params_hash: str, extra_metadata: dict | None = None) -> ForecastResult:
    """Denormalize, clamp shares for presentation, recompose emissions."""
    years = np.asarray(years)
    physical = normalizer.inverse(states_norm)
    if physical.shape != (len(years), N_VARIABLES):
        raise ValueError(f"states shape {physical.shape} does not match "
                         f"{len(years)} years")

    shares = physical[:, SHARE_SLICE]
    clamped_mask = (shares < 0.0) | (shares > 1.0)
    clamp_counts = clamped_mask.sum(axis=0)
    share_sum_dev = float(np.abs(shares.sum(axis=1) - 1.0).max()) if len(years) else 0.0
    values = physical.copy()
    values[:, SHARE_SLICE] = np.clip(shares, 0.0, 1.0)
    emissions = kaya_recompose_rows(physical)

    metadata = {
        "normalizer_hash": stable_hash(normalizer.to_dict()),
        "params_hash": params_hash,
        "clamped_cells": {VARIABLE_KEYS[SHARE_SLICE.start + i]: int(c)
                          for i, c in enumerate(clamp_counts)},
        "share_sum_max_deviation": share_sum_dev,
        "share_sum_warning": share_sum_dev > 1e-6,
    }
    if extra_metadata:
        metadata.update(extra_metadata)
    return ForecastResult(country, model_kind, years, values, emissions, metadata)
