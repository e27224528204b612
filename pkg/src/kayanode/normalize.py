"""Per-variable affine normalization and the calendar-year time axis.

Each variable is mapped so the training-window observed minimum goes to 0 and
the maximum to 1 (validation values may land outside [0, 1]). Years map
affinely so the first panel year is model time 0.0 and the last is 1.0.
Training-window-only statistics keep validation data out of the fit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .panel import Panel
from .variables import N_VARIABLES, VARIABLE_KEYS


@dataclass
class Normalizer:
    """Affine (offset, scale) pairs per variable plus the time axis pair.

    forward(x) = (x - offset) / scale, and scale > 0 always; a variable that
    is constant on the training window gets scale 1 and offset equal to the
    constant, leaving it flat at zero.
    """
    offsets: np.ndarray    # (7,)
    scales: np.ndarray     # (7,)
    time_offset: float     # first panel year
    time_scale: float      # last panel year - first panel year

    def __post_init__(self):
        self.offsets = np.asarray(self.offsets, dtype=float)
        self.scales = np.asarray(self.scales, dtype=float)
        if self.offsets.shape != (N_VARIABLES,) or self.scales.shape != (N_VARIABLES,):
            raise ValueError("normalizer needs one (offset, scale) pair per variable")
        if not np.all(self.scales > 0):
            raise ValueError("normalizer scales must be positive")
        if not self.time_scale > 0:
            raise ValueError("time scale must be positive")

    def forward(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.offsets) / self.scales

    def inverse(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=float) * self.scales + self.offsets

    def forward_variable(self, index: int, value):
        return (value - self.offsets[index]) / self.scales[index]

    def inverse_variable(self, index: int, value):
        return value * self.scales[index] + self.offsets[index]

    def year_to_time(self, year):
        return (np.asarray(year, dtype=float) - self.time_offset) / self.time_scale

    def time_to_year(self, t):
        return np.asarray(t, dtype=float) * self.time_scale + self.time_offset

    def to_dict(self) -> dict:
        doc = {key: {"offset": float(self.offsets[i]), "scale": float(self.scales[i])}
               for i, key in enumerate(VARIABLE_KEYS)}
        doc["time"] = {"offset": float(self.time_offset), "scale": float(self.time_scale)}
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Normalizer":
        offsets = np.array([doc[key]["offset"] for key in VARIABLE_KEYS])
        scales = np.array([doc[key]["scale"] for key in VARIABLE_KEYS])
        return cls(offsets, scales, doc["time"]["offset"], doc["time"]["scale"])


def normalize_panel(panel: Panel, train_end: int) -> tuple[Panel, Normalizer]:
    """Normalize a physical panel using statistics from years <= train_end.

    Returns the whole panel in normalized units together with the fitted
    Normalizer. Requires at least two observed points per variable inside the
    training window.
    """
    years = np.asarray(panel.years)
    if not years[0] <= train_end <= years[-1]:
        raise ValueError(f"train_end {train_end} outside panel range "
                         f"[{years[0]}, {years[-1]}]")
    window = years <= train_end

    offsets = np.empty(N_VARIABLES)
    scales = np.empty(N_VARIABLES)
    for v in range(N_VARIABLES):
        observed = panel.values[window, v][panel.mask[window, v]]
        if observed.size < 2:
            raise ValueError(f"{panel.country}: variable {VARIABLE_KEYS[v]} has "
                             f"{observed.size} observed training points, need >= 2")
        lo, hi = observed.min(), observed.max()
        if hi > lo:
            offsets[v], scales[v] = lo, hi - lo
        else:
            offsets[v], scales[v] = lo, 1.0

    if len(years) < 2:
        raise ValueError(f"{panel.country}: need at least 2 years to set a time axis")
    normalizer = Normalizer(offsets, scales, float(years[0]), float(years[-1] - years[0]))
    normalized = Panel(panel.country, years.copy(),
                       normalizer.forward(panel.values), panel.mask.copy(),
                       units="normalized")
    return normalized, normalizer
