"""Self-contained model bundles: everything needed to forecast, run
scenarios and fine-tune a country's model travels in one JSON document.

The bundle embeds the physical panel it was trained on; forecast, scenario
and fine-tune consumers then need no side-channel data files. Floats are
written with Python's shortest round-trip repr, so serialize/parse is exact
and repeated runs produce identical bytes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .forecast import ForecastResult, build_forecast_result, stable_hash
from .normalize import Normalizer
from .ode import MlpParams, integrate
from .panel import Panel
from .training import TrainConfig
from .var import VarModel, var_forecast
from .variables import N_VARIABLES, VARIABLE_KEYS

BUNDLE_FORMAT_VERSION = 1


@dataclass
class ModelBundle:
    country: str
    panel: Panel               # physical units, as ingested
    train_end: int
    normalizer: Normalizer
    node: MlpParams
    var: Optional[VarModel]    # absent when the training window has gaps
    config: TrainConfig

    def to_dict(self) -> dict:
        return {
            "format_version": BUNDLE_FORMAT_VERSION,
            "country": self.country,
            "train_end": self.train_end,
            "panel": {
                "years": [int(y) for y in self.panel.years],
                "values": [[None if not self.panel.mask[i, j] else float(self.panel.values[i, j])
                            for j in range(N_VARIABLES)]
                           for i in range(len(self.panel.years))],
            },
            "normalizer": self.normalizer.to_dict(),
            "node": self.node.to_dict(),
            "var": self.var.to_dict() if self.var is not None else None,
            "config": self.config.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelBundle":
        if doc.get("format_version") != BUNDLE_FORMAT_VERSION:
            raise ValueError(f"unsupported bundle format {doc.get('format_version')!r}")
        years = np.asarray(doc["panel"]["years"], dtype=int)
        raw = doc["panel"]["values"]
        values = np.array([[np.nan if cell is None else float(cell) for cell in row]
                           for row in raw])
        mask = np.array([[cell is not None for cell in row] for row in raw])
        panel = Panel(doc["country"], years, values, mask, "physical")
        return cls(country=doc["country"],
                   panel=panel,
                   train_end=int(doc["train_end"]),
                   normalizer=Normalizer.from_dict(doc["normalizer"]),
                   node=MlpParams.from_dict(doc["node"]),
                   var=(VarModel.from_dict(doc["var"])
                        if doc.get("var") is not None else None),
                   config=TrainConfig.from_dict(doc["config"]))

    # -- derived views ------------------------------------------------------

    def normalized_panel(self) -> Panel:
        return Panel(self.country, np.asarray(self.panel.years).copy(),
                     self.normalizer.forward(self.panel.values),
                     self.panel.mask.copy(), "normalized")

    def params_hash(self) -> str:
        return stable_hash(self.node.to_dict())

    def forecast_years(self, horizon: int) -> np.ndarray:
        """Year grid from the end of the training window out to the horizon."""
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        return np.arange(self.train_end, self.train_end + horizon + 1)

    def train_end_state(self) -> np.ndarray:
        """Normalized state at the last training year (must be observed)."""
        norm = self.normalized_panel()
        idx = int(np.searchsorted(np.asarray(self.panel.years), self.train_end))
        row = norm.values[idx]
        if not np.all(np.isfinite(row)):
            raise ValueError(f"{self.country}: state at {self.train_end} is incomplete")
        return row

    def forecast(self, model_kind: str, horizon: int,
                 version: Optional[int] = None) -> ForecastResult:
        """Forecast from the last training-window observation.

        Row 0 is that observed state; rows 1..horizon are model output.
        """
        if model_kind not in ("node", "var"):
            raise ValueError(f"unknown model kind {model_kind!r}")
        if model_kind == "var" and self.var is None:
            raise ValueError(f"{self.country}: no VAR baseline in this bundle "
                             "(training window had missing observations)")
        years = self.forecast_years(horizon)
        x0 = self.train_end_state()
        if model_kind == "node":
            times = self.normalizer.year_to_time(years)
            traj = integrate(self.node, x0, times, self.config.substeps_per_year)
            states = traj.states
            params_hash = self.params_hash()
        elif model_kind == "var":
            norm = self.normalized_panel()
            idx = int(np.searchsorted(np.asarray(self.panel.years), self.train_end))
            history = norm.values[idx - self.var.order + 1:idx + 1]
            steps = var_forecast(self.var, history, horizon)
            states = np.vstack([x0[None, :], steps])
            params_hash = stable_hash(self.var.to_dict())
        extra = {"train_end": self.train_end}
        if version is not None:
            extra["version"] = version
        return build_forecast_result(self.country, model_kind, years, states,
                                     self.normalizer, params_hash, extra)


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    Path(path).write_text(json.dumps(bundle.to_dict(), indent=2) + "\n")


def load_bundle(path: str | Path) -> ModelBundle:
    return ModelBundle.from_dict(json.loads(Path(path).read_text()))
