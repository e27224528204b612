"""Forecast scoring and the multi-country, multi-horizon comparison run.

For each (country, horizon) cell the runner splits the panel, normalizes on
the training window only, fits both model kinds on the training window,
forecasts the held-out years and scores them in normalized units. Results
come back as tidy rows plus quartile summaries for boxplot rendering.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ExperimentError, KayaNodeError
from .normalize import normalize_panel
from .ode import MlpParams, integrate
from .panel import Panel, split_panel
from .training import TrainConfig, TrainingPanel, train, training_panel
from .var import var_fit, var_forecast
from .variables import N_VARIABLES

MODEL_KINDS = ("node", "var")

RESULT_CSV_HEADER = ("country", "horizon", "model", "mse_total",
                     *(f"mse_var_{i}" for i in range(1, 8)))


@dataclass
class ExperimentSpec:
    countries: list[str]
    horizons: list[int]
    models: tuple[str, ...] = MODEL_KINDS
    train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0

    def __post_init__(self):
        if not self.countries:
            raise ValueError("country list must be non-empty")
        if not self.horizons or any(h < 1 for h in self.horizons):
            raise ValueError("horizons must be positive")
        bad = [m for m in self.models if m not in MODEL_KINDS]
        if bad:
            raise ValueError(f"unknown model kinds: {bad}")

    def to_dict(self) -> dict:
        return {"countries": list(self.countries),
                "horizons": [int(h) for h in self.horizons],
                "models": list(self.models),
                "train": self.train.to_dict(),
                "seed": self.seed}

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentSpec":
        return cls(countries=list(doc["countries"]),
                   horizons=[int(h) for h in doc["horizons"]],
                   models=tuple(doc.get("models", MODEL_KINDS)),
                   train=TrainConfig.from_dict(doc.get("train", {})),
                   seed=int(doc.get("seed", 0)))


@dataclass
class BoxplotStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    n: int

    def to_dict(self) -> dict:
        return {"min": self.minimum, "q1": self.q1, "median": self.median,
                "q3": self.q3, "max": self.maximum, "n": self.n}


@dataclass
class CellResult:
    country: str
    horizon: int
    model: str
    mse_total: float
    mse_per_variable: np.ndarray


def mse(forecast: np.ndarray, truth: np.ndarray,
        mask: Optional[np.ndarray] = None) -> tuple[float, np.ndarray]:
    """Masked mean squared error: total plus per-variable column means.

    A column with no observed cells gets NaN in the per-variable vector.
    """
    forecast = np.asarray(forecast, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if forecast.shape != truth.shape:
        raise ValueError(f"shape mismatch: {forecast.shape} vs {truth.shape}")
    if mask is None:
        mask = np.ones(forecast.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != forecast.shape:
        raise ValueError(f"mask shape {mask.shape} does not match {forecast.shape}")
    if not mask.any():
        raise ValueError("mask selects no cells")

    sq = np.zeros_like(forecast)
    sq[mask] = (forecast[mask] - truth[mask]) ** 2
    total = float(sq[mask].mean())
    counts = mask.sum(axis=0)
    with np.errstate(invalid="ignore"):
        per_variable = np.where(counts > 0, sq.sum(axis=0) / np.maximum(counts, 1), np.nan)
    return total, per_variable


def boxplot_stats(values: Sequence[float]) -> BoxplotStats:
    """Five-number summary; quartiles interpolate linearly between order
    statistics (numpy's default convention)."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty list")
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return BoxplotStats(float(arr.min()), float(q1), float(med), float(q3),
                        float(arr.max()), int(arr.size))


def node_validation_mse(params: MlpParams, panel_norm: Panel, times: np.ndarray,
                        train_end: int, substeps_per_year: int,
                        onehot: Optional[np.ndarray] = None) -> tuple[float, np.ndarray]:
    """Integrate from the first row over the full grid; score observed cells
    in years after train_end."""
    x0 = panel_norm.values[0]
    traj = integrate(params, x0, times, substeps_per_year, onehot)
    years = np.asarray(panel_norm.years)
    val_mask = panel_norm.mask & (years > train_end)[:, None]
    return mse(traj.states, panel_norm.values, val_mask)


def run_experiment(spec: ExperimentSpec, panels: dict[str, Panel]) -> list[CellResult]:
    """Split, normalize, fit and score every (country, horizon, model) cell."""
    missing = [c for c in spec.countries if c not in panels]
    if missing:
        raise ValueError(f"countries not present in panels: {missing}")

    results: list[CellResult] = []
    for ci, country in enumerate(spec.countries):
        panel = panels[country]
        for horizon in spec.horizons:
            try:
                train_p, valid_p = split_panel(panel, horizon)
            except ValueError as exc:
                raise ExperimentError(country, horizon, "-", str(exc)) from exc
            train_end = int(train_p.years[-1])
            norm_full, normalizer = normalize_panel(panel, train_end)
            times = normalizer.year_to_time(np.asarray(norm_full.years))
            cut = len(train_p.years)
            norm_train = Panel(country, norm_full.years[:cut].copy(),
                               norm_full.values[:cut].copy(),
                               norm_full.mask[:cut].copy(), "normalized")

            for model in spec.models:
                try:
                    if model == "node":
                        cfg = TrainConfig(**{**spec.train.to_dict(),
                                             "seed": spec.seed + ci})
                        tp = TrainingPanel(norm_train, times[:cut])
                        report = train([tp], cfg)
                        total, per_var = node_validation_mse(
                            report.params, norm_full, times, train_end,
                            cfg.substeps_per_year)
                    else:
                        if not norm_train.mask.all():
                            raise ValueError("VAR baseline requires a complete "
                                             "training window")
                        model_fit = var_fit(norm_train.values, order=1)
                        fc = var_forecast(model_fit, norm_train.values[-1:], horizon)
                        total, per_var = mse(fc, norm_full.values[cut:],
                                             norm_full.mask[cut:])
                except KayaNodeError as exc:
                    raise ExperimentError(country, horizon, model, str(exc)) from exc
                except ValueError as exc:
                    raise ExperimentError(country, horizon, model, str(exc)) from exc
                results.append(CellResult(country, horizon, model, total, per_var))
    return results


def results_to_csv(results: Sequence[CellResult]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RESULT_CSV_HEADER)
    for r in results:
        writer.writerow([r.country, r.horizon, r.model, repr(r.mse_total),
                         *(repr(float(v)) for v in r.mse_per_variable)])
    return out.getvalue()


def boxplot_summary(results: Sequence[CellResult]) -> dict:
    """Quartile summaries keyed by horizon then model kind."""
    grouped: dict[int, dict[str, list[float]]] = {}
    for r in results:
        grouped.setdefault(r.horizon, {}).setdefault(r.model, []).append(r.mse_total)
    return {str(h): {m: boxplot_stats(vals).to_dict() for m, vals in sorted(models.items())}
            for h, models in sorted(grouped.items())}
