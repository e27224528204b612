"""What-if scenarios on a trained model.

Two mechanisms:

* ``pinned`` - one indicator follows a user-supplied trajectory. At every
  solver substage the pinned component of the state handed to the dynamics
  network is overwritten with the interpolated scenario value and the pinned
  derivative is discarded, so the output column reproduces the scenario
  exactly while the other six variables evolve under the learned dynamics.
* ``augmented`` - hypothetical future observations are appended to the
  training panel and the model is fine-tuned for a few epochs, nudging the
  forecast toward the assumed futures without re-learning from scratch.

Anchors and observations are given in physical units and converted through
the model's stored normalizer. No extrapolation beyond the anchor range:
fabricating policy inputs silently would be worse than an error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .kaya import kaya_recompose_rows
from .normalize import Normalizer
from .ode import MlpParams, Trajectory, mlp_forward, rk4_step, share_project
from .panel import Panel
from .training import TrainConfig, TrainingPanel, fine_tune
from .evaluation import node_validation_mse
from .variables import N_VARIABLES, SHARE_SLICE, Variable

SCENARIO_MODES = ("pinned", "augmented")

#: Post-hoc tolerance on the physical share sum before a warning is flagged.
SHARE_SUM_WARN_TOLERANCE = 1e-6


@dataclass
class ScenarioSpec:
    """A pinned indicator trajectory or a set of hypothetical observations.

    Anchor and observation values are physical units; years are calendar
    years. Pinned mode needs at least two strictly increasing anchors;
    augmented mode needs at least one observation.
    """
    mode: str
    variable: Optional[Variable] = None
    anchors: list[tuple[int, float]] = field(default_factory=list)
    interpolation: str = "linear"
    observations: list[tuple[int, Variable, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in SCENARIO_MODES:
            raise ValueError(f"mode must be one of {SCENARIO_MODES}, got {self.mode!r}")
        if self.interpolation != "linear":
            raise ValueError("only linear interpolation is supported")
        if self.mode == "pinned":
            if self.variable is None:
                raise ValueError("pinned mode needs a variable")
            self.variable = Variable(self.variable)
            if len(self.anchors) < 2:
                raise ValueError("pinned mode needs at least 2 anchors")
            years = [y for y, _ in self.anchors]
            if any(b <= a for a, b in zip(years, years[1:])):
                raise ValueError("anchor years must be strictly increasing")
            if self.variable in (Variable.SHARE_FOSSIL, Variable.SHARE_NUCLEAR,
                                 Variable.SHARE_RENEWABLE):
                if any(not 0.0 <= v <= 1.0 for _, v in self.anchors):
                    raise ValueError("pinned share values must lie in [0, 1]")
        else:
            if not self.observations:
                raise ValueError("augmented mode needs at least 1 observation")
            self.observations = [(int(y), Variable(v), float(x))
                                 for y, v, x in self.observations]

    def to_dict(self) -> dict:
        doc: dict = {"mode": self.mode}
        if self.mode == "pinned":
            doc["variable"] = self.variable.key
            doc["anchors"] = [[int(y), float(v)] for y, v in self.anchors]
            doc["interpolation"] = self.interpolation
        else:
            doc["observations"] = [[int(y), v.key, float(x)]
                                   for y, v, x in self.observations]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioSpec":
        mode = doc.get("mode")
        if mode == "pinned":
            return cls(mode="pinned",
                       variable=Variable.from_key(doc["variable"]),
                       anchors=[(int(y), float(v)) for y, v in doc["anchors"]],
                       interpolation=doc.get("interpolation", "linear"))
        return cls(mode="augmented",
                   observations=[(int(y), Variable.from_key(v), float(x))
                                 for y, v, x in doc.get("observations", [])])


def interpolate_scenario(spec: ScenarioSpec, year: float,
                         normalizer: Normalizer) -> float:
    """Piecewise-linear anchor interpolation, returned in normalized units."""
    if spec.mode != "pinned":
        raise ValueError("interpolation applies to pinned scenarios")
    years = np.array([y for y, _ in spec.anchors], dtype=float)
    values = np.array([v for _, v in spec.anchors], dtype=float)
    if not years[0] <= year <= years[-1]:
        raise ValueError(f"year {year} outside anchor range "
                         f"[{years[0]:g}, {years[-1]:g}]; no extrapolation")
    physical = float(np.interp(year, years, values))
    return float(normalizer.forward_variable(int(spec.variable), physical))


def pinned_forecast(params: MlpParams, x0: np.ndarray, spec: ScenarioSpec,
                    years: np.ndarray, normalizer: Normalizer,
                    substeps_per_year: int = 4,
                    country: Optional[np.ndarray] = None) -> Trajectory:
    """Integrate with one state component clamped to the scenario.

    The pinned column of the output equals the interpolated scenario at every
    yearly grid point; the other components evolve under the learned dynamics
    evaluated on the pinned-consistent state.
    """
    if spec.mode != "pinned":
        raise ValueError("pinned_forecast needs a pinned-mode scenario")
    years = np.asarray(years)
    anchor_years = [y for y, _ in spec.anchors]
    if not (anchor_years[0] <= years[0] and years[-1] <= anchor_years[-1]):
        raise ValueError(f"anchors [{anchor_years[0]}, {anchor_years[-1]}] do not "
                         f"cover requested years [{years[0]}, {years[-1]}]")
    pin = int(spec.variable)

    def scenario_at(t_model: float) -> float:
        return interpolate_scenario(spec, float(normalizer.time_to_year(t_model)),
                                    normalizer)

    def f(x: np.ndarray, t: float) -> np.ndarray:
        xin = x.copy()
        xin[pin] = scenario_at(t)
        d = share_project(mlp_forward(params, xin, t, country))
        d[pin] = 0.0
        return d

    times = normalizer.year_to_time(years)
    x = np.asarray(x0, dtype=float).copy()
    x[pin] = scenario_at(times[0])
    states = np.empty((len(times), N_VARIABLES))
    states[0] = x
    for j in range(len(times) - 1):
        h = (times[j + 1] - times[j]) / substeps_per_year
        t = times[j]
        for _ in range(substeps_per_year):
            x = rk4_step(f, x, t, h)
            t += h
            x[pin] = scenario_at(t)
        states[j + 1] = x
    return Trajectory(times, states)


def scenario_emissions(trajectory: Trajectory, normalizer: Normalizer) -> np.ndarray:
    """Denormalize a trajectory and recompose yearly emissions."""
    physical = normalizer.inverse(trajectory.states)
    return kaya_recompose_rows(physical)


def share_sum_deviation(trajectory: Trajectory, normalizer: Normalizer) -> float:
    """Largest deviation of the physical share sum from 1 along the trajectory.

    Pinning a share variable makes exact conservation of all three impossible
    in general, so this is checked after the fact rather than enforced.
    """
    physical = normalizer.inverse(trajectory.states)
    return float(np.abs(physical[:, SHARE_SLICE].sum(axis=1) - 1.0).max())


@dataclass
class AugmentedResult:
    params: MlpParams
    validation_mse_before: float
    validation_mse_after: float


def run_augmented_scenario(params: MlpParams, panel_norm: Panel,
                           spec: ScenarioSpec, cfg: TrainConfig, *,
                           train_end: int, normalizer: Normalizer,
                           country: Optional[np.ndarray] = None) -> AugmentedResult:
    """Append hypothetical observations to the training window and fine-tune.

    ``panel_norm`` is the full normalized panel; observation years must fall
    after train_end (inside the window they would be indistinguishable from
    real data). Returns the fine-tuned params with validation MSE before and
    after, scored on the panel's observed cells past train_end.
    """
    if spec.mode != "augmented":
        raise ValueError("run_augmented_scenario needs an augmented-mode scenario")
    years = np.asarray(panel_norm.years)
    for year, _, _ in spec.observations:
        if year <= train_end:
            raise ValueError(f"observation year {year} falls inside the training "
                             f"window (ends {train_end})")

    times = normalizer.year_to_time(years)
    before, _ = node_validation_mse(params, panel_norm, times, train_end,
                                    cfg.substeps_per_year, country)

    cut = int(np.searchsorted(years, train_end)) + 1
    last_obs_year = max(y for y, _, _ in spec.observations)
    aug_years = np.arange(years[0], last_obs_year + 1)
    n_aug = len(aug_years)
    values = np.full((n_aug, N_VARIABLES), np.nan)
    mask = np.zeros((n_aug, N_VARIABLES), dtype=bool)
    values[:cut] = panel_norm.values[:cut]
    mask[:cut] = panel_norm.mask[:cut]
    for year, variable, physical in spec.observations:
        row = int(year - years[0])
        values[row, int(variable)] = normalizer.forward_variable(int(variable), physical)
        mask[row, int(variable)] = True
    augmented = Panel(panel_norm.country, aug_years, values, mask, "normalized")
    tp = TrainingPanel(augmented, normalizer.year_to_time(aug_years), country)

    report = fine_tune(params, [tp], cfg)
    after, _ = node_validation_mse(report.params, panel_norm, times, train_end,
                                   cfg.substeps_per_year, country)
    return AugmentedResult(report.params, before, after)
