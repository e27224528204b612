"""High-level flows shared by the CLI and the HTTP service."""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np

from .artifacts import ModelBundle
from .errors import KayaNodeError
from .forecast import ForecastResult, build_forecast_result
from .normalize import normalize_panel
from .panel import Panel, split_panel
from .scenario import (AugmentedResult, ScenarioSpec, pinned_forecast,
                       run_augmented_scenario, share_sum_deviation)
from .training import LossReport, TrainConfig, TrainingPanel, train
from .var import var_fit


def train_country(panel: Panel, cfg: TrainConfig, horizon: int) -> tuple[ModelBundle, LossReport]:
    """Fit the learned dynamics and the VAR baseline on one country's panel.

    The last ``horizon`` years are held out; both models fit on the
    normalized training window and ship together in one bundle.
    """
    train_p, _ = split_panel(panel, horizon)
    train_end = int(train_p.years[-1])
    norm_full, normalizer = normalize_panel(panel, train_end)
    cut = len(train_p.years)
    norm_train = Panel(panel.country, norm_full.years[:cut].copy(),
                       norm_full.values[:cut].copy(), norm_full.mask[:cut].copy(),
                       "normalized")
    times = normalizer.year_to_time(np.asarray(norm_full.years))

    report = train([TrainingPanel(norm_train, times[:cut])], cfg)
    # the baseline is defined on complete series only; a masked panel still
    # gets the learned-dynamics model
    var_model = var_fit(norm_train.values, order=1) if norm_train.mask.all() else None

    bundle = ModelBundle(country=panel.country, panel=panel, train_end=train_end,
                         normalizer=normalizer, node=report.params,
                         var=var_model, config=cfg)
    return bundle, report


def scenario_forecast(bundle: ModelBundle, spec: ScenarioSpec,
                      horizon: Optional[int] = None) -> ForecastResult:
    """Pinned-scenario forecast from the end of the training window.

    Without an explicit horizon the grid runs to the last anchor year.
    """
    if spec.mode != "pinned":
        raise ValueError("scenario forecasts take a pinned-mode spec")
    if horizon is None:
        last_anchor = max(y for y, _ in spec.anchors)
        horizon = int(last_anchor - bundle.train_end)
        if horizon < 1:
            raise ValueError("anchors must extend past the training window")
    years = bundle.forecast_years(horizon)
    x0 = bundle.train_end_state()
    traj = pinned_forecast(bundle.node, x0, spec, years, bundle.normalizer,
                           bundle.config.substeps_per_year)
    extra = {
        "train_end": bundle.train_end,
        "scenario": spec.to_dict(),
        "share_sum_max_deviation": share_sum_deviation(traj, bundle.normalizer),
    }
    result = build_forecast_result(bundle.country, "node", years, traj.states,
                                   bundle.normalizer, bundle.params_hash(), extra)
    return result


def finetune_bundle(bundle: ModelBundle, spec: ScenarioSpec,
                    cfg: Optional[TrainConfig] = None) -> tuple[ModelBundle, AugmentedResult]:
    """Fine-tune a bundle's learned model on augmented observations."""
    cfg = cfg or bundle.config
    norm_full = bundle.normalized_panel()
    outcome = run_augmented_scenario(bundle.node, norm_full, spec, cfg,
                                     train_end=bundle.train_end,
                                     normalizer=bundle.normalizer)
    new_bundle = ModelBundle(country=bundle.country, panel=bundle.panel,
                             train_end=bundle.train_end, normalizer=bundle.normalizer,
                             node=outcome.params, var=bundle.var, config=cfg)
    return new_bundle, outcome
