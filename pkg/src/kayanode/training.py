"""Fitting the dynamics network: trajectory MSE, exact reverse-mode
gradients through the unrolled integrator, and Adam.

The gradient is discretize-then-optimize: the forward pass tapes every RK4
stage, and the backward pass walks the tape in reverse, so the gradient is
exact for the loss actually computed (finite differences agree to rounding).
Optimization is full batch - one Adam step per epoch over all panels; the
series are short enough that mini-batching would only add noise.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DivergenceError
from .normalize import Normalizer
from .ode import MlpParams, mlp_forward_acts, _assemble_input
from .panel import Panel
from .variables import N_VARIABLES, SHARE_SLICE

LayerGrads = list[tuple[np.ndarray, np.ndarray]]


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 2000
    substeps_per_year: int = 4
    hidden: tuple[int, ...] = (64,)
    seed: int = 0
    fine_tune_epochs: int = 200

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.fine_tune_epochs < 0:
            raise ValueError("fine_tune_epochs must be >= 0")
        if self.substeps_per_year < 1:
            raise ValueError("substeps_per_year must be >= 1")
        self.hidden = tuple(int(w) for w in self.hidden)
        if not self.hidden or any(w < 1 for w in self.hidden):
            raise ValueError("hidden widths must be positive")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "epochs": self.epochs,
            "substeps_per_year": self.substeps_per_year,
            "hidden": list(self.hidden),
            "seed": self.seed,
            "fine_tune_epochs": self.fine_tune_epochs,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        known = {f: doc[f] for f in cls.__dataclass_fields__ if f in doc}
        unknown = set(doc) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**known)

    @classmethod
    def from_file(cls, path: str | Path) -> "TrainConfig":
        path = Path(path)
        if path.suffix == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            doc = tomllib.loads(path.read_text())
        else:
            doc = json.loads(path.read_text())
        return cls.from_dict(doc)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0)


@dataclass
class LossReport:
    """Per-epoch loss history; losses[k] is evaluated before update k."""
    losses: np.ndarray
    params: MlpParams
    wall_seconds: float


@dataclass
class TrainingPanel:
    """A normalized panel paired with its model-time grid and country one-hot.

    The time grid travels with the panel because the year-to-time mapping
    belongs to the full-panel normalizer, not to whatever window was sliced.
    """
    panel: Panel
    times: np.ndarray
    onehot: Optional[np.ndarray] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.panel.years):
            raise ValueError("times grid must match the panel's year grid")
        if self.panel.units != "normalized":
            raise ValueError("training panels must be in normalized units")


def training_panel(panel: Panel, normalizer: Normalizer,
                   onehot: Optional[np.ndarray] = None) -> TrainingPanel:
    return TrainingPanel(panel, normalizer.year_to_time(np.asarray(panel.years)), onehot)


def one_hot(index: int, count: int) -> np.ndarray:
    v = np.zeros(count)
    v[index] = 1.0
    return v


# --- forward/backward through the unrolled integrator ---------------------

def _stage(params: MlpParams, x: np.ndarray, t: float,
           onehot: Optional[np.ndarray]):
    inp = _assemble_input(x, t, onehot, params.input_dim)
    out, acts = mlp_forward_acts(params, inp)
    out[SHARE_SLICE] -= out[SHARE_SLICE].mean()
    return out, acts


def _forward_panel(params: MlpParams, tp: TrainingPanel, substeps: int,
                   want_tape: bool):
    """Integrate over the panel's time grid, optionally taping RK4 stages."""
    times = tp.times
    x = tp.panel.values[0]
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{tp.panel.country}: first row must be complete; it seeds "
                         "the integration")
    x = x.astype(float, copy=True)
    states = np.empty((len(times), N_VARIABLES))
    states[0] = x
    tape: list = []
    for j in range(len(times) - 1):
        h = (times[j + 1] - times[j]) / substeps
        t = times[j]
        for _ in range(substeps):
            k1, a1 = _stage(params, x, t, tp.onehot)
            k2, a2 = _stage(params, x + (0.5 * h) * k1, t + 0.5 * h, tp.onehot)
            k3, a3 = _stage(params, x + (0.5 * h) * k2, t + 0.5 * h, tp.onehot)
            k4, a4 = _stage(params, x + h * k3, t + h, tp.onehot)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise DivergenceError(t)
            if want_tape:
                tape.append((h, a1, a2, a3, a4))
            t += h
        states[j + 1] = x
    return states, tape


def _mlp_vjp(params: MlpParams, acts: list[np.ndarray], u: np.ndarray,
             gw: list[np.ndarray], gb: list[np.ndarray]) -> np.ndarray:
    """Accumulate parameter cotangents; return the state cotangent."""
    last = len(params.weights) - 1
    gb[last] += u
    gw[last] += np.outer(u, acts[last])
    u = params.weights[last].T @ u
    for k in range(last - 1, -1, -1):
        u = u * (1.0 - acts[k + 1] ** 2)
        gb[k] += u
        gw[k] += np.outer(u, acts[k])
        u = params.weights[k].T @ u
    return u[:N_VARIABLES]


def _stage_vjp(params: MlpParams, acts, u: np.ndarray, gw, gb) -> np.ndarray:
    # the share projection is symmetric, so its transpose is itself
    u = u.copy()
    u[SHARE_SLICE] -= u[SHARE_SLICE].mean()
    return _mlp_vjp(params, acts, u, gw, gb)


def _substep_vjp(params: MlpParams, record, a: np.ndarray, gw, gb) -> np.ndarray:
    """Reverse one RK4 substep: adjoint in, adjoint at the previous state out."""
    h, a1, a2, a3, a4 = record
    u4 = (h / 6.0) * a
    ux4 = _stage_vjp(params, a4, u4, gw, gb)
    u3 = (h / 3.0) * a + h * ux4
    ux3 = _stage_vjp(params, a3, u3, gw, gb)
    u2 = (h / 3.0) * a + (0.5 * h) * ux3
    ux2 = _stage_vjp(params, a2, u2, gw, gb)
    u1 = (h / 6.0) * a + (0.5 * h) * ux2
    ux1 = _stage_vjp(params, a1, u1, gw, gb)
    return a + ux1 + ux2 + ux3 + ux4


def _masked_residuals(states: np.ndarray, panel: Panel) -> np.ndarray:
    resid = np.zeros_like(states)
    m = panel.mask
    resid[m] = states[m] - panel.values[m]
    return resid


def _check_panels(panels: Sequence[TrainingPanel]) -> int:
    if not panels:
        raise ValueError("need at least one training panel")
    total = sum(int(tp.panel.mask.sum()) for tp in panels)
    if total == 0:
        raise ValueError("no observed cells across the training panels")
    counts = {0 if tp.onehot is None else len(tp.onehot) for tp in panels}
    if len(counts) != 1:
        raise ValueError("panels mix one-hot and no-one-hot modes")
    return total


def trajectory_loss(params: MlpParams, panels: Sequence[TrainingPanel],
                    substeps_per_year: int = 4) -> float:
    """Mean squared error over all observed cells of all panels."""
    total = _check_panels(panels)
    sse = 0.0
    for tp in panels:
        states, _ = _forward_panel(params, tp, substeps_per_year, want_tape=False)
        sse += float((_masked_residuals(states, tp.panel) ** 2).sum())
    return sse / total


def loss_gradient(params: MlpParams, panels: Sequence[TrainingPanel],
                  substeps_per_year: int = 4) -> tuple[float, LayerGrads]:
    """Loss and its exact gradient through every unrolled RK4 stage."""
    total = _check_panels(panels)
    gw = [np.zeros_like(w) for w in params.weights]
    gb = [np.zeros_like(b) for b in params.biases]
    sse = 0.0
    for tp in panels:
        states, tape = _forward_panel(params, tp, substeps_per_year, want_tape=True)
        resid = _masked_residuals(states, tp.panel)
        sse += float((resid ** 2).sum())
        cot = (2.0 / total) * resid
        a = cot[-1].copy()
        idx = len(tape) - 1
        for j in range(len(tp.times) - 2, -1, -1):
            for _ in range(substeps_per_year):
                a = _substep_vjp(params, tape[idx], a, gw, gb)
                idx -= 1
            a += cot[j]
    return sse / total, list(zip(gw, gb))


def flatten_grads(grads: LayerGrads) -> np.ndarray:
    return np.concatenate([a.ravel() for pair in grads for a in pair])


def adam_step(params: MlpParams, grads: LayerGrads, state: AdamState,
              cfg: TrainConfig) -> tuple[MlpParams, AdamState]:
    """Standard bias-corrected Adam update; the step counter advances by 1."""
    g = flatten_grads(grads)
    theta = params.flatten()
    if g.shape != theta.shape:
        raise ValueError(f"gradient size {g.size} does not match {theta.size} parameters")
    step = state.step + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * (g * g)
    m_hat = m / (1.0 - cfg.beta1 ** step)
    v_hat = v / (1.0 - cfg.beta2 ** step)
    theta = theta - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return params.with_flat(theta), AdamState(m, v, step)


def _validate_multi_country(panels: Sequence[TrainingPanel]) -> int:
    counts = {0 if tp.onehot is None else len(tp.onehot) for tp in panels}
    count = counts.pop()
    if count:
        seen = set()
        for tp in panels:
            if not np.isclose(tp.onehot.sum(), 1.0):
                raise ValueError("country one-hots must sum to 1")
            key = tuple(np.round(tp.onehot, 12))
            if key in seen:
                raise ValueError("country one-hots must be distinct")
            seen.add(key)
    return count


def _run_epochs(params: MlpParams, panels: Sequence[TrainingPanel],
                cfg: TrainConfig, epochs: int) -> LossReport:
    start = time.perf_counter()
    state = AdamState.zeros(params.size)
    losses = np.empty(epochs)
    for epoch in range(epochs):
        try:
            loss, grads = loss_gradient(params, panels, cfg.substeps_per_year)
        except DivergenceError as exc:
            raise DivergenceError(exc.t, f"training diverged at epoch {epoch}") from exc
        losses[epoch] = loss
        params, state = adam_step(params, grads, state, cfg)
    return LossReport(losses, params, time.perf_counter() - start)


def train(panels: Sequence[TrainingPanel], cfg: TrainConfig) -> LossReport:
    """Run cfg.epochs full-batch Adam steps from a seeded initialization."""
    _check_panels(panels)
    country_count = _validate_multi_country(panels)
    params = MlpParams.init(cfg.hidden, country_count=country_count, seed=cfg.seed)
    return _run_epochs(params, panels, cfg, cfg.epochs)


def fine_tune(params: MlpParams, panels: Sequence[TrainingPanel],
              cfg: TrainConfig) -> LossReport:
    """Continue training from existing params with fresh optimizer moments.

    The stale moments from the original run describe a different objective,
    so they are discarded rather than carried over.
    """
    _check_panels(panels)
    if cfg.fine_tune_epochs == 0:
        return LossReport(np.empty(0), params.copy(), 0.0)
    return _run_epochs(params.copy(), panels, cfg, cfg.fine_tune_epochs)
