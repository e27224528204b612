"""Dynamics network and fixed-step Runge-Kutta integration.

The vector field is a small tanh MLP taking the 7 state variables plus model
time (plus an optional country one-hot) and returning the 7 derivatives. Its
output is passed through a projection that zeroes the mean of the three
share derivatives, which conserves the share sum along any trajectory.
Integration uses the classical fourth-order scheme with a fixed number of
substeps per yearly interval; fixed steps keep gradients exact and runs
reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError, ShapeError
from .variables import N_VARIABLES, SHARE_SLICE

PARAMS_FORMAT_VERSION = 1


@dataclass
class MlpParams:
    """Weights and biases of the dynamics network.

    weights[k] has shape (layer_out, layer_in); hidden layers use tanh, the
    output layer is linear and always 7 wide. Input width is 8 plus the
    country count (state, time, one-hot).
    """
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    country_count: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.weights or len(self.weights) != len(self.biases):
            raise ShapeError("weights and biases must pair up layer by layer")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeError(f"layer {k}: weight {w.shape} / bias {b.shape} mismatch")
            if k > 0 and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ShapeError(f"layer {k}: input width {w.shape[1]} does not chain "
                                 f"to previous output {self.weights[k - 1].shape[0]}")
        if self.weights[0].shape[1] != N_VARIABLES + 1 + self.country_count:
            raise ShapeError(f"input width {self.weights[0].shape[1]} does not match "
                             f"{N_VARIABLES + 1 + self.country_count} "
                             f"(state + time + one-hot)")
        if self.weights[-1].shape[0] != N_VARIABLES:
            raise ShapeError(f"output width must be {N_VARIABLES}")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return tuple(w.shape[0] for w in self.weights[:-1])

    @classmethod
    def init(cls, hidden: tuple[int, ...] = (64,), country_count: int = 0,
             seed: int = 0) -> "MlpParams":
        """Seeded init: uniform +-sqrt(6 / (fan_in + fan_out)), zero biases."""
        rng = np.random.default_rng(seed)
        dims = [N_VARIABLES + 1 + country_count, *hidden, N_VARIABLES]
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, country_count=country_count, seed=seed)

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights],
                         [b.copy() for b in self.biases],
                         country_count=self.country_count, seed=self.seed)

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases)
                               for a in pair])

    def with_flat(self, flat: np.ndarray) -> "MlpParams":
        weights, biases = [], []
        pos = 0
        for w, b in zip(self.weights, self.biases):
            weights.append(flat[pos:pos + w.size].reshape(w.shape).copy())
            pos += w.size
            biases.append(flat[pos:pos + b.size].copy())
            pos += b.size
        if pos != flat.size:
            raise ShapeError(f"flat vector of size {flat.size} does not match "
                             f"{pos} parameters")
        return MlpParams(weights, biases, country_count=self.country_count, seed=self.seed)

    @property
    def size(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def to_dict(self) -> dict:
        return {
            "format_version": PARAMS_FORMAT_VERSION,
            "input_dim": self.input_dim,
            "hidden": list(self.hidden_widths),
            "output_dim": N_VARIABLES,
            "country_count": self.country_count,
            "activation": "tanh",
            "seed": self.seed,
            "layers": [{"weights": w.tolist(), "bias": b.tolist()}
                       for w, b in zip(self.weights, self.biases)],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MlpParams":
        if doc.get("format_version") != PARAMS_FORMAT_VERSION:
            raise ValueError(f"unsupported params format {doc.get('format_version')!r}")
        weights = [np.asarray(layer["weights"], dtype=float) for layer in doc["layers"]]
        biases = [np.asarray(layer["bias"], dtype=float) for layer in doc["layers"]]
        return cls(weights, biases, country_count=int(doc["country_count"]),
                   seed=doc.get("seed"))


@dataclass
class Trajectory:
    """States recorded at the yearly grid points, in normalized units."""
    times: np.ndarray    # (T,) model time, strictly increasing
    states: np.ndarray   # (T, 7)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states lengths differ")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


def _assemble_input(x: np.ndarray, t: float, country: Optional[np.ndarray],
                    input_dim: int) -> np.ndarray:
    inp = np.empty(input_dim)
    inp[:N_VARIABLES] = x
    inp[N_VARIABLES] = t
    if country is not None:
        inp[N_VARIABLES + 1:] = country
    return inp


def mlp_forward(params: MlpParams, x: np.ndarray, t: float,
                country: Optional[np.ndarray] = None) -> np.ndarray:
    """Raw network output (callers integrating apply share_project on top)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (N_VARIABLES,):
        raise ShapeError(f"state must be a {N_VARIABLES}-vector, got {x.shape}")
    expected = params.country_count
    if expected == 0:
        if country is not None:
            raise ShapeError("params built without country inputs")
    else:
        if country is None or np.asarray(country).shape != (expected,):
            raise ShapeError(f"country one-hot must have length {expected}")
    a = _assemble_input(x, t, country, params.input_dim)
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        a = w @ a + b
        if k != last:
            a = np.tanh(a)
    return a


def mlp_forward_acts(params: MlpParams, inp: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Forward pass on a pre-assembled input, recording activations.

    Returns (output, acts) where acts[k] is the input to layer k; the reverse
    pass consumes this record.
    """
    acts = [inp]
    a = inp
    last = len(params.weights) - 1
    for k in range(last):
        a = np.tanh(params.weights[k] @ a + params.biases[k])
        acts.append(a)
    out = params.weights[last] @ a + params.biases[last]
    return out, acts


def share_project(derivative: np.ndarray) -> np.ndarray:
    """Remove the mean from the three share derivatives.

    Keeps the sum of the share components constant along any integrated
    trajectory; the first four components pass through untouched.
    """
    d = np.asarray(derivative, dtype=float)
    if d.shape != (N_VARIABLES,):
        raise ShapeError(f"expected a {N_VARIABLES}-vector, got {d.shape}")
    out = d.copy()
    out[SHARE_SLICE] -= out[SHARE_SLICE].mean()
    return out


def dynamics_fn(params: MlpParams,
                country: Optional[np.ndarray] = None) -> Callable[[np.ndarray, float], np.ndarray]:
    """The integrated vector field: share_project composed with the network."""
    def f(x: np.ndarray, t: float) -> np.ndarray:
        return share_project(mlp_forward(params, x, t, country))
    return f


def rk4_step(f: Callable[[np.ndarray, float], np.ndarray], x: np.ndarray,
             t: float, h: float) -> np.ndarray:
    """One classical four-stage Runge-Kutta update."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    k1 = f(x, t)
    k2 = f(x + 0.5 * h * k1, t + 0.5 * h)
    k3 = f(x + 0.5 * h * k2, t + 0.5 * h)
    k4 = f(x + h * k3, t + h)
    for k in (k1, k2, k3, k4):
        if not np.all(np.isfinite(k)):
            raise DivergenceError(t)
    with np.errstate(over="ignore", invalid="ignore"):
        out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise DivergenceError(t)
    return out


def integrate(params: MlpParams, x0: np.ndarray, times: np.ndarray,
              substeps_per_year: int = 4,
              country: Optional[np.ndarray] = None) -> Trajectory:
    """Integrate the learned dynamics across a yearly model-time grid.

    The trajectory starts exactly at x0; each interval between consecutive
    grid points is advanced with ``substeps_per_year`` equal RK4 steps, and
    states are recorded only at the grid points.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("times grid must be non-empty")
    if substeps_per_year < 1:
        raise ValueError("substeps_per_year must be >= 1")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (N_VARIABLES,):
        raise ShapeError(f"x0 must be a {N_VARIABLES}-vector, got {x0.shape}")

    f = dynamics_fn(params, country)
    states = np.empty((len(times), N_VARIABLES))
    states[0] = x0
    x = x0.copy()
    for j in range(len(times) - 1):
        h = (times[j + 1] - times[j]) / substeps_per_year
        t = times[j]
        for _ in range(substeps_per_year):
            x = rk4_step(f, x, t, h)
            t += h
        states[j + 1] = x
    return Trajectory(times.copy(), states)
