"""Vector-autoregression baseline fitted by ordinary least squares.

x_t = c + A_1 x_{t-1} + ... + A_p x_{t-p} + residual, solved via normal
equations with a small ridge jitter on the Gram diagonal; macro indicators
are near-collinear and the jitter keeps the solve stable. The model fits on
the same normalized series as the learned dynamics so validation MSEs
compare like for like. Missing values are a hard error here - masking is the
learned model's job, the baseline is defined on complete series.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularFitError

VAR_FORMAT_VERSION = 1
DEFAULT_JITTER = 1e-10


@dataclass
class VarModel:
    order: int
    intercept: np.ndarray           # (k,)
    coefficients: list[np.ndarray]  # order matrices, each (k, k)
    jitter: float = DEFAULT_JITTER

    def __post_init__(self):
        if self.order < 1 or len(self.coefficients) != self.order:
            raise ValueError("need one coefficient matrix per lag")
        k = len(self.intercept)
        for a in self.coefficients:
            if a.shape != (k, k):
                raise ValueError(f"coefficient shape {a.shape} does not match {k} variables")
        if not np.all(np.isfinite(self.intercept)) or \
                any(not np.all(np.isfinite(a)) for a in self.coefficients):
            raise ValueError("model entries must be finite")

    @property
    def n_variables(self) -> int:
        return len(self.intercept)

    def to_dict(self) -> dict:
        return {
            "format_version": VAR_FORMAT_VERSION,
            "order": self.order,
            "intercept": self.intercept.tolist(),
            "coefficients": [a.tolist() for a in self.coefficients],
            "jitter": self.jitter,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "VarModel":
        if doc.get("format_version") != VAR_FORMAT_VERSION:
            raise ValueError(f"unsupported VAR format {doc.get('format_version')!r}")
        return cls(order=int(doc["order"]),
                   intercept=np.asarray(doc["intercept"], dtype=float),
                   coefficients=[np.asarray(a, dtype=float) for a in doc["coefficients"]],
                   jitter=float(doc["jitter"]))


def var_fit(series: np.ndarray, order: int = 1,
            jitter: float = DEFAULT_JITTER) -> VarModel:
    """Least-squares fit of a VAR(order) to a complete (T, k) series."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 2:
        raise ValueError(f"series must be 2-d, got shape {series.shape}")
    if not np.all(np.isfinite(series)):
        raise ValueError("series contains missing or non-finite values; "
                         "the VAR path requires complete data")
    t_len, k = series.shape
    if order < 1:
        raise ValueError("order must be >= 1")
    if t_len < k * order + order + 2:
        raise ValueError(f"need at least {k * order + order + 2} rows to fit "
                         f"VAR({order}) on {k} variables, got {t_len}")

    rows = t_len - order
    z = np.empty((rows, k * order))
    for lag in range(1, order + 1):
        z[:, k * (lag - 1):k * lag] = series[order - lag:t_len - lag]
    y = series[order:]

    # center both sides: the intercept falls out of the solve, which keeps
    # the Gram matrix far better conditioned than with an explicit column
    z_mean = z.mean(axis=0)
    y_mean = y.mean(axis=0)
    zc = z - z_mean
    yc = y - y_mean
    gram = zc.T @ zc
    gram[np.diag_indices_from(gram)] += jitter
    try:
        beta = np.linalg.solve(gram, zc.T @ yc)
    except np.linalg.LinAlgError as exc:
        raise SingularFitError(f"regressor matrix is singular: {exc}") from exc
    if not np.all(np.isfinite(beta)):
        raise SingularFitError("least-squares solution is non-finite")

    intercept = y_mean - z_mean @ beta
    coefficients = [beta[k * (lag - 1):k * lag].T.copy()
                    for lag in range(1, order + 1)]
    return VarModel(order, intercept, coefficients, jitter)


def var_forecast(model: VarModel, history: np.ndarray, steps: int) -> np.ndarray:
    """Iterated one-step predictions, each feeding the next.

    ``history`` holds exactly ``order`` rows, oldest first.
    """
    history = np.asarray(history, dtype=float)
    k = model.n_variables
    if history.shape != (model.order, k):
        raise ValueError(f"history must be ({model.order}, {k}), got {history.shape}")
    if steps < 0:
        raise ValueError("steps must be >= 0")

    window = [history[i].copy() for i in range(model.order)]
    out = np.empty((steps, k))
    for s in range(steps):
        nxt = model.intercept.copy()
        for lag, a in enumerate(model.coefficients, start=1):
            nxt += a @ window[-lag]
        out[s] = nxt
        window.append(nxt)
        window.pop(0)
    return out
