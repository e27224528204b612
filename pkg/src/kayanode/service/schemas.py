"""Pydantic request/response models for the HTTP API.

These are the published wire schemas; the frontend contract-tests against
them, so field names and shapes change only with a format-version bump.
"""
from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class ScenarioSpecModel(BaseModel):
    """Wire form of a scenario: pinned trajectory or hypothetical observations."""
    mode: Literal["pinned", "augmented"]
    variable: Optional[str] = None
    anchors: Optional[list[tuple[int, float]]] = None
    interpolation: Literal["linear"] = "linear"
    observations: Optional[list[tuple[int, str, float]]] = None

    def to_spec_dict(self) -> dict:
        doc: dict = {"mode": self.mode}
        if self.variable is not None:
            doc["variable"] = self.variable
        if self.anchors is not None:
            doc["anchors"] = [[y, v] for y, v in self.anchors]
        if self.observations is not None:
            doc["observations"] = [[y, var, v] for y, var, v in self.observations]
        return doc


class ForecastRequest(BaseModel):
    country: str
    model: Literal["node", "var"]
    horizon: int = Field(ge=1, le=200)
    version: Optional[int] = None


class ScenarioRequest(BaseModel):
    country: str
    spec: ScenarioSpecModel
    horizon: Optional[int] = Field(default=None, ge=1, le=200)
    version: Optional[int] = None


class FinetuneRequest(BaseModel):
    country: str
    spec: ScenarioSpecModel
    config: Optional[dict[str, Any]] = None
    version: Optional[int] = None


class ForecastResponse(BaseModel):
    country: str
    model: str
    years: list[int]
    variables: dict[str, list[float]]
    emissions: list[float]
    metadata: dict[str, Any]


class PanelResponse(BaseModel):
    country: str
    years: list[int]
    values: dict[str, list[Optional[float]]]
    emissions: list[Optional[float]]
    train_end: int


class ModelInfo(BaseModel):
    country: str
    versions: list[int]
    latest_version: int
    train_end: int
    kinds: list[str]


class JobResult(BaseModel):
    version: int
    validation_mse_before: float
    validation_mse_after: float


class JobResponse(BaseModel):
    job_id: str
    country: str
    status: Literal["queued", "running", "done", "error"]
    error: Optional[str] = None
    result: Optional[JobResult] = None


class SubmittedJob(BaseModel):
    job_id: str


class ApiError(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ApiError
