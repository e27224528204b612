"""Versioned model snapshots and the fine-tune job queue.

Reads always see an immutable published snapshot. A fine-tune builds its new
model privately on a worker thread and publishes it as the next version, so
writers never block readers. One worker drains the queue, which serializes
jobs per model (and globally - fine for a single-process service).
"""
from __future__ import annotations

import queue
import threading
from dataclasses import dataclass, field
from typing import Optional

from ..artifacts import ModelBundle
from ..pipeline import finetune_bundle
from ..scenario import ScenarioSpec
from ..training import TrainConfig


class UnknownModelError(KeyError):
    pass


@dataclass
class Snapshot:
    version: int
    bundle: ModelBundle


@dataclass
class Job:
    job_id: str
    country: str
    status: str = "queued"            # queued | running | done | error
    error: Optional[str] = None
    result: Optional[dict] = None


class ModelStore:
    def __init__(self, bundles: dict[str, ModelBundle], queue_limit: int = 8):
        self._snapshots: dict[str, list[Snapshot]] = {
            country: [Snapshot(1, bundle)] for country, bundle in sorted(bundles.items())
        }
        self._lock = threading.Lock()
        self._jobs: dict[str, Job] = {}
        self._queue: queue.Queue = queue.Queue(maxsize=queue_limit)
        self._job_counter = 0
        self._worker: Optional[threading.Thread] = None

    # -- snapshots -----------------------------------------------------------

    def countries(self) -> list[str]:
        return sorted(self._snapshots)

    def snapshot(self, country: str, version: Optional[int] = None) -> Snapshot:
        with self._lock:
            versions = self._snapshots.get(country)
            if versions is None:
                raise UnknownModelError(f"no model for country {country!r}")
            if version is None:
                return versions[-1]
            for snap in versions:
                if snap.version == version:
                    return snap
            raise UnknownModelError(f"{country} has no version {version}")

    def versions(self, country: str) -> list[int]:
        with self._lock:
            versions = self._snapshots.get(country)
            if versions is None:
                raise UnknownModelError(f"no model for country {country!r}")
            return [snap.version for snap in versions]

    def _publish(self, country: str, bundle: ModelBundle) -> int:
        with self._lock:
            versions = self._snapshots[country]
            new_version = versions[-1].version + 1
            versions.append(Snapshot(new_version, bundle))
            return new_version

    # -- jobs ------------------------------------------------------------------

    def submit_finetune(self, country: str, spec: ScenarioSpec,
                        cfg: Optional[TrainConfig], version: Optional[int]) -> Job:
        base = self.snapshot(country, version)
        with self._lock:
            self._job_counter += 1
            job = Job(job_id=f"job-{self._job_counter}", country=country)
            self._jobs[job.job_id] = job
        try:
            self._queue.put_nowait((job, base, spec, cfg))
        except queue.Full:
            with self._lock:
                del self._jobs[job.job_id]
            raise
        return job

    def job(self, job_id: str) -> Job:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise UnknownModelError(f"no job {job_id!r}")
            return job

    # -- worker ----------------------------------------------------------------

    def start(self) -> None:
        if self._worker is None:
            self._worker = threading.Thread(target=self._drain, daemon=True)
            self._worker.start()

    def stop(self) -> None:
        if self._worker is not None:
            self._queue.put(None)
            self._worker.join(timeout=60)
            self._worker = None

    def _drain(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            job, base, spec, cfg = item
            with self._lock:
                job.status = "running"
            try:
                new_bundle, outcome = finetune_bundle(base.bundle, spec, cfg)
                new_version = self._publish(job.country, new_bundle)
                with self._lock:
                    job.status = "done"
                    job.result = {
                        "version": new_version,
                        "validation_mse_before": outcome.validation_mse_before,
                        "validation_mse_after": outcome.validation_mse_after,
                    }
            except Exception as exc:
                with self._lock:
                    job.status = "error"
                    job.error = str(exc)
