"""Record real service request/response pairs as frontend contract fixtures.

Run from the repository root with the package installed:

    python3 frontend/scripts/record_fixtures.py

Regenerates frontend/fixtures/*.json deterministically (fixed seeds).
"""
import json
import time
from pathlib import Path

from fastapi.testclient import TestClient

from kayanode.pipeline import train_country
from kayanode.service import create_app
from kayanode.synth import generate_synthetic_panel
from kayanode.training import TrainConfig

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

CFG = TrainConfig(epochs=120, hidden=(16,), substeps_per_year=2,
                  learning_rate=0.02, fine_tune_epochs=20, seed=6)


def record(name, method, path, response, body=None):
    doc = {"method": method, "path": path, "status": response.status_code,
           "response": response.json()}
    if body is not None:
        doc["request"] = body
    (FIXTURES / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(f"recorded {name}: {method} {path} -> {response.status_code}")


def main():
    FIXTURES.mkdir(exist_ok=True)
    panels = generate_synthetic_panel(77, 2, "logistic-coupled",
                                      start_year=1971, end_year=2019,
                                      noise_level=0.01)
    bundles = {p.country: train_country(p, CFG, horizon=12)[0] for p in panels}
    app = create_app(bundles)
    with TestClient(app) as client:
        record("countries", "GET", "/api/countries",
               client.get("/api/countries"))
        record("panel", "GET", "/api/panel/AAA", client.get("/api/panel/AAA"))
        record("models", "GET", "/api/models", client.get("/api/models"))

        body = {"country": "AAA", "model": "node", "horizon": 12}
        record("forecast_node", "POST", "/api/forecast",
               client.post("/api/forecast", json=body), body)
        body = {"country": "AAA", "model": "var", "horizon": 12}
        record("forecast_var", "POST", "/api/forecast",
               client.post("/api/forecast", json=body), body)

        panel = bundles["AAA"].panel
        train_end = bundles["AAA"].train_end
        idx = int(train_end - panel.years[0])
        base = float(panel.values[idx, 0])
        body = {"country": "AAA",
                "spec": {"mode": "pinned", "variable": "population",
                         "anchors": [[train_end, base], [2019, base * 1.08]]}}
        record("scenario", "POST", "/api/scenario",
               client.post("/api/scenario", json=body), body)

        obs_year = train_end + 1
        obs_idx = int(obs_year - panel.years[0])
        body = {"country": "AAA",
                "spec": {"mode": "augmented",
                         "observations": [[obs_year, "population",
                                           float(panel.values[obs_idx, 0])]]},
                "config": {**CFG.to_dict(), "fine_tune_epochs": 5}}
        submitted = client.post("/api/finetune", json=body)
        record("finetune_submit", "POST", "/api/finetune", submitted, body)
        job_id = submitted.json()["job_id"]
        while True:
            job = client.get(f"/api/jobs/{job_id}")
            if job.json()["status"] in ("done", "error"):
                break
            time.sleep(0.05)
        record("job_done", "GET", f"/api/jobs/{job_id}", job)

        record("error_unknown_country", "POST", "/api/forecast",
               client.post("/api/forecast",
                           json={"country": "ZZZ", "model": "node", "horizon": 2}),
               {"country": "ZZZ", "model": "node", "horizon": 2})
        record("error_bad_body", "POST", "/api/forecast",
               client.post("/api/forecast",
                           json={"country": "AAA", "model": "arima", "horizon": 2}),
               {"country": "AAA", "model": "arima", "horizon": 2})


if __name__ == "__main__":
    main()
