import json

import numpy as np
import pytest
from click.testing import CliRunner

from kayanode.cli import main
from kayanode.artifacts import load_bundle

TINY_CFG = {"epochs": 30, "hidden": [8], "substeps_per_year": 2,
            "learning_rate": 0.02, "fine_tune_epochs": 10, "seed": 4}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """synth -> train once; later tests reuse the artifacts."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    res = runner.invoke(main, ["synth", "--seed", "3", "--countries", "2",
                               "--kind", "linear", "--start-year", "2000",
                               "--end-year", "2015", "--out", str(root / "panels")])
    assert res.exit_code == 0, res.output
    cfg_path = root / "cfg.json"
    cfg_path.write_text(json.dumps(TINY_CFG))
    res = runner.invoke(main, ["train", "--panel", str(root / "panels" / "AAA.csv"),
                               "--config", str(cfg_path), "--horizon", "4",
                               "--out", str(root / "model.json"),
                               "--loss-csv", str(root / "loss.csv")])
    assert res.exit_code == 0, res.output
    return root, runner


def test_synth_deterministic(tmp_path):
    runner = CliRunner()
    for sub in ("a", "b"):
        res = runner.invoke(main, ["synth", "--seed", "7", "--countries", "2",
                                   "--out", str(tmp_path / sub)])
        assert res.exit_code == 0, res.output
    for name in ("AAA.csv", "AAB.csv"):
        assert (tmp_path / "a" / name).read_bytes() == \
               (tmp_path / "b" / name).read_bytes()


def test_train_artifacts(workspace):
    root, _ = workspace
    bundle = load_bundle(root / "model.json")
    assert bundle.country == "AAA"
    assert bundle.train_end == 2011
    lines = (root / "loss.csv").read_text().strip().split("\n")
    assert lines[0] == "epoch,loss"
    assert len(lines) == TINY_CFG["epochs"] + 1


def test_ingest(workspace, tmp_path):
    root, runner = workspace
    out = tmp_path / "indicators.csv"
    res = runner.invoke(main, ["ingest", "--csv", str(root / "panels" / "AAA.csv"),
                               "--out", str(out)])
    assert res.exit_code == 0, res.output
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("country,year,population,")
    assert len(lines) == 17  # header + 16 years


def test_forecast_both_kinds(workspace, tmp_path):
    root, runner = workspace
    for kind in ("node", "var"):
        out = tmp_path / f"fc_{kind}.json"
        res = runner.invoke(main, ["forecast", "--model", str(root / "model.json"),
                                   "--kind", kind, "--horizon", "4",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        doc = json.loads(out.read_text())
        assert doc["model"] == kind
        assert doc["years"] == list(range(2011, 2016))
        # emissions column recomposes from the reported factors
        recomposed = (np.array(doc["variables"]["population"])
                      * doc["variables"]["gdp_per_capita"]
                      * doc["variables"]["energy_intensity"]
                      * doc["variables"]["carbon_intensity"])
        np.testing.assert_allclose(recomposed, doc["emissions"], rtol=1e-9)


def test_scenario_pinned(workspace, tmp_path):
    root, runner = workspace
    bundle = load_bundle(root / "model.json")
    anchor0 = float(bundle.panel.values[11, 0])  # population at train_end
    spec = {"mode": "pinned", "variable": "population",
            "anchors": [[2011, anchor0], [2015, anchor0 * 1.1]]}
    spec_path = tmp_path / "scenario.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "result.json"
    res = runner.invoke(main, ["scenario", "--model", str(root / "model.json"),
                               "--spec", str(spec_path), "--out", str(out)])
    assert res.exit_code == 0, res.output
    doc = json.loads(out.read_text())
    pinned = doc["variables"]["population"]
    expected = np.interp(doc["years"], [2011, 2015], [anchor0, anchor0 * 1.1])
    np.testing.assert_allclose(pinned, expected, rtol=1e-12)


def test_finetune(workspace, tmp_path):
    root, runner = workspace
    bundle = load_bundle(root / "model.json")
    years = np.asarray(bundle.panel.years)
    obs = [[2012, "population", float(bundle.panel.values[12, 0])]]
    spec_path = tmp_path / "aug.json"
    spec_path.write_text(json.dumps({"mode": "augmented", "observations": obs}))
    out = tmp_path / "model2.json"
    res = runner.invoke(main, ["finetune", "--model", str(root / "model.json"),
                               "--spec", str(spec_path), "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert "validation MSE" in res.output
    tuned = load_bundle(out)
    assert tuned.train_end == bundle.train_end


def test_evaluate(workspace, tmp_path):
    root, runner = workspace
    spec = {"countries": ["AAA", "AAB"], "horizons": [2], "seed": 1,
            "train": TINY_CFG}
    spec_path = tmp_path / "exp.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "results.csv"
    box = tmp_path / "box.json"
    res = runner.invoke(main, ["evaluate", "--spec", str(spec_path),
                               "--panels", str(root / "panels"),
                               "--out", str(out), "--boxplots", str(box)])
    assert res.exit_code == 0, res.output
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 1 + 2 * 1 * 2  # header + countries x horizons x models
    summary = json.loads(box.read_text())
    assert set(summary["2"]) == {"node", "var"}


def test_unknown_subcommand_exits_2():
    from kayanode.cli import run
    import sys
    runner = CliRunner()
    res = runner.invoke(main, ["frobnicate"])
    assert res.exit_code == 2


def test_domain_error_is_one_line(tmp_path, capsys, monkeypatch):
    from kayanode.cli import run
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,panel\n1,2,3\n")
    monkeypatch.setattr("sys.argv", ["kayanode", "ingest", "--csv", str(bad),
                                     "--out", str(tmp_path / "out.csv")])
    code = run()
    captured = capsys.readouterr()
    assert code == 1
    assert captured.err.strip().startswith("error:")
    assert len(captured.err.strip().split("\n")) == 1
