"""Command-line entry points for the full pipeline.

Each subcommand is a thin layer over the library: parse arguments, read and
write the documented file formats, call one pipeline function. ``serve``
hands off to the HTTP service.
"""
from __future__ import annotations

import csv
import io
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .artifacts import load_bundle, save_bundle
from .errors import KayaNodeError
from .evaluation import ExperimentSpec, boxplot_summary, results_to_csv, run_experiment
from .panel import panels_from_records, parse_panel_csv, records_to_csv
from .pipeline import finetune_bundle, scenario_forecast, train_country
from .scenario import ScenarioSpec
from .synth import DYNAMICS_KINDS, generate_synthetic_panel, panel_to_records
from .training import TrainConfig
from .variables import VARIABLE_KEYS

DATA_DIR_ENV = "KAYANODE_DATA_DIR"


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n")


def _load_panel_file(path: Path):
    panels = panels_from_records(parse_panel_csv(path.read_text()))
    if len(panels) != 1:
        raise KayaNodeError(f"{path}: expected one country per panel file, "
                            f"found {sorted(panels)}")
    return next(iter(panels.values()))


@click.group()
def main():
    """Emissions forecasting: Kaya indicators, learned dynamics, scenarios."""


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--countries", type=int, default=1, show_default=True)
@click.option("--kind", type=click.Choice(DYNAMICS_KINDS), default="linear",
              show_default=True)
@click.option("--start-year", type=int, default=1971, show_default=True)
@click.option("--end-year", type=int, default=2019, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Directory for the generated panel CSVs.")
def synth(seed, countries, kind, start_year, end_year, out):
    """Generate synthetic panel CSVs with known dynamics."""
    out.mkdir(parents=True, exist_ok=True)
    panels = generate_synthetic_panel(seed, countries, kind,
                                      start_year=start_year, end_year=end_year)
    for panel in panels:
        path = out / f"{panel.country}.csv"
        path.write_text(records_to_csv(panel_to_records(panel)))
        click.echo(f"wrote {path} ({len(panel.years)} years)")


@main.command()
@click.option("--csv", "csv_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Canonical raw panel CSV.")
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Derived indicator CSV.")
def ingest(csv_path, out):
    """Parse a raw panel CSV and write the derived Kaya indicators."""
    panels = panels_from_records(parse_panel_csv(csv_path.read_text()))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["country", "year", *VARIABLE_KEYS])
    for country in sorted(panels):
        panel = panels[country]
        for i, year in enumerate(np.asarray(panel.years)):
            row = [country, int(year)]
            for j in range(len(VARIABLE_KEYS)):
                row.append(repr(float(panel.values[i, j])) if panel.mask[i, j] else "")
            writer.writerow(row)
    out.write_text(buf.getvalue())
    total = sum(len(p.years) for p in panels.values())
    click.echo(f"ingested {len(panels)} countries, {total} rows -> {out}")


@main.command()
@click.option("--panel", "panel_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="TrainConfig JSON or TOML; defaults apply if omitted.")
@click.option("--horizon", type=int, default=12, show_default=True,
              help="Validation years held out of training.")
@click.option("--seed", type=int, default=None, help="Overrides the config seed.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--loss-csv", type=click.Path(path_type=Path), default=None,
              help="Per-epoch loss history (epoch,loss).")
def train(panel_path, config_path, horizon, seed, out, loss_csv):
    """Fit the learned dynamics and VAR baseline; write a model bundle."""
    panel = _load_panel_file(panel_path)
    cfg = TrainConfig.from_file(config_path) if config_path else TrainConfig()
    if seed is not None:
        cfg = TrainConfig.from_dict({**cfg.to_dict(), "seed": seed})
    bundle, report = train_country(panel, cfg, horizon)
    save_bundle(bundle, out)
    if loss_csv is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["epoch", "loss"])
        for epoch, loss in enumerate(report.losses):
            writer.writerow([epoch, repr(float(loss))])
        Path(loss_csv).write_text(buf.getvalue())
    click.echo(f"trained {panel.country} through {bundle.train_end}: "
               f"loss {report.losses[0]:.4g} -> {report.losses[-1]:.4g}, "
               f"{report.wall_seconds:.1f}s -> {out}")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--kind", type=click.Choice(["node", "var"]), default="node",
              show_default=True)
@click.option("--horizon", type=int, default=12, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def forecast(model_path, kind, horizon, out):
    """Forecast from a trained bundle; write a ForecastResult JSON."""
    bundle = load_bundle(model_path)
    result = bundle.forecast(kind, horizon)
    _write_json(out, result.to_dict())
    click.echo(f"{kind} forecast for {bundle.country}, "
               f"{result.years[0]}-{result.years[-1]} -> {out}")


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="ExperimentSpec JSON.")
@click.option("--panels", "panels_dir", type=click.Path(exists=True, path_type=Path),
              required=True, help="Directory of canonical panel CSVs.")
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Tidy results CSV.")
@click.option("--boxplots", type=click.Path(path_type=Path), default=None,
              help="Quartile summary JSON keyed by horizon and model.")
def evaluate(spec_path, panels_dir, out, boxplots):
    """Run the multi-country, multi-horizon model comparison."""
    spec = ExperimentSpec.from_dict(json.loads(spec_path.read_text()))
    panels = {}
    for path in sorted(panels_dir.glob("*.csv")):
        panels.update(panels_from_records(parse_panel_csv(path.read_text())))
    results = run_experiment(spec, panels)
    Path(out).write_text(results_to_csv(results))
    if boxplots is not None:
        _write_json(Path(boxplots), boxplot_summary(results))
    click.echo(f"evaluated {len(results)} cells -> {out}")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--spec", "spec_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Pinned-mode ScenarioSpec JSON.")
@click.option("--horizon", type=int, default=None,
              help="Defaults to the last anchor year.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def scenario(model_path, spec_path, horizon, out):
    """Forecast with one indicator pinned to a hypothetical trajectory."""
    bundle = load_bundle(model_path)
    spec = ScenarioSpec.from_dict(json.loads(spec_path.read_text()))
    result = scenario_forecast(bundle, spec, horizon)
    _write_json(out, result.to_dict())
    click.echo(f"pinned {spec.variable.key} scenario for {bundle.country} -> {out}")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--spec", "spec_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="Augmented-mode ScenarioSpec JSON.")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Overrides the bundle's training config.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def finetune(model_path, spec_path, config_path, out):
    """Fine-tune a bundle on hypothetical future observations."""
    bundle = load_bundle(model_path)
    spec = ScenarioSpec.from_dict(json.loads(spec_path.read_text()))
    cfg = TrainConfig.from_file(config_path) if config_path else None
    new_bundle, outcome = finetune_bundle(bundle, spec, cfg)
    save_bundle(new_bundle, out)
    click.echo(f"fine-tuned {bundle.country}: validation MSE "
               f"{outcome.validation_mse_before:.6g} -> "
               f"{outcome.validation_mse_after:.6g} -> {out}")


@main.command()
@click.option("--data-dir", type=click.Path(path_type=Path), default=None,
              help=f"Directory of model bundles; defaults to ${DATA_DIR_ENV}.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(data_dir, host, port):
    """Serve forecasts and scenario exploration over HTTP."""
    if data_dir is None:
        env = os.environ.get(DATA_DIR_ENV)
        if not env:
            raise click.UsageError(f"--data-dir or ${DATA_DIR_ENV} is required")
        data_dir = Path(env)
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(data_dir), host=host, port=port)


def run() -> int:
    """Entry point with one-line diagnostics for domain errors."""
    try:
        main.main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        return 1
    except (KayaNodeError, ValueError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(run())
