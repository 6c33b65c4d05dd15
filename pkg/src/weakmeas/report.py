"""Scenario output: delimited datasets, check reports, and rendered figures.

Each scenario run writes results/<name>/{params.json, checks.json,
datasets/*.csv} and, unless disabled, a figures/ directory with one PNG per
dataset.  checks.json is byte-identical for identical (config, seed).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .scenarios import ScenarioResult


def _jsonable(value):
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return value.item()
    return value


def write_params(result: ScenarioResult, out_dir: Path, extra: dict):
    payload = {"scenario": result.name,
               "params": {k: _jsonable(v) for k, v in result.parameters.items()}}
    payload.update(extra)
    with open(out_dir / "params.json", "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)


def write_checks(result: ScenarioResult, out_dir: Path) -> dict:
    payload = {
        "scenario": result.name,
        "all_passed": result.all_passed,
        "checks": [
            {"name": c.name, "expected": c.expected, "got": c.got,
             "tolerance": c.tolerance, "passed": c.passed, "kind": c.kind}
            for c in result.checks
        ],
    }
    with open(out_dir / "checks.json", "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
    return payload


def write_datasets(result: ScenarioResult, out_dir: Path):
    ds_dir = out_dir / "datasets"
    ds_dir.mkdir(exist_ok=True)
    for name, (columns, rows) in result.datasets.items():
        with open(ds_dir / f"{name}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([repr(float(v)) for v in row])


def write_datasets_json(result: ScenarioResult, out_dir: Path):
    payload = {name: {"columns": columns, "rows": [[float(v) for v in row] for row in rows]}
               for name, (columns, rows) in result.datasets.items()}
    with open(out_dir / "datasets.json", "w") as fh:
        json.dump(payload, fh, sort_keys=True)


def render_figures(result: ScenarioResult, out_dir: Path, max_points: int = 20000):
    """One line/marker plot per dataset, first column as the abscissa."""
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(exist_ok=True)
    for name, (columns, rows) in result.datasets.items():
        if rows.shape[0] < 2 or rows.shape[1] < 2:
            continue
        stride = max(1, rows.shape[0] // max_points)
        data = rows[::stride]
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        style = "-" if data.shape[0] > 40 else "o-"
        for j in range(1, data.shape[1]):
            ax.plot(data[:, 0], data[:, j], style, lw=1.0, ms=3, label=columns[j])
        ax.set_xlabel(columns[0])
        ax.set_title(f"{result.name}: {name}")
        if data.shape[1] > 2:
            ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(fig_dir / f"{name}.png", dpi=130)
        plt.close(fig)


def write_scenario(result: ScenarioResult, out_dir, seed: int, emit=("csv", "json"),
                   figures: bool = True) -> dict:
    """checks.json and params.json are always written; the emit flags select
    dataset formats (csv files and/or one datasets.json)."""
    out = Path(out_dir) / result.name
    out.mkdir(parents=True, exist_ok=True)
    write_params(result, out, {"seed": seed, "emit": sorted(emit)})
    payload = write_checks(result, out)
    if "csv" in emit:
        write_datasets(result, out)
    if "json" in emit:
        write_datasets_json(result, out)
    if figures:
        render_figures(result, out)
    return payload
