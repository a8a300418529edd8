"""Command-line entry points: sweep runs, figure-data export, self-test."""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from ._kernels import backend_name
from .core import LinkSpec, RunSeed, SampledField
from .experiments import (
    FIGURE_IDS,
    ConfigError,
    desk_scale,
    export_figure_data,
    load_config,
    run_sweep,
)
from .fiber import ASE_OFF, AseModel, SsfmControl, convergence_self_check, ssfm_propagate
from .rx import dbp


@click.group()
@click.version_option(__version__)
def main():
    """Nonlinear WDM simulation and achievable-rate estimation."""


def _progress(rows):
    ok = all(r.status == "OK" for r in rows)
    r = rows[0]
    tag = "done" if ok else "FAILED"
    click.echo(f"[{time.strftime('%H:%M:%S')}] point P={r.power_dbm} dBm "
               f"N={r.subcarriers} Ns={r.span_count} Ls={r.span_length_km} km: "
               f"{tag} ({r.wall_time_s:.0f} s)")


def _load(config_path, desk):
    try:
        cfg = load_config(config_path)
    except (ConfigError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    if desk:
        cfg = desk_scale(cfg)
    return cfg


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="results",
              show_default=True, help="Output directory for results.csv and summary.json.")
@click.option("--workers", type=int, default=None,
              help="Parallel sweep-point workers (env SCMAIR_WORKERS overrides).")
@click.option("--desk-scale", "desk", is_flag=True,
              help="Apply the reduced-scale preset (fewer channels/symbols, coarser steps).")
def run(config_path, out_dir, workers, desk):
    """Run the sweep described by a YAML config and persist per-point results."""
    cfg = _load(config_path, desk)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    click.echo(f"backend: {backend_name()}; points: {len(cfg.points())}")
    summary = run_sweep(cfg, out_csv=out / "results.csv", workers=workers,
                        progress=_progress)
    with open(out / "summary.json", "w") as fh:
        json.dump({"best": summary.best, "n_rows": len(summary.rows),
                   "any_failed": summary.any_failed}, fh, indent=2, sort_keys=True)
    for det, best in sorted(summary.best.items()):
        click.echo(f"{det}: max SE {best['se']:.3f} bit/s/Hz/pol at "
                   f"{best['power_dbm']} dBm, N={best['subcarriers']}")
    if summary.any_failed:
        click.echo("some sweep points failed; see results.csv", err=True)
        sys.exit(1)


@main.command()
@click.argument("figure_id", type=click.Choice(FIGURE_IDS))
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True,
              help="Bundle directory for the figure CSVs and manifest.")
@click.option("--workers", type=int, default=None)
@click.option("--desk-scale", "desk", is_flag=True)
def figure(figure_id, config_path, out_dir, workers, desk):
    """Export the CSV data bundle backing one figure."""
    cfg = _load(config_path, desk)
    try:
        summary = export_figure_data(cfg, figure_id, out_dir, workers=workers)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"wrote figure {figure_id} bundle to {out_dir}")
    if summary.any_failed:
        click.echo("some sweep points failed; bundle is partial", err=True)
        sys.exit(1)


@main.command()
def selftest():
    """Quick numerical sanity checks: propagation round trip and step convergence."""
    rng = np.random.default_rng(RunSeed(7).generator("selftest").integers(2**32))
    fs = 200e9
    n = 4096
    u = (rng.normal(size=(2, n)) + 1j * rng.normal(size=(2, n)))
    u *= np.sqrt(1e-3 / np.mean(np.abs(u) ** 2))
    # band-limit to half the grid so demultiplexing assumptions hold
    spec = np.fft.fft(u, axis=-1)
    spec[:, n // 4: 3 * n // 4] = 0.0
    u = np.fft.ifft(spec, axis=-1)
    field = SampledField(u, fs, bandwidth=fs / 2.5)
    link = LinkSpec("ida", span_length_km=80.0, span_count=1)
    ctrl = SsfmControl(max_step_km=0.5, max_nl_phase_rad=0.01)
    out = ssfm_propagate(field, link, ctrl, ASE_OFF)
    back = dbp(out, link, ctrl)
    err = np.max(np.abs(back.samples - field.samples)) / np.max(np.abs(field.samples))
    ok_rt = err < 1e-9
    click.echo(f"round trip (propagate + backpropagate): max rel err {err:.2e} "
               f"[{'ok' if ok_rt else 'FAIL'}]")
    report = convergence_self_check(field, link, ctrl)
    ok_cv = report.deviation < 1e-3
    click.echo(f"step-halving convergence: rel deviation {report.deviation:.2e} "
               f"[{'ok' if ok_cv else 'FAIL'}]")
    click.echo(f"backend: {backend_name()}")
    if not (ok_rt and ok_cv):
        sys.exit(1)


if __name__ == "__main__":
    main()
