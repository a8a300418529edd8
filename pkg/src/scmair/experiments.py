"""Experiment runner: declarative sweep configs, the full TX-fiber-RX-AIR
pipeline per sweep point, CSV persistence, and figure-data export."""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .air import (
    AirEstimate,
    air_awgn,
    air_particle,
    air_pn_per_pol,
    estimate_gain_noise,
    estimate_walk_variances,
    fit_awgn_moments,
    export_state_track,
    spectral_efficiency,
)
from .auxch import AwgnParams, PnParams, PpnParams
from .core import LinkSpec, RunSeed, dbm_to_watts
from .fiber import AseModel, SsfmControl, ssfm_propagate
from .rx import DemuxSpec, dbp, demux, matched_filter_bank
from .tx import TxConfig, draw_cscg_symbols, scm_modulate, wdm_multiplex

SCHEMA_VERSION = 1

DETECTORS = ("awgn", "pn", "pn-per-pol", "ppn")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # link
    amplification: str = "ida"
    span_length_km: float = 100.0
    span_count: int = 10
    attenuation_db_km: float = 0.2
    beta2_ps2_km: float = -21.7
    gamma_w_km: float = 1.27
    eta: Optional[float] = None  # default: 1.0 IDA, 1.6 LA
    dispersion_managed: bool = False
    # tx
    channel_count: int = 5
    channel_spacing_ghz: float = 50.0
    pol_count: int = 2
    oversampling: int = 2
    # detectors and sweep axes
    detectors: Tuple[str, ...] = ("awgn", "ppn")
    launch_power_dbm: Tuple[float, ...] = (-7.0,)
    subcarriers: Tuple[int, ...] = (4,)
    span_count_sweep: Tuple[int, ...] = ()
    span_length_km_sweep: Tuple[float, ...] = ()
    # run scale
    symbols_k: int = 100000
    training_k: int = 10000
    particles_pn: int = 256
    particles_ppn: int = 1024
    search_particles: int = 128
    seed: int = 1
    workers: int = 1
    # ssfm control
    max_step_km: float = 0.1
    max_nl_phase_rad: float = 1e-3

    def __post_init__(self):
        if not self.detectors:
            raise ConfigError("at least one detector is required")
        for d in self.detectors:
            if d not in DETECTORS:
                raise ConfigError(f"unknown detector {d!r}")
        if "ppn" in self.detectors and self.pol_count != 2:
            raise ConfigError("the PPN detector requires pol_count = 2")
        if "pn" in self.detectors and self.pol_count != 1:
            raise ConfigError("detector 'pn' is 1-pol; use 'pn-per-pol' for 2-pol")
        for name in ("launch_power_dbm", "subcarriers"):
            if not getattr(self, name):
                raise ConfigError(f"sweep axis {name} must be non-empty")

    @property
    def channel_spacing(self) -> float:
        return self.channel_spacing_ghz * 1e9

    def effective_eta(self) -> float:
        if self.eta is not None:
            return self.eta
        return 1.0 if self.amplification == "ida" else 1.6

    def link(self, span_count: int, span_length_km: float) -> LinkSpec:
        link = LinkSpec(
            amplification=self.amplification,
            span_length_km=span_length_km,
            span_count=span_count,
            attenuation_db_km=self.attenuation_db_km,
            beta2_ps2_km=self.beta2_ps2_km,
            gamma_w_km=self.gamma_w_km,
            eta=self.effective_eta(),
        )
        if self.dispersion_managed:
            link = link.with_dcf_matched()
        return link

    def ssfm_control(self) -> SsfmControl:
        return SsfmControl(self.max_step_km, self.max_nl_phase_rad)

    def points(self) -> List[Dict]:
        ns_axis = self.span_count_sweep or (self.span_count,)
        ls_axis = self.span_length_km_sweep or (self.span_length_km,)
        pts = []
        for p, n, ns, ls in itertools.product(
                self.launch_power_dbm, self.subcarriers, ns_axis, ls_axis):
            pts.append({"power_dbm": float(p), "subcarriers": int(n),
                        "span_count": int(ns), "span_length_km": float(ls)})
        return pts


DESK_SCALE_OVERRIDES = dict(
    channel_count=3,
    symbols_k=20000,
    training_k=5000,
    particles_pn=256,
    particles_ppn=1024,
    max_step_km=2.0,
    max_nl_phase_rad=0.05,
)


def desk_scale(cfg: ExperimentConfig) -> ExperimentConfig:
    return replace(cfg, **DESK_SCALE_OVERRIDES)


_CONFIG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    version = raw.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("detectors", "launch_power_dbm", "subcarriers",
                "span_count_sweep", "span_length_km_sweep"):
        if key in raw and raw[key] is not None:
            raw[key] = tuple(raw[key])
    try:
        return ExperimentConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Result rows
# ---------------------------------------------------------------------------

RESULT_COLUMNS = [
    "link_type", "dispersion_managed", "span_count", "span_length_km",
    "pol_count", "channel_count", "subcarriers", "power_dbm", "detector",
    "se_bits_hz_pol", "se_stderr", "airs_bits", "air_stderrs",
    "a_fit", "sigma_n2_fit", "sigma_theta2_fit", "sigma_p2_fit",
    "sigma_ase2_analytic", "sigma_x2", "wall_time_s", "seed", "status",
    "message",
]


@dataclass
class ResultRow:
    link_type: str
    dispersion_managed: bool
    span_count: int
    span_length_km: float
    pol_count: int
    channel_count: int
    subcarriers: int
    power_dbm: float
    detector: str
    se_bits_hz_pol: float = math.nan
    se_stderr: float = math.nan
    airs_bits: Tuple[float, ...] = ()
    air_stderrs: Tuple[float, ...] = ()
    a_fit: float = math.nan  # central subcarrier
    sigma_n2_fit: float = math.nan
    sigma_theta2_fit: float = math.nan
    sigma_p2_fit: float = math.nan
    sigma_ase2_analytic: float = math.nan
    sigma_x2: float = math.nan
    wall_time_s: float = 0.0
    seed: int = 0
    status: str = "OK"
    message: str = ""

    def to_csv_dict(self) -> Dict[str, str]:
        d = dataclasses.asdict(self)
        d["airs_bits"] = ";".join(f"{v:.6f}" for v in self.airs_bits)
        d["air_stderrs"] = ";".join(f"{v:.6f}" for v in self.air_stderrs)
        d["dispersion_managed"] = str(self.dispersion_managed).lower()
        return {k: str(d[k]) for k in RESULT_COLUMNS}

    def sort_key(self):
        return (self.span_count, self.span_length_km, self.subcarriers,
                self.power_dbm, self.detector)


def analytic_ase_symbol_variance(link: LinkSpec, symbol_time: float) -> float:
    """Linearly accumulated ASE variance per symbol per pol after matched filtering."""
    hv = link.photon_energy_j
    alpha = link.alpha_inv_m
    span_m = link.span_length_km * 1e3
    if link.amplification == "ida":
        psd = link.eta * hv * alpha * span_m * link.span_count
    elif link.dcf is None:
        g = math.exp(alpha * span_m)
        psd = link.span_count * link.eta * hv * (g - 1.0)
    else:
        dcf = link.dcf
        off = 10.0 ** (-dcf.launch_offset_db / 10.0)
        a_dcf = dcf.attenuation_db_km * math.log(10.0) / 10.0 * 1e-3
        g1 = math.exp(alpha * span_m) * off
        g2 = math.exp(a_dcf * dcf.length_km * 1e3) / off
        psd = link.span_count * hv * (dcf.amp_eta * (g1 - 1.0) / off
                                      + link.eta * (g2 - 1.0))
    return psd / symbol_time


# ---------------------------------------------------------------------------
# Pipeline per sweep point
# ---------------------------------------------------------------------------


def _propagate_block(cfg: ExperimentConfig, link: LinkSpec, tx_cfg: TxConfig,
                     seed: RunSeed, block: str):
    """Steps 1-2 + receiver chain: returns (x_grid, y_grid) for the COI."""
    rng_sym = seed.generator(f"symbols-{block}")
    grids = [
        draw_cscg_symbols(tx_cfg.symbols_per_subcarrier, tx_cfg.subcarriers,
                          tx_cfg.pol_count, tx_cfg.symbol_variance_w, rng_sym,
                          tx_cfg.subcarrier_spacing, tx_cfg.symbol_time)
        for _ in range(tx_cfg.channel_count)
    ]
    fields = [scm_modulate(g, tx_cfg) for g in grids]
    agg = wdm_multiplex(fields, tx_cfg.channel_spacing)
    ctrl = cfg.ssfm_control()
    out = ssfm_propagate(agg, link, ctrl, AseModel(),
                         seed.generator(f"ase-{block}"))
    coi = demux(out, DemuxSpec(0, tx_cfg.channel_spacing, tx_cfg.channel_spacing))
    backprop = dbp(coi, link, ctrl)
    y_grid = matched_filter_bank(backprop, tx_cfg.subcarriers, tx_cfg.symbol_time)
    x_grid = grids[tx_cfg.channel_count // 2]  # central channel is the COI
    return x_grid, y_grid


def run_point(cfg: ExperimentConfig, point: Dict,
              collect_track: bool = False):
    """Execute the full pipeline at one sweep point; one row per detector.

    Returns (rows, track) where ``track`` is the PPN posterior state track of
    a central subcarrier when requested (and the PPN detector is active).
    """
    t_start = time.time()
    seed = RunSeed(cfg.seed).child(
        "pt|P{power_dbm}|N{subcarriers}|Ns{span_count}|Ls{span_length_km}".format(**point))
    link = cfg.link(point["span_count"], point["span_length_km"])
    n_sc = point["subcarriers"]
    power_w = dbm_to_watts(point["power_dbm"])
    tx_cfg = TxConfig(
        channel_count=cfg.channel_count,
        channel_spacing=cfg.channel_spacing,
        subcarriers=n_sc,
        symbols_per_subcarrier=cfg.symbols_k,
        launch_power_w=power_w,
        pol_count=cfg.pol_count,
        oversampling=cfg.oversampling,
    )
    tx_train = replace(tx_cfg, symbols_per_subcarrier=cfg.training_k)
    sigma_x2 = tx_cfg.symbol_variance_w

    xt, yt = _propagate_block(cfg, link, tx_train, seed, "train")
    xd, yd = _propagate_block(cfg, link, tx_cfg, seed, "data")

    central = n_sc // 2
    sigma_ase2 = analytic_ase_symbol_variance(link, tx_cfg.symbol_time)

    per_detector_airs: Dict[str, List[AirEstimate]] = {d: [] for d in cfg.detectors}
    central_fits: Dict[str, Dict[str, float]] = {d: {} for d in cfg.detectors}
    track = None
    if "awgn" in cfg.detectors:
        # one moment fit pooled over subcarriers and polarizations: the
        # memoryless-model AIR is then invariant under unitary regrouping of
        # the symbols, so it cannot depend on the subcarrier count
        awgn_params = fit_awgn_moments(xt.symbols, yt.symbols)
    for i in range(n_sc):
        xtr = xt.symbols[:, i, :]
        ytr = yt.symbols[:, i, :]
        xda = xd.symbols[:, i, :]
        yda = yd.symbols[:, i, :]
        a_fit, sn2 = estimate_gain_noise(xtr, ytr)
        for det in cfg.detectors:
            rng = seed.generator(f"air-{det}-sc{i}")
            if det == "awgn":
                est = air_awgn(xda, yda, awgn_params, sigma_x2, subcarrier=i,
                               refit_phase=False)
                fits = {"a": awgn_params.a, "sigma_n2": awgn_params.sigma_n2}
            elif det in ("pn", "pn-per-pol"):
                params = estimate_walk_variances(
                    xtr, ytr, a_fit, sn2, det, cfg.search_particles,
                    seed.child(f"fit-{det}-sc{i}"), sigma_x2)
                if det == "pn":
                    est = air_particle(xda.reshape(-1), yda.reshape(-1), params,
                                       cfg.particles_pn, rng, sigma_x2,
                                       subcarrier=i)
                else:
                    est = air_pn_per_pol(xda, yda, params, cfg.particles_pn,
                                         rng, sigma_x2, subcarrier=i)
                fits = {"a": a_fit, "sigma_n2": sn2,
                        "sigma_theta2": params.sigma_theta2}
            else:  # ppn
                params = estimate_walk_variances(
                    xtr, ytr, a_fit, sn2, "ppn", cfg.search_particles,
                    seed.child(f"fit-ppn-sc{i}"), sigma_x2)
                est = air_particle(xda, yda, params, cfg.particles_ppn, rng,
                                   sigma_x2, subcarrier=i)
                fits = {"a": a_fit, "sigma_n2": sn2,
                        "sigma_theta2": params.sigma_theta2,
                        "sigma_p2": params.sigma_p2}
                if collect_track and i == central:
                    track = export_state_track(
                        xda, yda, params, cfg.particles_ppn,
                        seed.generator("state-track"))
            per_detector_airs[det].append(est)
            if i == central:
                central_fits[det] = fits

    rows = []
    for det in cfg.detectors:
        airs = per_detector_airs[det]
        se = spectral_efficiency(airs, tx_cfg.channel_spacing, tx_cfg.symbol_time)
        fits = central_fits[det]
        rows.append(ResultRow(
            link_type=cfg.amplification,
            dispersion_managed=cfg.dispersion_managed,
            span_count=point["span_count"],
            span_length_km=point["span_length_km"],
            pol_count=cfg.pol_count,
            channel_count=cfg.channel_count,
            subcarriers=n_sc,
            power_dbm=point["power_dbm"],
            detector=det,
            se_bits_hz_pol=se.se,
            se_stderr=se.stderr,
            airs_bits=tuple(e.value for e in airs),
            air_stderrs=tuple(e.stderr for e in airs),
            a_fit=fits.get("a", math.nan),
            sigma_n2_fit=fits.get("sigma_n2", math.nan),
            sigma_theta2_fit=fits.get("sigma_theta2", math.nan),
            sigma_p2_fit=fits.get("sigma_p2", math.nan),
            sigma_ase2_analytic=sigma_ase2,
            sigma_x2=sigma_x2,
            wall_time_s=time.time() - t_start,
            seed=seed.master,
        ))
    return rows, track


def _failed_rows(cfg: ExperimentConfig, point: Dict, message: str) -> List[ResultRow]:
    return [ResultRow(
        link_type=cfg.amplification, dispersion_managed=cfg.dispersion_managed,
        span_count=point["span_count"], span_length_km=point["span_length_km"],
        pol_count=cfg.pol_count, channel_count=cfg.channel_count,
        subcarriers=point["subcarriers"], power_dbm=point["power_dbm"],
        detector=det, status="FAILED", message=message)
        for det in cfg.detectors]


def _point_worker(args):
    cfg, point = args
    try:
        rows, _ = run_point(cfg, point)
        return rows
    except Exception as exc:  # noqa: BLE001 - partial-failure tolerant by contract
        return _failed_rows(cfg, point, f"{type(exc).__name__}: {exc}")


@dataclass
class SweepSummary:
    rows: List[ResultRow]
    best: Dict[str, Dict]  # per detector: best SE and its argmax point

    @property
    def any_failed(self) -> bool:
        return any(r.status != "OK" for r in self.rows)


def summarize(rows: Sequence[ResultRow]) -> Dict[str, Dict]:
    best: Dict[str, Dict] = {}
    for r in rows:
        if r.status != "OK" or not np.isfinite(r.se_bits_hz_pol):
            continue
        cur = best.get(r.detector)
        if cur is None or r.se_bits_hz_pol > cur["se"]:
            best[r.detector] = {
                "se": r.se_bits_hz_pol, "power_dbm": r.power_dbm,
                "subcarriers": r.subcarriers, "span_count": r.span_count,
                "span_length_km": r.span_length_km,
            }
    return best


def write_rows_csv(rows: Sequence[ResultRow], path):
    rows = sorted(rows, key=lambda r: r.sort_key())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS,
                                quoting=csv.QUOTE_MINIMAL)
        writer.writeheader()
        for r in rows:
            writer.writerow(r.to_csv_dict())
    os.replace(tmp, path)


def run_sweep(cfg: ExperimentConfig, out_csv=None,
              workers: Optional[int] = None,
              progress=None) -> SweepSummary:
    """Run the Cartesian sweep; order-independent results, tolerant of failures."""
    points = cfg.points()
    workers = workers or cfg.workers
    env_workers = os.environ.get("SCMAIR_WORKERS")
    if env_workers:
        workers = int(env_workers)
    rows: List[ResultRow] = []
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_point_worker, [(cfg, p) for p in points]):
                rows.extend(out)
                if progress:
                    progress(out)
    else:
        for p in points:
            out = _point_worker((cfg, p))
            rows.extend(out)
            if progress:
                progress(out)
    if out_csv is not None:
        write_rows_csv(rows, out_csv)
    return SweepSummary(rows=rows, best=summarize(rows))


# ---------------------------------------------------------------------------
# Figure-data export (CSV bundles consumed by the plotting frontend)
# ---------------------------------------------------------------------------

FIGURE_IDS = ("4a", "4b", "4c", "4d", "5a", "5b", "6a", "6b")


def _write_table(path, header: Sequence[str], rows: Sequence[Sequence]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        w.writerow(header)
        for r in rows:
            w.writerow(r)


def _manifest(out_dir: Path, figure: str, axes: Dict, series: List[Dict],
              tables: Dict[str, str]):
    payload = {"figure": figure, "axes": axes, "series": series,
               "tables": tables, "schema_version": SCHEMA_VERSION}
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def export_figure_data(cfg: ExperimentConfig, figure: str, out_dir,
                       workers: Optional[int] = None) -> SweepSummary:
    """Run the sweep(s) backing one figure and write its CSV bundle."""
    if figure not in FIGURE_IDS:
        raise ConfigError(f"unknown figure id {figure!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if figure == "4a":
        return _export_fig4a(cfg, out_dir, workers)
    if figure in ("4b", "4c"):
        return _export_fig4bc(cfg, out_dir, figure)
    if figure == "4d":
        return _export_fig4d(cfg, out_dir, workers)
    return _export_max_se(cfg, out_dir, figure, workers)


def build_se_vs_power_bundle(rows: Sequence[ResultRow], out_dir) -> None:
    """Write the SE-vs-launch-power bundle (one series per detector and N)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [r for r in rows if r.status == "OK"]
    table = [(r.detector, r.subcarriers, r.power_dbm, f"{r.se_bits_hz_pol:.6f}",
              f"{r.se_stderr:.6f}") for r in sorted(rows, key=lambda r: r.sort_key())]
    _write_table(out_dir / "se_vs_power.csv",
                 ["detector", "subcarriers", "power_dbm", "se_bits_hz_pol",
                  "se_stderr"], table)
    series = sorted({(r.detector, r.subcarriers) for r in rows})
    _manifest(out_dir, "4a",
              axes={"x": "launch power [dBm]", "y": "SE [bit/s/Hz/pol]"},
              series=[{"name": f"{d} N={n}", "detector": d, "subcarriers": n}
                      for d, n in series],
              tables={"se_vs_power": "se_vs_power.csv"})


def _export_fig4a(cfg, out_dir: Path, workers) -> SweepSummary:
    summary = run_sweep(cfg, out_csv=out_dir / "rows.csv", workers=workers)
    build_se_vs_power_bundle(summary.rows, out_dir)
    return summary


def build_phase_trace_bundle(track, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    k = np.arange(track.theta_mean.shape[0])
    _write_table(out_dir / "phase_trace.csv", ["symbol", "theta_rad"],
                 [(int(i), f"{v:.8f}") for i, v in zip(k, track.theta_mean)])
    lags = np.arange(track.theta_autocov.shape[0])
    _write_table(out_dir / "phase_autocorr.csv", ["lag", "autocovariance"],
                 [(int(l), f"{v:.10g}") for l, v in zip(lags, track.theta_autocov)])
    _manifest(out_dir, "4b",
              axes={"x": "symbol index", "y": "phase [rad]"},
              series=[{"name": "posterior-mean phase"},
                      {"name": "autocorrelation (inset)"}],
              tables={"phase_trace": "phase_trace.csv",
                      "phase_autocorr": "phase_autocorr.csv"})


def build_stokes_bundle(track, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    step = max(1, track.stokes_rotation.shape[0] // 4000)
    rows_out = []
    for k in range(0, track.stokes_rotation.shape[0], step):
        r = track.stokes_rotation[k]
        for b, name in enumerate(("S1", "S2", "S3")):
            v = r[:, b]
            rows_out.append((k, name, f"{v[0]:.6f}", f"{v[1]:.6f}",
                             f"{v[2]:.6f}"))
    _write_table(out_dir / "stokes.csv", ["symbol", "basis", "s1", "s2", "s3"],
                 rows_out)
    _manifest(out_dir, "4c",
              axes={"x": "S1", "y": "S2", "z": "S3"},
              series=[{"name": b} for b in ("S1", "S2", "S3")],
              tables={"stokes": "stokes.csv"})


def _export_fig4bc(cfg, out_dir: Path, figure: str) -> SweepSummary:
    point = cfg.points()[0]
    rows, track = run_point(cfg, point, collect_track=True)
    if track is None:
        raise ConfigError("figures 4b/4c require the ppn detector")
    if figure == "4b":
        build_phase_trace_bundle(track, out_dir)
    else:
        build_stokes_bundle(track, out_dir)
    return SweepSummary(rows=rows, best=summarize(rows))


def build_params_vs_n_bundle(rows: Sequence[ResultRow], out_dir) -> None:
    """Fitted PPN parameters vs subcarrier count, with the stated normalizations."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [r for r in rows if r.status == "OK" and r.detector == "ppn"]
    rows = sorted(rows, key=lambda r: r.subcarriers)
    table = []
    for r in rows:
        resid = (r.sigma_n2_fit - r.sigma_ase2_analytic) / (r.a_fit ** 2 * r.sigma_x2)
        table.append((r.subcarriers, f"{resid:.6e}", f"{r.sigma_theta2_fit:.6e}",
                      f"{3.0 * r.sigma_p2_fit:.6e}"))
    _write_table(out_dir / "params_vs_n.csv",
                 ["subcarriers", "sigma_n2_residual_norm", "sigma_theta2",
                  "sigma_p2_x3"], table)
    _manifest(out_dir, "4d",
              axes={"x": "number of subcarriers", "y": "fitted parameter"},
              series=[{"name": "normalized residual noise"},
                      {"name": "phase walk variance"},
                      {"name": "polarization walk variance (x3)"}],
              tables={"params_vs_n": "params_vs_n.csv"})


def _export_fig4d(cfg, out_dir: Path, workers) -> SweepSummary:
    if len(cfg.launch_power_dbm) != 1:
        raise ConfigError("figure 4d is computed at a single launch power")
    summary = run_sweep(cfg, out_csv=out_dir / "rows.csv", workers=workers)
    build_params_vs_n_bundle(summary.rows, out_dir)
    return summary


def _export_max_se(cfg, out_dir: Path, figure: str, workers) -> SweepSummary:
    """Figures 5a/5b/6a/6b: max SE (over power and N) vs a link axis."""
    if figure == "5b":
        axis_name, axis_key = "span_length_km", "span_length_km"
        axis = cfg.span_length_km_sweep
    else:
        axis_name, axis_key = "span_count", "span_count"
        axis = cfg.span_count_sweep
    if not axis:
        raise ConfigError(f"figure {figure} needs the {axis_name} sweep axis")
    summary = run_sweep(cfg, out_csv=out_dir / "rows.csv", workers=workers)
    build_max_se_bundle(summary.rows, axis_key, figure, out_dir)
    return summary


def build_max_se_bundle(rows: Sequence[ResultRow], axis_key: str,
                        figure: str, out_dir) -> None:
    """Max SE (over power and N) against one link axis, one series per detector."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ok = [r for r in rows if r.status == "OK"]
    detectors = sorted({r.detector for r in ok})
    table = []
    for value in sorted({getattr(r, axis_key) for r in ok}):
        group = [r for r in ok if getattr(r, axis_key) == value]
        for det in detectors:
            det_rows = [r for r in group if r.detector == det]
            if not det_rows:
                continue
            best = max(det_rows, key=lambda r: r.se_bits_hz_pol)
            distance = best.span_count * best.span_length_km
            table.append((value, f"{distance:.1f}", det,
                          f"{best.se_bits_hz_pol:.6f}", best.power_dbm,
                          best.subcarriers))
    _write_table(out_dir / "max_se.csv",
                 [axis_key, "distance_km", "detector", "max_se_bits_hz_pol",
                  "argmax_power_dbm", "argmax_subcarriers"], table)
    _manifest(out_dir, figure,
              axes={"x": axis_key, "y": "max SE [bit/s/Hz/pol]"},
              series=[{"name": det, "detector": det} for det in detectors],
              tables={"max_se": "max_se.csv"})
