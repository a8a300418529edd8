"""Figure renderers: one matplotlib figure per bundle, deterministic output.

SVG output is byte-stable across runs: a fixed hash salt replaces the random
ids matplotlib would otherwise embed, and the creation date is stripped from
the metadata.
"""

from __future__ import annotations

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bundle import Bundle, BundleError  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "scmair-plots"

_DETECTOR_COLOR = {
    "awgn": "tab:blue",
    "pn": "tab:orange",
    "pn-per-pol": "tab:orange",
    "ppn": "tab:red",
}
_DETECTOR_LABEL = {
    "awgn": "AWGN model",
    "pn": "phase-walk model",
    "pn-per-pol": "per-pol phase-walk model",
    "ppn": "phase + polarization walk model",
}
_N_MARKER = {1: "o", 2: "s", 4: "^", 8: "D"}


def _color(detector: str) -> str:
    return _DETECTOR_COLOR.get(detector, "tab:gray")


def _label(detector: str) -> str:
    return _DETECTOR_LABEL.get(detector, detector)


def _save(fig, out_dir: Path, stem: str, fmt: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}.{fmt}"
    metadata = {"Date": None} if fmt == "svg" else None
    fig.savefig(path, format=fmt, metadata=metadata)
    plt.close(fig)
    return path


def _render_se_vs_power(bundle: Bundle, out_dir: Path, fmt: str) -> List[Path]:
    rows = bundle.tables["se_vs_power"]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    keys = sorted({(r["detector"], int(r["subcarriers"])) for r in rows})
    for detector, n_sc in keys:
        pts = sorted((float(r["power_dbm"]), float(r["se_bits_hz_pol"]),
                      float(r["se_stderr"])) for r in rows
                     if r["detector"] == detector
                     and int(r["subcarriers"]) == n_sc)
        p, se, err = (np.array(v) for v in zip(*pts))
        ax.errorbar(p, se, yerr=3 * err, color=_color(detector),
                    marker=_N_MARKER.get(n_sc, "x"), markersize=4,
                    linewidth=1.2, capsize=2,
                    label=f"{_label(detector)}, N={n_sc}")
    ax.set_xlabel(bundle.axes.get("x", "launch power [dBm]"))
    ax.set_ylabel(bundle.axes.get("y", "SE [bit/s/Hz/pol]"))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return [_save(fig, out_dir, "se_vs_power", fmt)]


def _render_phase_trace(bundle: Bundle, out_dir: Path, fmt: str) -> List[Path]:
    trace = bundle.tables["phase_trace"]
    acorr = bundle.tables["phase_autocorr"]
    k = np.array([int(r["symbol"]) for r in trace])
    theta = np.array([float(r["theta_rad"]) for r in trace])
    lag = np.array([int(r["lag"]) for r in acorr])
    cov = np.array([float(r["autocovariance"]) for r in acorr])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(k, theta, color="tab:red", linewidth=0.8,
            label="posterior-mean phase")
    ax.set_xlabel(bundle.axes.get("x", "symbol index"))
    ax.set_ylabel(bundle.axes.get("y", "phase [rad]"))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8, loc="upper left")
    inset = ax.inset_axes([0.62, 0.08, 0.34, 0.32])
    inset.plot(lag, cov / cov[0] if cov[0] else cov, color="tab:blue",
               linewidth=0.9)
    inset.set_title("phase autocorrelation", fontsize=7)
    inset.tick_params(labelsize=6)
    inset.grid(True, alpha=0.3)
    fig.tight_layout()
    return [_save(fig, out_dir, "phase_trace", fmt)]


def _render_stokes(bundle: Bundle, out_dir: Path, fmt: str) -> List[Path]:
    rows = bundle.tables["stokes"]
    fig = plt.figure(figsize=(5.2, 5.2))
    ax = fig.add_subplot(projection="3d")
    # wireframe unit sphere for reference
    u = np.linspace(0, 2 * np.pi, 24)
    v = np.linspace(0, np.pi, 12)
    xs = np.outer(np.cos(u), np.sin(v))
    ys = np.outer(np.sin(u), np.sin(v))
    zs = np.outer(np.ones_like(u), np.cos(v))
    ax.plot_wireframe(xs, ys, zs, color="0.85", linewidth=0.3)
    for basis, color in (("S1", "tab:blue"), ("S2", "tab:orange"),
                         ("S3", "tab:red")):
        pts = [(float(r["s1"]), float(r["s2"]), float(r["s3"]))
               for r in rows if r["basis"] == basis]
        if not pts:
            continue
        arr = np.array(pts)
        ax.plot(arr[:, 0], arr[:, 1], arr[:, 2], color=color, linewidth=0.7,
                label=f"image of {basis}")
    ax.set_xlabel(bundle.axes.get("x", "S1"))
    ax.set_ylabel(bundle.axes.get("y", "S2"))
    ax.set_zlabel(bundle.axes.get("z", "S3"))
    ax.set_box_aspect((1, 1, 1))
    ax.legend(fontsize=7, loc="upper left")
    fig.tight_layout()
    return [_save(fig, out_dir, "stokes_sphere", fmt)]


def _render_params_vs_n(bundle: Bundle, out_dir: Path, fmt: str) -> List[Path]:
    rows = sorted(bundle.tables["params_vs_n"],
                  key=lambda r: int(r["subcarriers"]))
    n = np.array([int(r["subcarriers"]) for r in rows])
    series = [
        ("sigma_n2_residual_norm", "normalized residual noise", "tab:blue"),
        ("sigma_theta2", "phase walk variance", "tab:red"),
        ("sigma_p2_x3", "polarization walk variance (x3)", "tab:orange"),
    ]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    width = 0.25
    x = np.arange(len(n), dtype=float)
    for i, (col, label, color) in enumerate(series):
        vals = np.array([float(r[col]) for r in rows])
        ax.bar(x + (i - 1) * width, np.clip(vals, 1e-12, None), width,
               color=color, label=label)
    ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels([str(v) for v in n])
    ax.set_xlabel(bundle.axes.get("x", "number of subcarriers"))
    ax.set_ylabel(bundle.axes.get("y", "fitted parameter"))
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return [_save(fig, out_dir, "params_vs_n", fmt)]


def _render_max_se(bundle: Bundle, out_dir: Path, fmt: str) -> List[Path]:
    rows = bundle.tables["max_se"]
    axis_key = bundle.axes.get("x", "span_count")
    if axis_key not in rows[0]:
        raise BundleError(
            f"table 'max_se' is missing required column '{axis_key}'")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for detector in sorted({r["detector"] for r in rows}):
        pts = sorted((float(r[axis_key]), float(r["max_se_bits_hz_pol"]))
                     for r in rows if r["detector"] == detector)
        xv, yv = (np.array(v) for v in zip(*pts))
        ax.plot(xv, yv, color=_color(detector), marker="o", markersize=4,
                linewidth=1.2, label=_label(detector))
    ax.set_xlabel(axis_key.replace("_", " "))
    ax.set_ylabel(bundle.axes.get("y", "max SE [bit/s/Hz/pol]"))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return [_save(fig, out_dir, "max_se", fmt)]


_RENDERERS = {
    "4a": _render_se_vs_power,
    "4b": _render_phase_trace,
    "4c": _render_stokes,
    "4d": _render_params_vs_n,
    "5a": _render_max_se,
    "5b": _render_max_se,
    "6a": _render_max_se,
    "6b": _render_max_se,
}


def render_bundle(bundle: Bundle, out_dir, fmt: str = "svg") -> List[Path]:
    """Render one bundle into ``out_dir``; returns the written file paths."""
    if fmt not in ("svg", "png"):
        raise ValueError(f"unsupported format {fmt!r}")
    return _RENDERERS[bundle.figure](bundle, Path(out_dir), fmt)
