"""Loading and validation of figure-data bundles.

A bundle is a directory with a ``manifest.json`` and one or more CSV tables.
The manifest names the figure style, the plot axes, the data series, and the
table files.  Validation is strict: a missing table or column fails with a
message naming the offending item.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

SCHEMA_VERSION = 1

FIGURE_IDS = ("4a", "4b", "4c", "4d", "5a", "5b", "6a", "6b")

# required tables and columns per figure style
_MAX_SE_TABLES = {
    "max_se": ["distance_km", "detector", "max_se_bits_hz_pol",
               "argmax_power_dbm", "argmax_subcarriers"],
}
REQUIRED_COLUMNS: Dict[str, Dict[str, List[str]]] = {
    "4a": {"se_vs_power": ["detector", "subcarriers", "power_dbm",
                           "se_bits_hz_pol", "se_stderr"]},
    "4b": {"phase_trace": ["symbol", "theta_rad"],
           "phase_autocorr": ["lag", "autocovariance"]},
    "4c": {"stokes": ["symbol", "basis", "s1", "s2", "s3"]},
    "4d": {"params_vs_n": ["subcarriers", "sigma_n2_residual_norm",
                           "sigma_theta2", "sigma_p2_x3"]},
    "5a": _MAX_SE_TABLES,
    "5b": _MAX_SE_TABLES,
    "6a": _MAX_SE_TABLES,
    "6b": _MAX_SE_TABLES,
}


class BundleError(ValueError):
    """The bundle directory does not match the expected schema."""


@dataclass
class Bundle:
    figure: str
    axes: Dict[str, str]
    series: List[dict]
    tables: Dict[str, List[dict]] = field(repr=False)
    path: Path = Path(".")


def _read_table(path: Path) -> List[dict]:
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def load_bundle(directory) -> Bundle:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise BundleError(f"no manifest.json in {directory}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise BundleError(f"manifest.json is not valid JSON: {exc}") from exc

    for key in ("figure", "tables", "schema_version"):
        if key not in manifest:
            raise BundleError(f"manifest is missing required key '{key}'")
    if manifest["schema_version"] != SCHEMA_VERSION:
        raise BundleError(
            f"unsupported schema_version {manifest['schema_version']!r} "
            f"(expected {SCHEMA_VERSION})")
    figure = manifest["figure"]
    if figure not in FIGURE_IDS:
        raise BundleError(f"unknown figure id {figure!r}")

    required = REQUIRED_COLUMNS[figure]
    tables: Dict[str, List[dict]] = {}
    for name, columns in required.items():
        if name not in manifest["tables"]:
            raise BundleError(f"manifest lists no table '{name}' "
                              f"(required for figure {figure})")
        table_path = directory / manifest["tables"][name]
        if not table_path.is_file():
            raise BundleError(f"table file '{manifest['tables'][name]}' "
                              f"for table '{name}' is missing")
        rows = _read_table(table_path)
        if not rows:
            raise BundleError(f"table '{name}' is empty")
        for col in columns:
            if col not in rows[0]:
                raise BundleError(
                    f"table '{name}' is missing required column '{col}'")
        tables[name] = rows

    return Bundle(figure=figure,
                  axes=manifest.get("axes", {}),
                  series=manifest.get("series", []),
                  tables=tables,
                  path=directory)
