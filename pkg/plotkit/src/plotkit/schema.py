"""The file interfaces plotkit consumes, and their version checks.

A data file <stem>.csv (or <stem>.profiles.csv) is trusted only when the
sibling <stem>.summary.json declares the expected schema version.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

SCHEMA_VERSION = "chemoblow-summary-v1"

TRAJECTORY_COLUMNS = ("t", "dt", "mass", "linf", "psi", "phi", "I1", "I2",
                      "I3", "I4", "I5", "psi_rate_numeric",
                      "residual_mass_bound", "residual_psi_ineq", "phi_ratio")
PROFILE_COLUMNS = ("t", "r", "u")
SWEEP_RESULT_COLUMNS = ("outcome", "t_num", "t_lb_integral", "t_lb_explicit",
                        "m_star", "max_mass_margin", "phi_ratio_infimum",
                        "error")


class SchemaVersionError(ValueError):
    """Input does not carry the expected schema version."""


def summary_path_for(data_path: Path) -> Path:
    stem = data_path.name
    for suffix in (".profiles.csv", ".csv"):
        if stem.endswith(suffix):
            return data_path.with_name(stem[: -len(suffix)] + ".summary.json")
    raise SchemaVersionError(f"{data_path}: not a recognized data file name")


def load_summary(data_path) -> dict:
    """Load and version-check the sibling summary of a data file."""
    data_path = Path(data_path)
    spath = summary_path_for(data_path)
    if not spath.is_file():
        raise SchemaVersionError(f"{data_path}: missing sibling {spath.name}")
    summary = json.loads(spath.read_text())
    version = summary.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{spath}: schema_version {version!r} does not match expected "
            f"{SCHEMA_VERSION!r}")
    return summary


def load_table(path) -> dict[str, list]:
    """Read a CSV into columns; numeric where possible, strings otherwise."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns: dict[str, list] = {name: [] for name in header}
        for row in reader:
            for name, cell in zip(header, row):
                try:
                    columns[name].append(float(cell))
                except ValueError:
                    columns[name].append(cell)
    return columns


def axis_columns(table: dict[str, list]) -> list[str]:
    """Sweep axis columns: everything between 'name' and the result block."""
    names = list(table.keys())
    if not names or names[0] != "name":
        raise SchemaVersionError("sweep table must start with a name column")
    return [c for c in names[1:] if c not in SWEEP_RESULT_COLUMNS]


def is_nan(x) -> bool:
    return isinstance(x, float) and math.isnan(x)
