"""
Writers for study results: CSV tables, JSON reports and gnuplot data files.

Floats are written with a fixed format so identical runs produce identical files.
"""
import csv
import json
import math
from typing import Dict, Iterable, List, Optional, TextIO

import click
import numpy as np

from symstress.analysis import ConvergenceRow

CSV_COLUMNS = [
    "m",
    "h",
    "e_sigma_l2",
    "e_sigma_div",
    "e_sigma_hdiv",
    "e_u_l2",
    "rate_hdiv",
    "rate_u",
    "rate_sigma_l2",
    "beta",
]


def format_float(value: Optional[float], missing: str = "") -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return missing
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.12e}"


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    return str(value)


def _clean(value):
    """NaN and infinities become null so the output stays valid JSON."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (float, np.floating)) and not math.isfinite(float(value)):
        return None
    return value


def write_csv(rows: Iterable[ConvergenceRow], stream: TextIO):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([format_float(getattr(row, column)) for column in CSV_COLUMNS])


def write_dat(rows: Iterable[ConvergenceRow], stream: TextIO):
    """Whitespace-separated columns with a commented header; missing values are NaN."""
    stream.write("# " + " ".join(CSV_COLUMNS) + "\n")
    for row in rows:
        stream.write(" ".join(format_float(getattr(row, column), missing="NaN") for column in CSV_COLUMNS) + "\n")


def write_json(report: Dict, stream: TextIO):
    json.dump(_clean(report), stream, indent=2, sort_keys=True, default=_json_default)
    stream.write("\n")


def dumps(report: Dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, default=_json_default)


def save(path: str, writer, payload):
    """Run a writer against a file path; "-" means standard output."""
    with click.open_file(path, "w") as stream:
        writer(payload, stream)


def infsup_table(rows: List[Dict]) -> str:
    lines = [f"{'m':>4} {'h':>12} {'beta':>14}"]
    for row in rows:
        beta = row.get("beta")
        lines.append(f"{row['m']:>4} {row['h']:>12.6f} {format_float(beta, missing='failed'):>14}")
    return "\n".join(lines)
