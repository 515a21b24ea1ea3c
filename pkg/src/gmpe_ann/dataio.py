"""Catalog ingestion and lossless model serialization.

Catalogs are UTF-8 comma-delimited text with a header row.  Model files are
UTF-8 JSON carrying every parameter in shortest round-trip decimal form, so
read(write(model)) reproduces the weights bit-exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import GroundMotionRecord, NetworkModel, Normalization, Target
from .errors import CatalogError, ModelFormatError

MODEL_FORMAT_VERSION = "1"

REQUIRED_COLUMNS = ("event_id", "station_id", "mw", "vs30_mps", "rjb_km",
                    "pga_cmps2", "pgv_cmps")
OPTIONAL_COLUMNS = ("baseline_pga_cmps2", "baseline_pgv_cmps")


@dataclass
class CatalogReport:
    """Row-level outcome of reading a catalog."""

    n_rows: int = 0
    n_loaded: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def n_rejected(self) -> int:
        return len(self.errors)


def _parse_positive(row: dict, column: str, line_num: int) -> float:
    raw = (row.get(column) or "").strip()
    try:
        value = float(raw)
    except ValueError:
        raise CatalogError(f"line {line_num}: {column} is not a number: {raw!r}")
    if not math.isfinite(value):
        raise CatalogError(f"line {line_num}: {column} is not finite: {raw!r}")
    if column != "mw" and value <= 0:
        raise CatalogError(f"line {line_num}: {column} must be > 0, got {raw!r}")
    return value


def _parse_optional(row: dict, column: str, line_num: int) -> float | None:
    raw = (row.get(column) or "").strip()
    if raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise CatalogError(f"line {line_num}: {column} is not a number: {raw!r}")
    if not math.isfinite(value):
        raise CatalogError(f"line {line_num}: {column} is not finite: {raw!r}")
    return value


def read_catalog(path, strict: bool = False) -> tuple[list[GroundMotionRecord], CatalogReport]:
    """Read a catalog file, returning valid records plus a validation report.

    Rows that fail to parse or break a record invariant are collected in the
    report with their line number; in strict mode any bad row raises instead.
    A missing required column is always a hard error.
    """
    path = Path(path)
    report = CatalogReport()
    records: list[GroundMotionRecord] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CatalogError(f"{path}: empty file, no header row")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise CatalogError(f"{path}: missing required columns: {', '.join(missing)}")
        has_baseline_pga = "baseline_pga_cmps2" in reader.fieldnames
        has_baseline_pgv = "baseline_pgv_cmps" in reader.fieldnames
        for row in reader:
            report.n_rows += 1
            line_num = reader.line_num
            try:
                if any(row.get(c) is None for c in REQUIRED_COLUMNS) or row.get(None):
                    raise CatalogError(f"line {line_num}: wrong number of fields")
                rec = GroundMotionRecord(
                    event_id=row["event_id"].strip(),
                    station_id=row["station_id"].strip(),
                    magnitude=_parse_positive(row, "mw", line_num),
                    vs30=_parse_positive(row, "vs30_mps", line_num),
                    rjb=_parse_positive(row, "rjb_km", line_num),
                    pga=_parse_positive(row, "pga_cmps2", line_num),
                    pgv=_parse_positive(row, "pgv_cmps", line_num),
                    baseline_pga=(_parse_optional(row, "baseline_pga_cmps2", line_num)
                                  if has_baseline_pga else None),
                    baseline_pgv=(_parse_optional(row, "baseline_pgv_cmps", line_num)
                                  if has_baseline_pgv else None),
                )
            except CatalogError as err:
                if strict:
                    raise
                report.errors.append((line_num, str(err)))
                continue
            records.append(rec)
    report.n_loaded = len(records)
    return records, report


def write_model(model: NetworkModel, path) -> None:
    """Write a model as versioned JSON at full round-trip precision."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "target": model.target.value,
        "hidden_count": model.hidden_count,
        "input_hidden_weights": model.input_hidden_weights.tolist(),
        "hidden_biases": model.hidden_biases.tolist(),
        "hidden_output_weights": model.hidden_output_weights.tolist(),
        "output_bias": model.output_bias,
        "normalization": {
            "mag_div": model.normalization.mag_div,
            "vs30_div": model.normalization.vs30_div,
            "rjb_div": model.normalization.rjb_div,
            "log_out_div": model.normalization.log_out_div,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise ModelFormatError(f"{path}: missing field {key!r}")
    return doc[key]


def read_model(path) -> NetworkModel:
    """Read a model file written by write_model, validating shape and version."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ModelFormatError(f"{path}: not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: top-level value must be an object")

    version = str(_require(doc, "format_version", path))
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format_version {version!r}, this reader supports "
            f"{MODEL_FORMAT_VERSION!r}")

    target_raw = _require(doc, "target", path)
    try:
        target = Target(target_raw)
    except ValueError:
        raise ModelFormatError(f"{path}: unknown target {target_raw!r}")

    hidden_count = _require(doc, "hidden_count", path)
    if not isinstance(hidden_count, int):
        raise ModelFormatError(f"{path}: hidden_count must be an integer")

    w = _require(doc, "input_hidden_weights", path)
    b = _require(doc, "hidden_biases", path)
    v = _require(doc, "hidden_output_weights", path)
    out_bias = _require(doc, "output_bias", path)
    norm_doc = _require(doc, "normalization", path)
    if not isinstance(norm_doc, dict):
        raise ModelFormatError(f"{path}: normalization must be an object")
    for key in ("mag_div", "vs30_div", "rjb_div", "log_out_div"):
        if key not in norm_doc:
            raise ModelFormatError(f"{path}: normalization missing field {key!r}")

    try:
        w_arr = np.array(w, dtype=float)
        b_arr = np.array(b, dtype=float)
        v_arr = np.array(v, dtype=float)
    except (TypeError, ValueError) as err:
        raise ModelFormatError(f"{path}: weight arrays are malformed: {err}") from err
    if w_arr.shape != (hidden_count, 3):
        raise ModelFormatError(
            f"{path}: input_hidden_weights has shape {w_arr.shape}, expected ({hidden_count}, 3)")
    if b_arr.shape != (hidden_count,) or v_arr.shape != (hidden_count,):
        raise ModelFormatError(f"{path}: bias/output-weight vectors must have length {hidden_count}")

    try:
        norm = Normalization(mag_div=float(norm_doc["mag_div"]),
                             vs30_div=float(norm_doc["vs30_div"]),
                             rjb_div=float(norm_doc["rjb_div"]),
                             log_out_div=float(norm_doc["log_out_div"]))
        return NetworkModel(hidden_count=hidden_count, input_hidden_weights=w_arr,
                            hidden_biases=b_arr, hidden_output_weights=v_arr,
                            output_bias=float(out_bias), normalization=norm,
                            target=target)
    except (TypeError, ValueError) as err:
        raise ModelFormatError(f"{path}: {err}") from err


def write_table(path, header: list[str], rows) -> None:
    """Write a comma-delimited table; floats keep full repr precision."""

    def cell(x):
        if x is None:
            return ""
        if isinstance(x, float):
            return repr(float(x))
        return str(x)

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell(x) for x in row])
