from __future__ import annotations

import csv
import json
import logging
import os
from importlib import metadata
from typing import Any, Iterable, Literal

import numpy as np

from .mc import McEstimate
from .orlicz import CoefficientMatrix
from .types import ManifestRecord
from .verify import RatioStudy

OutputFormat = Literal["json", "csv"]

STUDY_FIELDS = [
    "theorem_id",
    "config",
    "n",
    "m",
    "p",
    "q",
    "mc_value",
    "mc_spread",
    "norm_value",
    "ratio",
]
ESTIMATE_FIELDS = ["value", "spread", "samples_total", "estimator"]
MANIFEST_SUFFIX = ".manifest.json"

logger = logging.getLogger(__name__)


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def format_number(value: float) -> str:
    return format(value, ".17g")


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def _write_csv(path: str, header: list[str], rows: Iterable[list[Any]]) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(cell) for cell in row])


def _write_json(path: str, data: Any) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def tool_version() -> str:
    try:
        return metadata.version("orlicz-maxima")
    except metadata.PackageNotFoundError:
        return "0.0.0+unknown"


def write_study(study: RatioStudy, csv_path: str, json_path: str) -> list[str]:
    records = [row.to_record(study.theorem_id) for row in study.rows]
    _write_csv(
        csv_path,
        STUDY_FIELDS,
        ([plain[name] for name in STUDY_FIELDS] for plain in map(dict, records)),
    )
    summary = dict(study.summary())
    summary["pass"] = summary.pop("passed")
    _write_json(
        json_path,
        {"theorem_id": study.theorem_id, "rows": records, "summary": summary},
    )
    logger.info("Study written theorem=%s csv=%s json=%s", study.theorem_id, csv_path, json_path)
    return [csv_path, json_path]


def write_estimate(estimate: McEstimate, path: str, fmt: OutputFormat = "json") -> str:
    record = estimate.to_record()
    if fmt == "csv":
        plain = dict(record)
        _write_csv(path, ESTIMATE_FIELDS, [[plain[name] for name in ESTIMATE_FIELDS]])
    else:
        _write_json(path, record)
    logger.info("Estimate written path=%s format=%s", path, fmt)
    return path


def write_table(label: str, points: Iterable[tuple[float, float]], path: str) -> str:
    _write_csv(path, ["s", label], ([s, value] for s, value in points))
    logger.info("Table written M=%s path=%s", label, path)
    return path


def manifest_path(output_path: str) -> str:
    stem, _ = os.path.splitext(output_path)
    return stem + MANIFEST_SUFFIX


def write_manifest(manifest: ManifestRecord, output_path: str) -> str:
    path = manifest_path(output_path)
    _write_json(path, manifest)
    logger.info("Manifest written path=%s", path)
    return path


def read_manifest(path: str) -> ManifestRecord:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValueError(f"Manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"Manifest {path} must hold a JSON object")
    argv = data.get("argv")
    if not isinstance(argv, list) or not all(isinstance(item, str) for item in argv):
        raise ValueError(f"Manifest {path} has no argv list")
    command = data.get("command")
    if not isinstance(command, str):
        raise ValueError(f"Manifest {path} has no command")
    return {
        "command": command,
        "argv": argv,
        "parameters": data.get("parameters") or {},
        "master_seed": data.get("master_seed"),
        "tool_version": str(data.get("tool_version", "")),
        "duration_seconds": float(data.get("duration_seconds", 0.0)),
        "outputs": [str(item) for item in data.get("outputs", [])],
    }


def read_matrix_csv(path: str) -> CoefficientMatrix:
    """Rows are ``i`` (law xi), columns are ``j`` (law eta); no header."""
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line_number, raw in enumerate(csv.reader(handle), start=1):
            cells = [cell.strip() for cell in raw]
            if not cells or all(cell == "" for cell in cells):
                continue
            try:
                rows.append([float(cell) for cell in cells])
            except ValueError:
                raise ValueError(f"{path}:{line_number}: non-numeric entry") from None
    if not rows:
        raise ValueError(f"{path}: no coefficient rows")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValueError(f"{path}: rows have different lengths")
    return CoefficientMatrix(np.asarray(rows, dtype=float))
