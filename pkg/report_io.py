"""Report container and CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

TOOL_VERSION = "0.1.0"
PHASE_COLUMNS = ("alpha", "h", "n_roots", "u_star_1", "u_star_2", "classification", "variance")


def _plain(value: Any) -> Any:
    """Reduce a record value to str, int, float, bool or None."""
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (set, frozenset)):
        return " ".join(str(v) for v in sorted(value))
    if isinstance(value, (tuple, list, np.ndarray)):
        return "|".join(str(_plain(v)) for v in value)
    return str(value)


def plain_record(record: dict[str, Any]) -> dict[str, Any]:
    return {str(k): _plain(v) for k, v in record.items()}


@dataclass
class Report:
    """
    Output of one run.

    ``verdicts`` holds one boolean per verifier executed; a run with no
    verifiers passes trivially.
    """
    command: str
    config: dict[str, Any]
    records: list[dict[str, Any]] = field(default_factory=list)
    verdicts: list[bool] = field(default_factory=list)
    columns: tuple[str, ...] | None = None
    elapsed_seconds: float = 0.0
    notes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.records = [plain_record(r) for r in self.records]

    def add(self, record: dict[str, Any]) -> None:
        self.records.append(plain_record(record))

    def extend(self, records: Iterable[dict[str, Any]]) -> None:
        self.records.extend(plain_record(r) for r in records)

    @property
    def passed(self) -> bool:
        return all(self.verdicts)

    def summary(self) -> dict[str, Any]:
        return {
            "checks": len(self.verdicts),
            "failed": sum(not v for v in self.verdicts),
            "verdict": "pass" if self.passed else "fail",
        }

    def meta(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "tool_version": TOOL_VERSION,
            "seed": self.config.get("seed"),
            "caps": self.config.get("caps"),
            "config": self.config,
            "summary": self.summary(),
            "elapsed_seconds": round(self.elapsed_seconds, 3),
            "notes": self.notes,
        }

    def fieldnames(self) -> list[str]:
        if self.columns is not None:
            return list(self.columns)
        names: dict[str, None] = {}
        for record in self.records:
            names.update(dict.fromkeys(record))
        return list(names)


def emit(report: Report, fmt: str) -> bytes:
    """
    Serialize a report.

    CSV: header row plus one line per record, UTF-8, ``.`` decimals; empty
    cells for missing values. JSON: {"meta": ..., "records": [...]}.
    """
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=report.fieldnames(), lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for record in report.records:
            writer.writerow({k: ("" if v is None else v) for k, v in record.items()})
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        payload = {"meta": plain_meta(report.meta()), "records": report.records}
        return (json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def plain_meta(meta: Any) -> Any:
    if isinstance(meta, dict):
        return {str(k): plain_meta(v) for k, v in meta.items()}
    if isinstance(meta, (list, tuple)) and not isinstance(meta, str):
        return [plain_meta(v) for v in meta]
    return _plain(meta)


def write_report(report: Report, fmt: str, path: Path) -> Path:
    """Write the emitted bytes; OSError propagates for unwritable paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(emit(report, fmt))
    return path
