"""Per-timestep metrics table and end-of-run summary.

Column order is a stable contract; reals are serialized at 6 significant
digits and booleans as 1/0, so a rerun with the same seed and config is
byte-identical. Rows must arrive contiguously from t=0.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .errors import ConsistencyError

COLUMNS = (
    "t", "backlog", "processed", "mean_disagreement", "mean_load", "max_load",
    "rho_ai", "tau", "escalation_enabled", "escalations", "accepted",
    "rejected", "revised", "concentration", "within_cluster_share",
    "intervention_active", "mean_author_credit", "mean_reviewer_credit",
    "cumulative_impact", "objective_U",
)

_INT_COLUMNS = frozenset({
    "t", "backlog", "processed", "max_load", "escalations", "accepted",
    "rejected", "revised", "cumulative_impact",
})
_BOOL_COLUMNS = frozenset({"escalation_enabled", "intervention_active"})


def format_cell(column: str, value) -> str:
    if column in _BOOL_COLUMNS:
        return "1" if value else "0"
    if column in _INT_COLUMNS:
        return str(int(value))
    return f"{float(value):.6g}"


class MetricsWriter:
    """Buffers rows in memory; optionally mirrors CSV lines to disk."""

    def __init__(self, path: Optional[Path] = None):
        self.path = path
        self.rows: list[dict] = []
        self._fh = None
        if path:
            self._fh = open(path, "a", encoding="utf-8")
            self._fh.write(",".join(COLUMNS) + "\n")

    def write_row(self, row: dict) -> None:
        if row["t"] != len(self.rows):
            raise ConsistencyError(
                f"metrics row out of order: got t={row['t']}, expected {len(self.rows)}"
            )
        missing = [c for c in COLUMNS if c not in row]
        if missing:
            raise ConsistencyError(f"metrics row missing columns: {missing}")
        self.rows.append(row)
        if self._fh:
            self._fh.write(",".join(format_cell(c, row[c]) for c in COLUMNS) + "\n")

    def flush(self) -> None:
        if self._fh:
            self._fh.flush()

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None


def write_summary(run_dir: Path, summary: dict) -> Path:
    path = run_dir / "summary.json"
    path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return path


def write_resolved_config(run_dir: Path, resolved: dict) -> Path:
    path = run_dir / "config.resolved"
    path.write_text(json.dumps(resolved, sort_keys=True, indent=2) + "\n")
    return path
