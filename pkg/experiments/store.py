"""
In-memory store of report and timing rows.

Rows are plain dictionaries with the columns below; the store keeps them
in insertion order and writes them sorted, so two runs that produce the
same rows in a different order still write identical files.
"""

from pathlib import Path
from typing import Any, Dict, List, Union

from data.formats import read_rows, write_rows
from metrics.monitor import TIMING_COLUMNS
from models.errors import DataFormatError

REPORT_COLUMNS = ["method", "dataset", "weight_scale", "epochs", "metric", "value", "seed"]


def _sort_key(row: Dict[str, Any]):
    return (str(row["dataset"]), float(row["weight_scale"]), int(row["epochs"]),
            str(row["metric"]), str(row["method"]), int(row["seed"]))


class ReportStore:
    """Central storage for metric rows and runtime rows of experiment runs."""

    def __init__(self):
        self.rows: List[Dict[str, Any]] = []
        self.timings: List[Dict[str, Any]] = []

    def clear(self):
        self.rows.clear()
        self.timings.clear()

    def add_row(self, method: str, dataset: str, weight_scale: float, epochs: int,
                metric: str, value: float, seed: int):
        """Add one metric value."""
        self.rows.append({"method": method, "dataset": dataset, "weight_scale": float(weight_scale),
                          "epochs": int(epochs), "metric": metric, "value": float(value),
                          "seed": int(seed)})

    def add_rows(self, rows: List[Dict[str, Any]]):
        for row in rows:
            self.add_row(**{c: row[c] for c in REPORT_COLUMNS})

    def add_timings(self, rows: List[Dict[str, Any]]):
        self.timings.extend(rows)

    def sorted_rows(self) -> List[Dict[str, Any]]:
        return sorted(self.rows, key=_sort_key)

    def export_report(self, filepath: Union[str, Path]):
        """
        Write the metric rows as CSV.

        Raises:
            ValueError: If filepath is empty
            IOError: If the file cannot be written
        """
        if not filepath:
            raise ValueError("Filepath cannot be empty")
        write_rows(filepath, REPORT_COLUMNS, self.sorted_rows())

    def export_timings(self, filepath: Union[str, Path]):
        if not filepath:
            raise ValueError("Filepath cannot be empty")
        ordered = sorted(self.timings, key=lambda r: (r["method"], r["dataset"], r["seed"], r["phase"]))
        write_rows(filepath, TIMING_COLUMNS, ordered)

    def load_report(self, filepath: Union[str, Path]):
        """Append the rows of a report CSV written by export_report."""
        rows = read_rows(filepath)
        for number, row in enumerate(rows, start=2):
            try:
                self.add_row(row["method"], row["dataset"], float(row["weight_scale"]),
                             int(row["epochs"]), row["metric"], float(row["value"]), int(row["seed"]))
            except (KeyError, TypeError, ValueError):
                raise DataFormatError(str(filepath), number, f"expected columns {','.join(REPORT_COLUMNS)}")

    def load_timings(self, filepath: Union[str, Path]):
        for row in read_rows(filepath):
            row = dict(row)
            for key in ("seconds", "seconds_per_epoch", "rss_mb"):
                row[key] = float(row[key])
            row["seed"] = int(row["seed"])
            row["epochs"] = int(row["epochs"])
            self.timings.append(row)

    def get_stats(self) -> Dict[str, Any]:
        """Counts for logs and the dashboard."""
        return {
            "rows": len(self.rows),
            "methods": sorted({r["method"] for r in self.rows}),
            "datasets": sorted({r["dataset"] for r in self.rows}),
            "seeds": len({r["seed"] for r in self.rows}),
            "timing_rows": len(self.timings),
        }


# Global singleton instance
_store = ReportStore()


def get_store() -> ReportStore:
    """Get the global report store instance."""
    return _store
