"""
Aggregation of report rows into the comparison table.

Rows are indexed once by their grouping key; each table line holds one
method's mean metric over seeds and, when a baseline is present, the
one-sided paired t-test p-value for "method is lower than baseline".
"""

import logging
from collections import defaultdict
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from metrics.calibration import paired_ttest_less
from models.errors import DegenerateSampleError, ReportMismatchError

logger = logging.getLogger(__name__)

BASELINE = "dnn"
TABLE_COLUMNS = ["dataset", "weight_scale", "epochs", "metric", "method", "mean", "n", "p_value"]
TIMING_TABLE_COLUMNS = ["method", "phase", "runs", "seconds_per_epoch"]

GroupKey = Tuple[str, float, int, str]


class ReportIndex:
    """
    Dictionary indexes over report rows for grouped lookups.
    """

    def __init__(self, baseline: str = BASELINE):
        self.baseline = baseline
        # (dataset, weight_scale, epochs, metric) -> method -> seed -> value
        self._groups: Dict[GroupKey, Dict[str, Dict[int, float]]] = defaultdict(lambda: defaultdict(dict))
        self._by_method: Dict[str, List[Dict[str, Any]]] = defaultdict(list)
        self._indexed = False

    def index_all(self, rows: List[Dict[str, Any]]):
        """
        Build the indexes from report rows.

        Raises:
            ReportMismatchError: If a (group, method, seed) appears twice
        """
        self._indexed = False
        self._groups.clear()
        self._by_method.clear()
        for row in rows:
            key = (str(row["dataset"]), float(row["weight_scale"]), int(row["epochs"]), str(row["metric"]))
            per_seed = self._groups[key][str(row["method"])]
            seed = int(row["seed"])
            if seed in per_seed:
                raise ReportMismatchError(f"duplicate row for {key} method={row['method']} seed={seed}")
            per_seed[seed] = float(row["value"])
            self._by_method[str(row["method"])].append(row)
        self._indexed = True

    def groups(self) -> List[GroupKey]:
        return sorted(self._groups)

    def methods(self, key: Optional[GroupKey] = None) -> List[str]:
        if key is None:
            return sorted(self._by_method)
        return sorted(self._groups.get(key, {}))

    def search_by_method(self, method: str) -> List[Dict[str, Any]]:
        return self._by_method.get(method, [])

    def values(self, key: GroupKey, method: str) -> Dict[int, float]:
        return dict(self._groups.get(key, {}).get(method, {}))

    def _p_value(self, key: GroupKey, method: str) -> Optional[float]:
        baseline = self.values(key, self.baseline)
        ours = self.values(key, method)
        if set(ours) != set(baseline):
            raise ReportMismatchError(
                f"{key}: method '{method}' has seeds {sorted(ours)} but "
                f"'{self.baseline}' has {sorted(baseline)}"
            )
        seeds = sorted(ours)
        if len(seeds) < 2:
            return None
        try:
            return paired_ttest_less([ours[s] for s in seeds], [baseline[s] for s in seeds])
        except DegenerateSampleError:
            logger.warning("%s: '%s' equals '%s' on every seed; no p-value", key, method, self.baseline)
            return None

    def aggregate(self) -> List[Dict[str, Any]]:
        """
        One line per (group, method), ordered by group then method.

        p_value is left empty when the group has no baseline rows, for the
        baseline itself, and when there are fewer than two seeds.
        """
        if not self._indexed:
            raise RuntimeError("index_all must run before aggregate")
        table = []
        for key in self.groups():
            methods = self._groups[key]
            has_baseline = self.baseline in methods and len(methods) > 1
            for method in sorted(methods):
                values = list(methods[method].values())
                p_value = None
                if has_baseline and method != self.baseline:
                    p_value = self._p_value(key, method)
                table.append({
                    "dataset": key[0], "weight_scale": key[1], "epochs": key[2], "metric": key[3],
                    "method": method, "mean": float(np.mean(values)), "n": len(values),
                    "p_value": "" if p_value is None else p_value,
                })
        return table


def aggregate_timings(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Mean seconds per epoch per (method, phase), fastest first."""
    grouped: Dict[Tuple[str, str], List[float]] = defaultdict(list)
    for row in rows:
        grouped[(str(row["method"]), str(row["phase"]))].append(float(row["seconds_per_epoch"]))
    table = [{"method": method, "phase": phase, "runs": len(values),
              "seconds_per_epoch": float(np.mean(values))}
             for (method, phase), values in grouped.items()]
    return sorted(table, key=lambda r: (r["seconds_per_epoch"], r["method"]))
