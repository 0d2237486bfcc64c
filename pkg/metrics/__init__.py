"""Prediction metrics and run monitoring."""

from .calibration import calibration_bins, ece, mae, paired_ttest_less
from .monitor import TIMING_COLUMNS, RunMonitor

__all__ = ['mae', 'ece', 'calibration_bins', 'paired_ttest_less', 'RunMonitor', 'TIMING_COLUMNS']
