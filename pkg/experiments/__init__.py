"""Experiment configuration, report storage and aggregation, and the run protocol."""

from .config import RunConfig, load_config, resolve_config
from .store import REPORT_COLUMNS, ReportStore, get_store
from .report import ReportIndex, aggregate_timings
from .runner import SeedTask, continue_training, evaluate, finetune, run_experiment, run_seed, train_mlp

__all__ = [
    'RunConfig', 'load_config', 'resolve_config',
    'ReportStore', 'get_store', 'REPORT_COLUMNS',
    'ReportIndex', 'aggregate_timings',
    'train_mlp', 'continue_training', 'finetune', 'evaluate', 'SeedTask', 'run_seed', 'run_experiment',
]
