"""Wall-clock and memory bookkeeping for experiment runs."""

import os
import time
from contextlib import contextmanager
from typing import Dict, Iterator, List

import psutil


class RunMonitor:
    """
    Record how long each phase of a run took and how much memory the
    process held when it finished.

    Timings never enter the metric reports; they are written to their
    own file so that reports stay byte-identical across reruns.
    """

    def __init__(self, method: str = "", dataset: str = "", seed: int = 0):
        self.method = method
        self.dataset = dataset
        self.seed = seed
        self.snapshots: List[Dict[str, object]] = []

    def take_snapshot(self, label: str = "", seconds: float = 0.0, epochs: int = 0) -> Dict[str, object]:
        """
        Store one timing row.

        Args:
            label: Phase name, e.g. 'train' or 'finetune'
            seconds: Wall-clock duration of the phase
            epochs: Epochs the phase ran, for per-epoch times
        """
        snapshot = {
            "method": self.method,
            "dataset": self.dataset,
            "seed": self.seed,
            "phase": label,
            "epochs": epochs,
            "seconds": seconds,
            "seconds_per_epoch": seconds / epochs if epochs else seconds,
            "rss_mb": self.get_process_memory_mb(),
        }
        self.snapshots.append(snapshot)
        return snapshot

    @contextmanager
    def phase(self, label: str, epochs: int = 0) -> Iterator[None]:
        """Time the enclosed block and snapshot it on exit."""
        started = time.perf_counter()
        try:
            yield
        finally:
            self.take_snapshot(label, time.perf_counter() - started, epochs)

    @staticmethod
    def get_process_memory_mb() -> float:
        """Resident set size of this process in MB."""
        process = psutil.Process(os.getpid())
        return process.memory_info().rss / 1024 / 1024


TIMING_COLUMNS = ["method", "dataset", "seed", "phase", "epochs", "seconds", "seconds_per_epoch", "rss_mb"]
