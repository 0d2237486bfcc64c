import time

import numpy as np
import pytest

from metrics.calibration import calibration_bins, ece, mae, paired_ttest_less
from metrics.monitor import TIMING_COLUMNS, RunMonitor
from models.errors import DegenerateSampleError


class TestMae:

    def test_value(self):
        assert mae([0.1, 0.5], [0.3, 0.3]) == pytest.approx(0.2)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mae([0.1, 0.5], [0.3])

    def test_empty(self):
        with pytest.raises(ValueError):
            mae([], [])


class TestEce:

    @pytest.mark.parametrize("pred, labels, expected", [
        ([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0], 0.0),
        ([0.25, 0.25, 0.25, 0.25], [1, 0, 0, 0], 0.0),
        ([0.9, 0.9, 0.9], [0, 0, 0], 0.9),
        ([0.05, 0.95], [0, 1], 0.05),
    ])
    def test_values(self, pred, labels, expected):
        assert ece(pred, labels) == pytest.approx(expected, abs=1e-12)

    def test_one_falls_in_last_bin(self):
        _, _, counts = calibration_bins([1.0, 0.0, 0.55], [1, 0, 1], bins=10)
        assert counts[9] == 1
        assert counts[0] == 1
        assert counts[5] == 1

    def test_empty_bins_are_nan(self):
        confidence, accuracy, counts = calibration_bins([0.05, 0.05], [0, 1], bins=4)
        assert counts.tolist() == [2, 0, 0, 0]
        assert np.isnan(confidence[1]) and np.isnan(accuracy[3])
        assert accuracy[0] == pytest.approx(0.5)

    def test_bin_count_changes_grouping(self):
        pred, labels = [0.3, 0.45], [0, 1]
        assert ece(pred, labels, bins=1) == pytest.approx(abs(0.5 - 0.375))
        assert ece(pred, labels, bins=10) == pytest.approx(0.5 * 0.3 + 0.5 * 0.55)

    @pytest.mark.parametrize("pred", [[-0.1, 0.5], [0.5, 1.2]])
    def test_rejects_non_probabilities(self, pred):
        with pytest.raises(ValueError):
            ece(pred, [0, 1])


class TestPairedTTest:

    def test_clear_improvement(self, rng):
        a = rng.normal(0.0, 1.0, 30)
        b = a + 1.0 + rng.normal(0.0, 0.1, 30)
        assert paired_ttest_less(a, b) < 1e-6

    def test_swapping_complements(self, rng):
        a = rng.normal(0.0, 1.0, 20)
        b = a + 0.1 + rng.normal(0.0, 0.5, 20)
        assert paired_ttest_less(b, a) == pytest.approx(1 - paired_ttest_less(a, b), abs=1e-12)

    def test_identical_samples(self):
        with pytest.raises(DegenerateSampleError):
            paired_ttest_less([0.2, 0.3, 0.4], [0.2, 0.3, 0.4])

    def test_constant_shift(self):
        assert paired_ttest_less([1.0, 2.0, 3.0], [2.0, 3.0, 4.0]) == 0.0
        assert paired_ttest_less([2.0, 3.0, 4.0], [1.0, 2.0, 3.0]) == 1.0

    @pytest.mark.parametrize("a, b", [([0.1, 0.2], [0.1]), ([0.1], [0.2])])
    def test_bad_lengths(self, a, b):
        with pytest.raises(ValueError):
            paired_ttest_less(a, b)


class TestRunMonitor:

    def test_snapshot_columns(self):
        monitor = RunMonitor("hmc-L10", "BN (0.3)", 3)
        snapshot = monitor.take_snapshot("finetune", 2.0, 4)
        assert list(snapshot) == TIMING_COLUMNS
        assert snapshot["seconds_per_epoch"] == 0.5
        assert snapshot["rss_mb"] > 0

    def test_phase_times_the_block(self):
        monitor = RunMonitor()
        with monitor.phase("train", 2):
            time.sleep(0.01)
        (snapshot,) = monitor.snapshots
        assert snapshot["phase"] == "train"
        assert snapshot["seconds"] >= 0.01

    def test_phase_records_on_error(self):
        monitor = RunMonitor()
        with pytest.raises(RuntimeError):
            with monitor.phase("finetune"):
                raise RuntimeError("boom")
        assert len(monitor.snapshots) == 1
