"""
Error and calibration metrics for binary probability predictions.
"""

from typing import Sequence, Tuple

import numpy as np
from scipy import stats

from models.errors import DegenerateSampleError

DEFAULT_BINS = 10


def _as_pair(pred: Sequence[float], other: Sequence[float], what: str) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=float).reshape(-1)
    other = np.asarray(other, dtype=float).reshape(-1)
    if pred.shape != other.shape:
        raise ValueError(f"{pred.size} predictions but {other.size} {what}")
    if pred.size == 0:
        raise ValueError("metrics need at least one prediction")
    return pred, other


def mae(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Mean absolute difference between predicted and true P(y=1 | x)."""
    pred, truth = _as_pair(pred, truth, "true probabilities")
    return float(np.mean(np.abs(pred - truth)))


def bin_index(pred: np.ndarray, bins: int) -> np.ndarray:
    """Equal-width bin of each probability; 1.0 falls into the last bin."""
    return np.minimum((pred * bins).astype(int), bins - 1)


def calibration_bins(pred: Sequence[float], labels: Sequence[int],
                     bins: int = DEFAULT_BINS) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Per-bin mean confidence, positive rate and count.

    Empty bins report NaN for confidence and accuracy and a count of 0.
    """
    pred, labels = _as_pair(pred, labels, "labels")
    if bins < 1:
        raise ValueError(f"bins must be at least 1, got {bins}")
    if np.any(pred < 0) or np.any(pred > 1):
        raise ValueError("predictions must lie in [0, 1]")
    index = bin_index(pred, bins)
    counts = np.bincount(index, minlength=bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        confidence = np.bincount(index, weights=pred, minlength=bins) / counts
        accuracy = np.bincount(index, weights=labels, minlength=bins) / counts
    return confidence, accuracy, counts


def ece(pred: Sequence[float], labels: Sequence[int], bins: int = DEFAULT_BINS) -> float:
    """
    Expected calibration error with equal-width bins.

    Confidence is the mean predicted probability of the positive class in
    a bin, accuracy its empirical positive rate; bins are weighted by
    their share of the samples and empty bins add nothing.
    """
    confidence, accuracy, counts = calibration_bins(pred, labels, bins)
    filled = counts > 0
    weights = counts[filled] / counts.sum()
    return float(np.sum(weights * np.abs(accuracy[filled] - confidence[filled])))


def paired_ttest_less(a: Sequence[float], b: Sequence[float]) -> float:
    """
    One-sided paired t-test p-value for mean(a) < mean(b).

    Differences with zero spread but a nonzero mean give the limiting
    p-value (0 when a is smaller, 1 otherwise).

    Raises:
        ValueError: Length mismatch or fewer than two pairs
        DegenerateSampleError: Every pair is identical
    """
    a, b = _as_pair(a, b, "paired values")
    if a.size < 2:
        raise ValueError("a paired t-test needs at least two pairs")
    diff = a - b
    if np.all(diff == 0):
        raise DegenerateSampleError("all paired differences are zero")
    if np.all(diff == diff[0]):
        return 0.0 if diff[0] < 0 else 1.0
    return float(stats.ttest_rel(a, b, alternative="less").pvalue)
