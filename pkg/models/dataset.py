"""
Labelled datasets and the settings of synthetic generators.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from models.errors import StructureError


class GenKind(Enum):
    BN = "bn"
    MN = "mn"


@dataclass(frozen=True)
class GenSpec:
    """
    Synthetic ground-truth model specification.

    Attributes:
        kind: Sigmoid Bayesian network or pairwise Markov network
        dims: Layer sizes, inputs first, single binary output last
        weight_scale: Edge weights are drawn from U(-w, w)
        n_points: Rows to sample
        seed: Master seed for the model and the rows
    """

    kind: GenKind = GenKind.BN
    dims: Tuple[int, ...] = (4, 4, 4, 1)
    weight_scale: float = 0.3
    n_points: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", GenKind(self.kind))
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if len(self.dims) < 2:
            raise StructureError(f"dims need at least two layers, got {self.dims}")
        if self.dims[-1] != 1:
            raise StructureError("generated models have a single binary output")
        if self.weight_scale < 0:
            raise StructureError(f"weight scale must be non-negative, got {self.weight_scale}")
        if self.n_points < 1:
            raise StructureError(f"n_points must be at least 1, got {self.n_points}")

    @property
    def label(self) -> str:
        """Dataset name used in reports, e.g. 'BN (0.3)'."""
        return f"{self.kind.value.upper()} ({self.weight_scale:g})"


@dataclass
class DataRow:
    x: Tuple[float, ...]
    y: int
    p_true: Optional[float] = None


@dataclass
class Dataset:
    """
    Inputs in [0, 1] (binary for synthetic data), binary labels and,
    for synthetic data, the exact P(y=1 | x) of each row.
    """

    X: np.ndarray
    y: np.ndarray
    p_true: Optional[np.ndarray] = None
    name: str = field(default="dataset", compare=False)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int).reshape(-1)
        if self.X.ndim != 2:
            raise StructureError(f"inputs must form a 2-D array, got shape {self.X.shape}")
        if self.X.shape[0] != self.y.shape[0]:
            raise StructureError(f"{self.X.shape[0]} input rows but {self.y.shape[0]} labels")
        if np.any(self.X < 0) or np.any(self.X > 1):
            raise StructureError("inputs must lie in [0, 1]")
        if np.any((self.y != 0) & (self.y != 1)):
            raise StructureError("labels must be binary")
        if self.p_true is not None:
            self.p_true = np.asarray(self.p_true, dtype=float).reshape(-1)
            if self.p_true.shape != self.y.shape:
                raise StructureError("p_true needs one value per row")
            if np.any(self.p_true < 0) or np.any(self.p_true > 1):
                raise StructureError("p_true values must lie in [0, 1]")

    def __len__(self) -> int:
        return self.X.shape[0]

    def __iter__(self) -> Iterator[DataRow]:
        for i in range(len(self)):
            truth = None if self.p_true is None else float(self.p_true[i])
            yield DataRow(tuple(self.X[i].tolist()), int(self.y[i]), truth)

    @property
    def num_features(self) -> int:
        return self.X.shape[1]

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.X == 0) | (self.X == 1)))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        indices = np.asarray(indices, dtype=int)
        truth = None if self.p_true is None else self.p_true[indices]
        return Dataset(self.X[indices], self.y[indices], truth, self.name)

    def split(self, train_fraction: float = 0.8, seed: int = 0) -> Tuple["Dataset", "Dataset"]:
        """Seeded shuffle, then the first `train_fraction` of rows for training."""
        if not 0 < train_fraction < 1:
            raise StructureError(f"train fraction must lie in (0, 1), got {train_fraction}")
        order = np.random.default_rng(seed).permutation(len(self))
        cut = int(round(train_fraction * len(self)))
        cut = min(max(cut, 1), len(self) - 1) if len(self) > 1 else 1
        return self.subset(order[:cut]), self.subset(order[cut:])


def rows_summary(dataset: Dataset) -> List[str]:
    """Short description lines for logs and the dashboard."""
    lines = [f"{len(dataset)} rows, {dataset.num_features} features"]
    lines.append(f"positive rate {dataset.y.mean():.3f}")
    if dataset.p_true is not None:
        lines.append(f"mean P(y=1|x) {dataset.p_true.mean():.3f}")
    return lines
