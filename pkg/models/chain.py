"""
State and configuration of the MCMC fine-tuning chains.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import expit

from models.errors import StructureError
from models.mlp import Mlp


class SamplerKind(Enum):
    HMC = "hmc"
    GIBBS = "gibbs"


class OptimizerKind(Enum):
    ADAM = "adam"
    SGD = "sgd"


@dataclass(frozen=True)
class StochModel:
    """
    Network whose hidden unit h_ij ~ N(p_ij, max(p_ij (1 - p_ij) / L, var_floor)).

    L=inf collapses every hidden unit onto its forward-pass mean.
    """

    mlp: Mlp
    L: float = 10.0
    var_floor: float = 1e-6
    jacobian: bool = True

    def __post_init__(self):
        if not self.L > 0:
            raise StructureError(f"L must be positive, got {self.L}")
        if not self.var_floor > 0:
            raise StructureError(f"var_floor must be positive, got {self.var_floor}")

    def with_mlp(self, mlp: Mlp) -> "StochModel":
        return StochModel(mlp, self.L, self.var_floor, self.jacobian)


@dataclass
class ChainState:
    """
    Hidden-unit values of one chain (or a batch of chains along axis 0), kept as logits.

    cached_h[i] = sigmoid(logits[i]) for hidden layer i + 1.
    """

    logits: List[np.ndarray]
    cached_h: List[np.ndarray]

    @classmethod
    def from_logits(cls, logits: Sequence[np.ndarray]) -> "ChainState":
        logits = [np.array(rho, dtype=float) for rho in logits]
        return cls(logits, [expit(rho) for rho in logits])

    @classmethod
    def from_flat(cls, flat: np.ndarray, hidden_dims: Sequence[int]) -> "ChainState":
        """Inverse of `flat`; a 2-D array is read as a batch of chains."""
        flat = np.asarray(flat, dtype=float)
        bounds = np.cumsum([0] + list(hidden_dims))
        return cls.from_logits([flat[..., bounds[i]:bounds[i + 1]] for i in range(len(hidden_dims))])

    def flat(self) -> np.ndarray:
        """Logits of all layers concatenated along the last axis."""
        return np.concatenate(self.logits, axis=-1)

    @property
    def batch_size(self) -> Optional[int]:
        return None if self.logits[0].ndim == 1 else self.logits[0].shape[0]

    def check(self, mlp: Mlp):
        dims = tuple(rho.shape[-1] for rho in self.logits)
        if dims != mlp.hidden_dims:
            raise StructureError(f"chain layers {dims} do not match hidden dims {mlp.hidden_dims}")

    def select(self, rows: np.ndarray) -> "ChainState":
        """Sub-batch of chains."""
        return ChainState([rho[rows] for rho in self.logits], [h[rows] for h in self.cached_h])

    def replace(self, rows: np.ndarray, other: "ChainState") -> "ChainState":
        """Copy of this batch with `rows` taken from `other`."""
        logits = [rho.copy() for rho in self.logits]
        for rho, new in zip(logits, other.logits):
            rho[rows] = new
        return ChainState.from_logits(logits)


@dataclass(frozen=True)
class HmcConfig:
    """Leapfrog step size and trajectory length; the mass matrix is the identity."""

    step_size: float = 0.01
    leapfrog_steps: int = 10

    def __post_init__(self):
        if not self.step_size > 0:
            raise StructureError(f"step size must be positive, got {self.step_size}")
        if self.leapfrog_steps < 1:
            raise StructureError(f"leapfrog steps must be at least 1, got {self.leapfrog_steps}")


@dataclass(frozen=True)
class CdConfig:
    """
    Contrastive-divergence schedule.

    Attributes:
        k: Sampling steps between parameter updates
        burn_in: Sampling steps before the first update
        lr: Learning rate
        epochs: Passes over the dataset
        batch_size: Chains per update; 0 means the whole dataset
        optimizer: Adam (default) or plain gradient steps
    """

    k: int = 1
    burn_in: int = 50
    lr: float = 1e-4
    epochs: int = 20
    batch_size: int = 0
    optimizer: OptimizerKind = OptimizerKind.ADAM

    def __post_init__(self):
        if self.k < 1:
            raise StructureError(f"k must be at least 1, got {self.k}")
        if self.burn_in < 0:
            raise StructureError(f"burn-in must be non-negative, got {self.burn_in}")
        if self.lr < 0:
            raise StructureError(f"learning rate must be non-negative, got {self.lr}")
        if self.epochs < 0:
            raise StructureError(f"epochs must be non-negative, got {self.epochs}")
        if self.batch_size < 0:
            raise StructureError(f"batch size must be non-negative, got {self.batch_size}")
