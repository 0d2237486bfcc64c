"""
Parameter updates. Both steps return a new Mlp and leave the input untouched.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from models.chain import OptimizerKind
from models.errors import StructureError
from models.mlp import Gradient, Mlp

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class AdamState:
    """First/second moment estimates over the flat parameter vector."""

    m: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    t: int = 0


def _check(mlp: Mlp, grad: Gradient):
    if not grad.matches(mlp):
        raise StructureError("gradient shapes do not match the network")


def sgd_step(mlp: Mlp, grad: Gradient, lr: float) -> Mlp:
    """theta <- theta - lr * grad."""
    _check(mlp, grad)
    return mlp.with_parameters(mlp.parameters() - lr * grad.flat())


def adam_step(mlp: Mlp, grad: Gradient, state: AdamState, lr: float) -> Tuple[Mlp, AdamState]:
    """
    One Adam update with beta1=0.9, beta2=0.999, eps=1e-8.

    A zero gradient leaves the parameters exactly where they are.
    """
    _check(mlp, grad)
    g = grad.flat()
    m = np.zeros_like(g) if state.m is None else state.m
    v = np.zeros_like(g) if state.v is None else state.v
    t = state.t + 1
    m = ADAM_BETA1 * m + (1 - ADAM_BETA1) * g
    v = ADAM_BETA2 * v + (1 - ADAM_BETA2) * g * g
    m_hat = m / (1 - ADAM_BETA1 ** t)
    v_hat = v / (1 - ADAM_BETA2 ** t)
    step = lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    return mlp.with_parameters(mlp.parameters() - step), AdamState(m, v, t)


class Optimizer:
    """Adam or plain gradient steps behind one `step` call."""

    def __init__(self, kind: OptimizerKind = OptimizerKind.ADAM, lr: float = 1e-4):
        self.kind = OptimizerKind(kind)
        self.lr = lr
        self.state = AdamState()

    def step(self, mlp: Mlp, grad: Gradient) -> Mlp:
        if self.kind is OptimizerKind.SGD:
            return sgd_step(mlp, grad, self.lr)
        mlp, self.state = adam_step(mlp, grad, self.state, self.lr)
        return mlp


def minibatches(n: int, batch_size: int, seed: int, epoch: int) -> List[np.ndarray]:
    """
    Row indices of each update in an epoch.

    batch_size 0 (or >= n) gives one full batch in row order; otherwise
    the rows are shuffled with a generator seeded by (seed, epoch).
    """
    if batch_size <= 0 or batch_size >= n:
        return [np.arange(n)]
    order = np.random.default_rng([seed, epoch]).permutation(n)
    return [order[i:i + batch_size] for i in range(0, n, batch_size)]
