"""
Energies of the stochastic network and their gradients.

Hidden unit h_ij is Gaussian around p_ij = sigmoid(W_i h_{i-1} + b_i)_j with
variance max(p_ij (1 - p_ij) / L, var_floor); the output is Bernoulli (or
categorical) given the last hidden layer. Chains live in logit space, so
with the Jacobian switched on the potential picks up
-sum log[h (1 - h)].

Every function accepts a single chain (1-D arrays) or a batch of chains
(2-D arrays, chains along axis 0) and returns per-chain values.
"""

from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
from scipy.special import expit, log_expit, logsumexp, softmax

from models.chain import ChainState, StochModel
from models.errors import StructureError
from models.mlp import Gradient, Mlp, OutputKind

LOG_2PI = float(np.log(2 * np.pi))

Labels = Union[None, int, np.ndarray]


@dataclass
class HiddenLayer:
    """One hidden layer evaluated at the current state."""

    below: np.ndarray
    h: np.ndarray
    p: np.ndarray
    var: np.ndarray
    dvar_dp: np.ndarray

    @property
    def deviation(self) -> np.ndarray:
        return self.h - self.p

    def nll(self) -> np.ndarray:
        """-log N(h | p, var) summed over units."""
        return np.sum(self.deviation ** 2 / (2 * self.var) + 0.5 * (LOG_2PI + np.log(self.var)), axis=-1)

    def d_nll_d_p(self) -> np.ndarray:
        d = self.deviation
        return -d / self.var + (0.5 / self.var - d ** 2 / (2 * self.var ** 2)) * self.dvar_dp


def hidden_layers(model: StochModel, state: ChainState, x: np.ndarray) -> List[HiddenLayer]:
    """Means and variances of every hidden layer given the sampled layer below."""
    mlp = model.mlp
    state.check(mlp)
    layers = []
    below = np.asarray(x, dtype=float)
    for i, h in enumerate(state.cached_h):
        p = expit(below @ mlp.weights[i].T + mlp.biases[i])
        raw = p * (1 - p) / model.L
        floored = raw <= model.var_floor
        var = np.where(floored, model.var_floor, raw)
        dvar_dp = np.where(floored, 0.0, (1 - 2 * p) / model.L)
        layers.append(HiddenLayer(below, h, p, var, dvar_dp))
        below = h
    return layers


def output_nll(mlp: Mlp, last_hidden: np.ndarray, y: Labels) -> np.ndarray:
    """-log p(y | h_K), computed from logits without clamping."""
    s = last_hidden @ mlp.weights[-1].T + mlp.biases[-1]
    if mlp.output_kind is OutputKind.CATEGORICAL:
        y = np.asarray(y, dtype=int)
        picked = np.take_along_axis(s, y[..., None], axis=-1)[..., 0]
        return logsumexp(s, axis=-1) - picked
    s0 = s[..., 0]
    return np.logaddexp(0.0, s0) - np.asarray(y, dtype=float) * s0


def output_delta(mlp: Mlp, last_hidden: np.ndarray, y: Labels) -> np.ndarray:
    """d output_nll / d output pre-activation."""
    s = last_hidden @ mlp.weights[-1].T + mlp.biases[-1]
    if mlp.output_kind is OutputKind.CATEGORICAL:
        return softmax(s, axis=-1) - np.eye(s.shape[-1])[np.asarray(y, dtype=int)]
    delta = np.zeros_like(s)
    delta[..., 0] = expit(s[..., 0]) - np.asarray(y, dtype=float)
    return delta


def log_jacobian(state: ChainState) -> np.ndarray:
    """sum log[h (1 - h)] over all hidden units, from the logits."""
    return sum(np.sum(log_expit(rho) + log_expit(-rho), axis=-1) for rho in state.logits)


def potential_energy(model: StochModel, state: ChainState, x: np.ndarray, y: Labels = None):
    """
    U = -log p(y | h_K) - sum_ij log N(h_ij | p_ij, var_ij) [- log Jacobian].

    Args:
        model: Network and its variance settings
        state: Current logits of one chain or a batch of chains
        x: Input vector (or one row per chain)
        y: Label(s); None drops the output term

    Returns:
        Potential per chain (a float for a single chain)
    """
    layers = hidden_layers(model, state, x)
    energy = sum(layer.nll() for layer in layers)
    if y is not None:
        energy = energy + output_nll(model.mlp, state.cached_h[-1], y)
    if model.jacobian:
        energy = energy - log_jacobian(state)
    return float(energy) if np.ndim(energy) == 0 else energy


def grad_potential(model: StochModel, state: ChainState, x: np.ndarray, y: Labels = None) -> List[np.ndarray]:
    """
    dU/d logits, one array per hidden layer.

    The derivative with respect to h is accumulated top-down: the layer's
    own Gaussian term, the next layer's mean (or the output term for the
    last hidden layer), then multiplied by dh/drho = h (1 - h).
    """
    mlp = model.mlp
    layers = hidden_layers(model, state, x)
    grads: List[Optional[np.ndarray]] = [None] * len(layers)
    from_above = np.zeros_like(layers[-1].h)
    if y is not None:
        from_above = output_delta(mlp, layers[-1].h, y) @ mlp.weights[-1]
    for i in range(len(layers) - 1, -1, -1):
        layer = layers[i]
        d_h = layer.deviation / layer.var + from_above
        d_rho = d_h * layer.h * (1 - layer.h)
        if model.jacobian:
            d_rho = d_rho + 2 * layer.h - 1
        grads[i] = d_rho
        # d/dh_{i-1} of this layer's Gaussian through p_i
        from_above = (layer.d_nll_d_p() * layer.p * (1 - layer.p)) @ mlp.weights[i]
    return grads


def _mean_outer(delta: np.ndarray, below: np.ndarray) -> np.ndarray:
    if delta.ndim == 1:
        return np.outer(delta, below)
    return delta.T @ below / delta.shape[0]


def _mean_rows(delta: np.ndarray) -> np.ndarray:
    return delta if delta.ndim == 1 else delta.mean(axis=0)


def loss_gradient(model: StochModel, state: ChainState, x: np.ndarray, y: Labels) -> Gradient:
    """
    Gradient of the fine-tuning loss with respect to weights and biases at fixed h.

    The loss is the potential without the Jacobian term; for a batch of
    chains the gradient is averaged over chains.
    """
    mlp = model.mlp
    layers = hidden_layers(model, state, x)
    d_weights, d_biases = [], []
    for layer in layers:
        delta = layer.d_nll_d_p() * layer.p * (1 - layer.p)
        d_weights.append(_mean_outer(delta, layer.below))
        d_biases.append(_mean_rows(delta))
    delta = output_delta(mlp, layers[-1].h, y)
    d_weights.append(_mean_outer(delta, layers[-1].h))
    d_biases.append(_mean_rows(delta))
    return Gradient(d_weights, d_biases)


def loss_value(model: StochModel, state: ChainState, x: np.ndarray, y: Labels) -> float:
    """Mean fine-tuning loss over chains."""
    layers = hidden_layers(model, state, x)
    loss = sum(layer.nll() for layer in layers) + output_nll(model.mlp, state.cached_h[-1], y)
    return float(np.mean(loss))


def binary_loss_gradient(mlp: Mlp, h_layers: List[np.ndarray], x: np.ndarray, y: Labels) -> Gradient:
    """
    Gradient of -log p(h, y | x) for binary hidden states under the sigmoid
    belief network reading: each layer contributes outer(p - h, h_below).
    """
    if len(h_layers) != len(mlp.hidden_dims):
        raise StructureError(f"{len(h_layers)} hidden layers given, network has {len(mlp.hidden_dims)}")
    d_weights, d_biases = [], []
    below = np.asarray(x, dtype=float)
    for i, h in enumerate(h_layers):
        h = np.asarray(h, dtype=float)
        delta = expit(below @ mlp.weights[i].T + mlp.biases[i]) - h
        d_weights.append(_mean_outer(delta, below))
        d_biases.append(_mean_rows(delta))
        below = h
    delta = output_delta(mlp, below, y)
    d_weights.append(_mean_outer(delta, below))
    d_biases.append(_mean_rows(delta))
    return Gradient(d_weights, d_biases)


def binary_loss_value(mlp: Mlp, h_layers: List[np.ndarray], x: np.ndarray, y: Labels) -> float:
    """Mean -log p(h, y | x) over chains for binary hidden states."""
    below = np.asarray(x, dtype=float)
    loss = 0.0
    for i, h in enumerate(h_layers):
        h = np.asarray(h, dtype=float)
        s = below @ mlp.weights[i].T + mlp.biases[i]
        loss = loss + np.sum(np.logaddexp(0.0, s) - h * s, axis=-1)
        below = h
    loss = loss + output_nll(mlp, below, y)
    return float(np.mean(loss))
