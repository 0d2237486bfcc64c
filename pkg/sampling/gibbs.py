"""
Gibbs sampling of binary hidden units in the sigmoid belief network.

A hidden unit's conditional depends on its Markov blanket: its own
parents through its prior, and its children (the next hidden layer, or
the output when a label is observed) through their likelihoods.
"""

import logging
from typing import List, Tuple

import numpy as np
from scipy.special import expit, logsumexp

from models.errors import StructureError
from models.mlp import Mlp, OutputKind
from sampling.energy import Labels
from sampling.streams import Rngs, uniform

logger = logging.getLogger(__name__)


def _check_layers(mlp: Mlp, h_layers: List[np.ndarray]) -> List[np.ndarray]:
    layers = [np.array(h, dtype=float) for h in h_layers]
    if tuple(h.shape[-1] for h in layers) != mlp.hidden_dims:
        raise StructureError(f"hidden layers {[h.shape[-1] for h in layers]} do not match {mlp.hidden_dims}")
    if any(np.any((h != 0) & (h != 1)) for h in layers):
        raise StructureError("Gibbs states must be binary")
    return layers


def _bernoulli_loglik(s: np.ndarray, value: np.ndarray) -> np.ndarray:
    return value * s - np.logaddexp(0.0, s)


def _child_log_ratio(mlp: Mlp, layers: List[np.ndarray], x: np.ndarray, y: Labels,
                     layer: int, unit: int) -> np.ndarray:
    """log p(children | unit=1) - log p(children | unit=0)."""
    below = layers[layer]
    w = mlp.weights[layer + 1]
    s = below @ w.T + mlp.biases[layer + 1]
    current = below[..., unit]
    s_on = s + np.multiply.outer(1.0 - current, w[:, unit])
    s_off = s - np.multiply.outer(current, w[:, unit])
    if layer + 1 < len(layers):
        children = layers[layer + 1]
        return np.sum(_bernoulli_loglik(s_on, children) - _bernoulli_loglik(s_off, children), axis=-1)
    if y is None:
        return np.zeros(np.shape(current))
    if mlp.output_kind is OutputKind.CATEGORICAL:
        y = np.asarray(y, dtype=int)[..., None]
        on = np.take_along_axis(s_on, y, axis=-1)[..., 0] - logsumexp(s_on, axis=-1)
        off = np.take_along_axis(s_off, y, axis=-1)[..., 0] - logsumexp(s_off, axis=-1)
        return on - off
    y = np.asarray(y, dtype=float)
    return _bernoulli_loglik(s_on[..., 0], y) - _bernoulli_loglik(s_off[..., 0], y)


def gibbs_log_odds(mlp: Mlp, h_layers: List[np.ndarray], x: np.ndarray, y: Labels,
                   layer: int, unit: int) -> np.ndarray:
    """Log-odds of hidden unit (layer, unit) = 1 given everything else."""
    layers = _check_layers(mlp, h_layers)
    return _log_odds(mlp, layers, np.asarray(x, dtype=float), y, layer, unit)


def _log_odds(mlp: Mlp, layers: List[np.ndarray], x: np.ndarray, y: Labels, layer: int, unit: int):
    below = x if layer == 0 else layers[layer - 1]
    prior = below @ mlp.weights[layer][unit] + mlp.biases[layer][unit]
    return prior + _child_log_ratio(mlp, layers, x, y, layer, unit)


def gibbs_conditional(mlp: Mlp, h_layers: List[np.ndarray], x: np.ndarray, y: Labels,
                      layer: int, unit: int) -> Tuple[np.ndarray, np.ndarray]:
    """(P(unit=0 | rest), P(unit=1 | rest)); the pair sums to exactly 1."""
    p_on = expit(gibbs_log_odds(mlp, h_layers, x, y, layer, unit))
    return 1.0 - p_on, p_on


def gibbs_step(mlp: Mlp, h_layers: List[np.ndarray], x: np.ndarray, y: Labels, rngs: Rngs) -> List[np.ndarray]:
    """
    One systematic-scan sweep, layer by layer and unit by unit.

    Args:
        mlp: Network read as a sigmoid belief network
        h_layers: Binary hidden states (one row per chain when 2-D)
        x: Observed inputs
        y: Observed label(s), or None to sample without output evidence
        rngs: One generator, or one per chain

    Returns:
        New binary states; the input lists are not modified
    """
    layers = _check_layers(mlp, h_layers)
    x = np.asarray(x, dtype=float)
    batch = layers[0].shape[:-1]
    for layer, h in enumerate(layers):
        for unit in range(h.shape[-1]):
            p_on = expit(_log_odds(mlp, layers, x, y, layer, unit))
            h[..., unit] = (uniform(rngs, batch) < p_on).astype(float)
    return layers


def init_binary_chain(mlp: Mlp, x: np.ndarray, rngs: Rngs) -> List[np.ndarray]:
    """Ancestral sample of the hidden layers given x, ignoring the output."""
    below = np.asarray(x, dtype=float)
    batch = below.shape[:-1]
    layers = []
    for i, n in enumerate(mlp.hidden_dims):
        p = expit(below @ mlp.weights[i].T + mlp.biases[i])
        h = (uniform(rngs, batch + (n,)) < p).astype(float)
        layers.append(h)
        below = h
    return layers
