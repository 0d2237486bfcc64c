"""
Forward pass, cross-entropy loss and exact backpropagation.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, softmax

from models.errors import StructureError
from models.mlp import ForwardTrace, Gradient, Mlp, OutputKind, check_input, label_index

PROB_CLAMP = 1e-12


def forward(mlp: Mlp, x: np.ndarray) -> ForwardTrace:
    """
    Propagate probabilities layer by layer.

    Each layer receives the previous layer's probabilities as its input
    values: the expectation-as-value reading of the network.

    Args:
        mlp: Network to evaluate
        x: Input vector with entries in [0, 1]

    Returns:
        ForwardTrace with pre-activations and activations of every layer
    """
    x = check_input(mlp, x)
    pre_activations, activations = [], []
    current = x
    for layer, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        s = w @ current + b
        last = layer == mlp.num_layers - 1
        if last and mlp.output_kind is OutputKind.CATEGORICAL:
            current = softmax(s)
        else:
            current = expit(s)
        pre_activations.append(s)
        activations.append(current)
    return ForwardTrace(x, pre_activations, activations, mlp.output_kind)


def _batch_activations(mlp: Mlp, X: np.ndarray) -> List[np.ndarray]:
    """Activations of every layer for a batch of rows, inputs first."""
    activations = [check_input(mlp, X, allow_batch=True)]
    for layer, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        s = activations[-1] @ w.T + b
        if layer == mlp.num_layers - 1 and mlp.output_kind is OutputKind.CATEGORICAL:
            activations.append(softmax(s, axis=-1))
        else:
            activations.append(expit(s))
    return activations


def predict(mlp: Mlp, X: np.ndarray) -> np.ndarray:
    """
    P(y=1 | x) for every row of X.

    For a categorical output this is the softmax probability of class 1.
    """
    output = _batch_activations(mlp, X)[-1]
    return output[..., 1] if mlp.output_kind is OutputKind.CATEGORICAL else output[..., 0]


def ce_loss(trace: ForwardTrace, y: int) -> float:
    """
    Cross-entropy of the output against a label.

    Probabilities are clamped to [1e-12, 1 - 1e-12] before the log.
    """
    out = np.clip(trace.output, PROB_CLAMP, 1 - PROB_CLAMP)
    y = int(y)
    if trace.output_kind is OutputKind.CATEGORICAL:
        return float(-np.log(out[y]))
    p = float(out[0])
    return float(-(y * np.log(p) + (1 - y) * np.log1p(-p)))


def backprop(mlp: Mlp, trace: ForwardTrace, y: int) -> Gradient:
    """
    Gradient of ce_loss with respect to every weight and bias.

    The output error is (y_hat - y) for both sigmoid and softmax outputs;
    it is pushed back through W^T and the sigmoid slope a (1 - a).
    """
    y = label_index(mlp, y)
    if mlp.output_kind is OutputKind.CATEGORICAL:
        delta = trace.output.copy()
        delta[y] -= 1.0
    else:
        delta = trace.output - y

    d_weights = [np.empty_like(w) for w in mlp.weights]
    d_biases = [np.empty_like(b) for b in mlp.biases]
    for layer in range(mlp.num_layers - 1, -1, -1):
        below = trace.layer_input(layer)
        d_weights[layer] = np.outer(delta, below)
        d_biases[layer] = delta.copy()
        if layer > 0:
            delta = (mlp.weights[layer].T @ delta) * below * (1 - below)
    return Gradient(d_weights, d_biases)


def _batch_labels(mlp: Mlp, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    labels = y.astype(int)
    arity = 2 if mlp.output_kind is OutputKind.BERNOULLI else mlp.layer_dims[-1]
    if np.any(labels != y) or np.any(labels < 0) or np.any(labels >= arity):
        raise StructureError(f"labels must be integers in 0..{arity - 1}")
    return labels


def _batch_losses(mlp: Mlp, output: np.ndarray, labels: np.ndarray) -> np.ndarray:
    out = np.clip(output, PROB_CLAMP, 1 - PROB_CLAMP)
    if mlp.output_kind is OutputKind.CATEGORICAL:
        return -np.log(np.take_along_axis(out, labels[:, None], axis=-1)[:, 0])
    p = out[:, 0]
    return -(labels * np.log(p) + (1 - labels) * np.log1p(-p))


def loss_and_gradient(mlp: Mlp, X: np.ndarray, y: np.ndarray) -> Tuple[float, Gradient]:
    """
    Mean cross-entropy and its gradient over a batch of rows.

    The whole batch goes through each layer as one matrix product; the
    result equals the mean of per-row `backprop` gradients.
    """
    labels = _batch_labels(mlp, y)
    if len(labels) == 0:
        return 0.0, Gradient.zeros_like(mlp)
    activations = _batch_activations(mlp, X)
    output = activations[-1]
    if mlp.output_kind is OutputKind.CATEGORICAL:
        delta = output - np.eye(output.shape[-1])[labels]
    else:
        delta = output - labels[:, None]

    n = len(labels)
    d_weights = [np.empty_like(w) for w in mlp.weights]
    d_biases = [np.empty_like(b) for b in mlp.biases]
    for layer in range(mlp.num_layers - 1, -1, -1):
        below = activations[layer]
        d_weights[layer] = delta.T @ below / n
        d_biases[layer] = delta.mean(axis=0)
        if layer > 0:
            delta = (delta @ mlp.weights[layer]) * below * (1 - below)
    return float(np.mean(_batch_losses(mlp, output, labels))), Gradient(d_weights, d_biases)


def mean_loss(mlp: Mlp, X: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy over a batch of rows."""
    labels = _batch_labels(mlp, y)
    if len(labels) == 0:
        return float("nan")
    return float(np.mean(_batch_losses(mlp, _batch_activations(mlp, X)[-1], labels)))


def layerwise_formula(mlp: Mlp, x: np.ndarray, observed_layers: Optional[Sequence[int]] = None) -> list:
    """
    Node probabilities written as sigma(sum_j w_j g_j + b + sum_i theta_i p_i),
    splitting each node's input into observed parents g (the inputs) and
    latent parents whose probabilities p come from the previous layer.
    """
    x = check_input(mlp, x)
    observed_layers = {0} if observed_layers is None else set(observed_layers)
    probabilities, previous = [], x
    for layer, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        observed_term = w @ previous if layer in observed_layers else np.zeros(w.shape[0])
        latent_term = np.zeros(w.shape[0]) if layer in observed_layers else w @ previous
        previous = expit(observed_term + b + latent_term)
        probabilities.append(previous)
    return probabilities
