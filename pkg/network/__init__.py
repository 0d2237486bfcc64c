"""Sigmoid network forward pass, loss, gradients and optimizers."""

from .propagation import backprop, ce_loss, forward, layerwise_formula, loss_and_gradient, mean_loss, predict
from .optim import AdamState, Optimizer, adam_step, minibatches, sgd_step

__all__ = [
    'forward', 'predict', 'ce_loss', 'backprop', 'loss_and_gradient', 'mean_loss', 'layerwise_formula',
    'AdamState', 'Optimizer', 'adam_step', 'sgd_step', 'minibatches',
]
