"""MCMC over hidden units and contrastive-divergence fine-tuning."""

from .energy import binary_loss_gradient, grad_potential, loss_gradient, potential_energy
from .hmc import hmc_step, hmc_transition, leapfrog
from .gibbs import gibbs_conditional, gibbs_step, init_binary_chain
from .contrastive import CdResult, cd_k_train, init_chain, predict_prob, predict_probs
from .streams import chain_rngs

__all__ = [
    'potential_energy', 'grad_potential', 'loss_gradient', 'binary_loss_gradient',
    'leapfrog', 'hmc_transition', 'hmc_step',
    'gibbs_conditional', 'gibbs_step', 'init_binary_chain',
    'init_chain', 'predict_prob', 'predict_probs', 'cd_k_train', 'CdResult',
    'chain_rngs',
]
