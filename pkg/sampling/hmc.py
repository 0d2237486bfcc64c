"""
Hamiltonian Monte Carlo over hidden-unit logits.

Identity mass matrix; leapfrog integration followed by a Metropolis
test on H = U + |p|^2 / 2.
"""

import logging
from typing import Callable, Tuple, Union

import numpy as np

from models.chain import ChainState, HmcConfig, StochModel
from sampling.energy import Labels, grad_potential, potential_energy
from sampling.streams import Rngs, standard_normal, uniform

logger = logging.getLogger(__name__)

GradFn = Callable[[np.ndarray], np.ndarray]
EnergyFn = Callable[[np.ndarray], Union[float, np.ndarray]]


def leapfrog(position: np.ndarray, momentum: np.ndarray, grad_fn: GradFn,
             step_size: float, n_steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate Hamilton's equations for n_steps.

    Half momentum step, then alternating full position and momentum
    steps, closing with a half momentum step.

    Args:
        position: Starting point (one row per chain when 2-D)
        momentum: Starting momentum, same shape
        grad_fn: Gradient of the potential at a position
        step_size: Delta t
        n_steps: Number of position updates

    Returns:
        (position, momentum) at the end of the trajectory
    """
    q = np.array(position, dtype=float)
    p = np.array(momentum, dtype=float) - 0.5 * step_size * grad_fn(q)
    for step in range(n_steps):
        q = q + step_size * p
        if step < n_steps - 1:
            p = p - step_size * grad_fn(q)
    p = p - 0.5 * step_size * grad_fn(q)
    return q, p


def kinetic_energy(momentum: np.ndarray):
    return 0.5 * np.sum(momentum ** 2, axis=-1)


def hmc_transition(position: np.ndarray, energy_fn: EnergyFn, grad_fn: GradFn,
                   cfg: HmcConfig, rngs: Rngs) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    One HMC transition for any differentiable potential.

    Returns:
        (new position, accepted flags, H_1 - H_0); rejected chains keep
        their position, and a non-finite H_1 always rejects
    """
    q0 = np.array(position, dtype=float)
    p0 = standard_normal(rngs, q0.shape)
    h0 = np.asarray(energy_fn(q0)) + kinetic_energy(p0)
    with np.errstate(over="ignore", invalid="ignore"):
        q1, p1 = leapfrog(q0, p0, grad_fn, cfg.step_size, cfg.leapfrog_steps)
        h1 = np.asarray(energy_fn(q1)) + kinetic_energy(p1)
    delta_h = h1 - h0
    log_u = np.log(uniform(rngs, np.shape(delta_h)))
    accepted = np.isfinite(h1) & np.all(np.isfinite(q1), axis=-1) & (log_u < -delta_h)
    new_q = np.where(np.asarray(accepted)[..., None], q1, q0) if q0.ndim > 1 else (q1 if accepted else q0)
    return new_q, accepted, delta_h


def hmc_step(model: StochModel, state: ChainState, x: np.ndarray, y: Labels,
             cfg: HmcConfig, rngs: Rngs) -> Tuple[ChainState, Union[bool, np.ndarray], Union[float, np.ndarray]]:
    """
    HMC transition of the hidden logits of one chain or a batch of chains.

    Args:
        model: Stochastic network defining the potential
        state: Current logits
        x: Input row(s)
        y: Observed label(s)
        cfg: Step size and leapfrog steps
        rngs: One generator, or one per chain

    Returns:
        (next state, accepted, Delta H)
    """
    dims = model.mlp.hidden_dims

    def _energy(flat: np.ndarray):
        return potential_energy(model, ChainState.from_flat(flat, dims), x, y)

    def _grad(flat: np.ndarray) -> np.ndarray:
        return np.concatenate(grad_potential(model, ChainState.from_flat(flat, dims), x, y), axis=-1)

    flat, accepted, delta_h = hmc_transition(state.flat(), _energy, _grad, cfg, rngs)
    if np.ndim(accepted) == 0:
        return ChainState.from_flat(flat, dims), bool(accepted), float(delta_h)
    return ChainState.from_flat(flat, dims), accepted, delta_h
