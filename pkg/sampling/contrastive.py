"""
Chain initialisation, Monte-Carlo prediction and CD-k fine-tuning.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import expit, logit, softmax

from models.chain import CdConfig, ChainState, HmcConfig, SamplerKind, StochModel
from models.dataset import Dataset
from models.errors import DivergenceError, StructureError
from models.mlp import Gradient, Mlp, OutputKind, check_input
from network.optim import Optimizer, minibatches
from sampling.energy import binary_loss_gradient, binary_loss_value, loss_gradient, loss_value
from sampling.gibbs import gibbs_step, init_binary_chain
from sampling.hmc import hmc_step
from sampling.streams import Rngs, chain_rngs, select, standard_normal

logger = logging.getLogger(__name__)

H_CLAMP = 1e-6


def _gaussian_layer(p: np.ndarray, L: float, rngs: Rngs) -> np.ndarray:
    """Gaussian draw around p, clamped; L=inf returns p itself."""
    if np.isinf(L):
        return p
    h = p + np.sqrt(p * (1 - p) / L) * standard_normal(rngs, p.shape)
    return np.clip(h, H_CLAMP, 1 - H_CLAMP)


def init_chain(model: StochModel, x: np.ndarray, rngs: Rngs) -> ChainState:
    """
    Forward-sample every hidden layer, ignoring the output.

    h_ij ~ N(p_ij, p_ij (1 - p_ij) / L) given the sampled layer below,
    clamped to (1e-6, 1 - 1e-6) and stored as logits. A 2-D `x` starts
    one chain per row.
    """
    mlp = model.mlp
    below = np.asarray(x, dtype=float)
    logits = []
    for i in range(len(mlp.hidden_dims)):
        p = expit(below @ mlp.weights[i].T + mlp.biases[i])
        h = np.clip(_gaussian_layer(p, model.L, rngs), H_CLAMP, 1 - H_CLAMP)
        logits.append(logit(h))
        below = h
    return ChainState.from_logits(logits)


def output_probability(mlp: Mlp, last_hidden: np.ndarray) -> np.ndarray:
    """P(y=1 | h_K); for a categorical output, the probability of class 1."""
    s = last_hidden @ mlp.weights[-1].T + mlp.biases[-1]
    if mlp.output_kind is OutputKind.CATEGORICAL:
        return softmax(s, axis=-1)[..., 1]
    return expit(s[..., 0])


def predict_prob(model: StochModel, x: np.ndarray, n_samples: int, rng: np.random.Generator,
                 binary: bool = False) -> float:
    """
    Mean output probability over n_samples forward samples of the hidden units.

    Args:
        model: Stochastic network
        x: One input vector
        n_samples: Number of hidden-state samples
        rng: Random generator
        binary: Draw Bernoulli hidden units (the Gibbs reading) instead of Gaussians

    Returns:
        Estimate of P(y=1 | x), always strictly inside (0, 1) for finite weights
    """
    if n_samples < 1:
        raise StructureError(f"n_samples must be at least 1, got {n_samples}")
    mlp = model.mlp
    x = check_input(mlp, x)
    below = np.broadcast_to(x, (n_samples, x.size))
    for i in range(len(mlp.hidden_dims)):
        p = expit(below @ mlp.weights[i].T + mlp.biases[i])
        if binary:
            below = (rng.random(p.shape) < p).astype(float)
        else:
            below = _gaussian_layer(p, model.L, rng)
    return float(np.mean(output_probability(mlp, below)))


def predict_probs(model: StochModel, X: np.ndarray, n_samples: int, rng: np.random.Generator,
                  binary: bool = False) -> np.ndarray:
    """predict_prob for every row of X."""
    return np.array([predict_prob(model, x, n_samples, rng, binary) for x in np.asarray(X, dtype=float)])


@dataclass
class CdResult:
    """Outcome of a fine-tuning run."""

    mlp: Mlp
    losses: List[float] = field(default_factory=list)
    epoch_seconds: List[float] = field(default_factory=list)
    acceptance: Optional[float] = None


class _HmcChains:
    """Persistent logit chains, one per training row."""

    def __init__(self, model: StochModel, X: np.ndarray, y: np.ndarray, cfg: HmcConfig, rngs: List):
        self.X, self.y, self.cfg, self.rngs = X, y, cfg, rngs
        self.state = init_chain(model, X, rngs)
        self.accepted: List[float] = []

    def advance(self, model: StochModel, rows: np.ndarray, steps: int):
        sub = self.state.select(rows)
        for _ in range(steps):
            sub, accepted, _ = hmc_step(model, sub, self.X[rows], self.y[rows], self.cfg, select(self.rngs, rows))
            self.accepted.append(float(np.mean(accepted)))
        self.state = self.state.replace(rows, sub)

    def loss_and_gradient(self, model: StochModel, rows: np.ndarray):
        sub = self.state.select(rows)
        return (loss_value(model, sub, self.X[rows], self.y[rows]),
                loss_gradient(model, sub, self.X[rows], self.y[rows]))


class _GibbsChains:
    """Persistent binary chains, one per training row."""

    def __init__(self, model: StochModel, X: np.ndarray, y: np.ndarray, rngs: List):
        self.X, self.y, self.rngs = X, y, rngs
        self.layers = init_binary_chain(model.mlp, X, rngs)

    def advance(self, model: StochModel, rows: np.ndarray, steps: int):
        sub = [h[rows] for h in self.layers]
        for _ in range(steps):
            sub = gibbs_step(model.mlp, sub, self.X[rows], self.y[rows], select(self.rngs, rows))
        for h, new in zip(self.layers, sub):
            h[rows] = new

    def loss_and_gradient(self, model: StochModel, rows: np.ndarray):
        sub = [h[rows] for h in self.layers]
        return (binary_loss_value(model.mlp, sub, self.X[rows], self.y[rows]),
                binary_loss_gradient(model.mlp, sub, self.X[rows], self.y[rows]))


def _finite(loss: float, grad: Gradient) -> bool:
    return bool(np.isfinite(loss) and np.all(np.isfinite(grad.flat())))


def cd_k_train(model: StochModel, dataset: Dataset, cfg: CdConfig,
               sampler: SamplerKind = SamplerKind.HMC,
               hmc: HmcConfig = HmcConfig(), seed: int = 0) -> CdResult:
    """
    CD-k fine-tuning with persistent per-row chains.

    Burn-in runs cfg.burn_in sampling steps on every chain. Each update
    then takes the loss gradient at the current hidden states, applies
    one optimizer step, and advances the chains of the batch by cfg.k
    steps under the new weights.

    Args:
        model: Stochastic network to start from
        dataset: Training rows (labels observed)
        cfg: Schedule and optimizer settings
        sampler: HMC over Gaussian logits or Gibbs over binary units
        hmc: Leapfrog settings (ignored by Gibbs)
        seed: Master seed; chain i draws from its own spawned stream

    Returns:
        CdResult with the fine-tuned network and the mean loss per epoch

    Raises:
        DivergenceError: When a loss or gradient stops being finite
    """
    if len(dataset) == 0:
        raise StructureError("cannot fine-tune on an empty dataset")
    sampler = SamplerKind(sampler)
    X, y = dataset.X, dataset.y
    rngs = chain_rngs(seed, len(dataset))
    if sampler is SamplerKind.HMC:
        chains = _HmcChains(model, X, y, hmc, rngs)
    else:
        chains = _GibbsChains(model, X, y, rngs)

    everyone = np.arange(len(dataset))
    chains.advance(model, everyone, cfg.burn_in)
    optimizer = Optimizer(cfg.optimizer, cfg.lr)
    result = CdResult(model.mlp)

    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        losses = []
        for rows in minibatches(len(dataset), cfg.batch_size, seed, epoch):
            loss, grad = chains.loss_and_gradient(model, rows)
            if not _finite(loss, grad):
                raise DivergenceError(epoch, loss, f"sampler={sampler.value} lr={cfg.lr}")
            model = model.with_mlp(optimizer.step(model.mlp, grad))
            chains.advance(model, rows, cfg.k)
            losses.append(loss)
        result.losses.append(float(np.mean(losses)))
        result.epoch_seconds.append(time.perf_counter() - started)
        logger.info("%s epoch %d/%d loss %.5f", sampler.value, epoch + 1, cfg.epochs, result.losses[-1])

    result.mlp = model.mlp
    if sampler is SamplerKind.HMC and chains.accepted:
        result.acceptance = float(np.mean(chains.accepted))
        logger.info("hmc acceptance %.3f", result.acceptance)
    return result
