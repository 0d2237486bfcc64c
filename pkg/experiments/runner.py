"""
Training, fine-tuning and evaluation steps, and the per-seed comparison
protocol built from them.

One seed of the protocol: generate a dataset, split it 80:20, train a
network with SGD/Adam, then compare four ways of spending the next
epochs (continued SGD, Gibbs CD-k, HMC CD-k for each L) on MAE against
the exact P(y=1|x) and on ECE against the labels.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from data.generator import DataGenerator
from metrics.calibration import ece, mae
from metrics.monitor import RunMonitor
from models.chain import SamplerKind
from models.dataset import Dataset, GenKind, GenSpec
from models.errors import DivergenceError
from models.mlp import Mlp
from network.optim import Optimizer, minibatches
from network.propagation import loss_and_gradient, mean_loss, predict
from sampling.contrastive import CdResult, cd_k_train, predict_probs
from experiments.config import RunConfig

logger = logging.getLogger(__name__)

METHOD_DNN = "dnn"
METHOD_SGD = "sgd"
METHOD_GIBBS = "gibbs"
DEFAULT_LS = (10.0, 100.0, 1000.0)
LOSS_COLUMNS = ["epoch", "train_loss", "test_loss"]


def hmc_method(L: float) -> str:
    return f"hmc-L{L:g}"


@dataclass
class TrainResult:
    mlp: Mlp
    history: List[Dict[str, Any]] = field(default_factory=list)


def _loss_row(epoch: int, mlp: Mlp, train: Dataset, test: Optional[Dataset]) -> Dict[str, Any]:
    return {
        "epoch": epoch,
        "train_loss": mean_loss(mlp, train.X, train.y),
        "test_loss": "" if test is None or len(test) == 0 else mean_loss(mlp, test.X, test.y),
    }


def train_mlp(train: Dataset, test: Optional[Dataset], dims: Sequence[int], cfg: RunConfig,
              epochs: Optional[int] = None, init: Optional[Mlp] = None, track_loss: bool = True) -> TrainResult:
    """
    Gradient training of the cross-entropy loss.

    Args:
        train: Rows to fit
        test: Rows whose loss is only reported (may be None)
        dims: Layer sizes, used when no initial network is given
        cfg: Learning rate, optimizer, batch size and seed
        epochs: Passes over the data (default cfg.train_epochs)
        init: Network to start from instead of a fresh N(0, 0.1^2) one
        track_loss: Record the per-epoch losses; off leaves the history empty

    Returns:
        TrainResult with the final network and one loss row per epoch,
        epoch 0 holding the losses before any update

    Raises:
        DivergenceError: If a batch loss or gradient is not finite
    """
    epochs = cfg.train_epochs if epochs is None else epochs
    mlp = init if init is not None else Mlp.initialize(dims, np.random.default_rng(cfg.seed))
    optimizer = Optimizer(cfg.optimizer, cfg.lr)
    history = [_loss_row(0, mlp, train, test)] if track_loss else []
    for epoch in range(epochs):
        for rows in minibatches(len(train), cfg.batch_size, cfg.seed, epoch):
            loss, grad = loss_and_gradient(mlp, train.X[rows], train.y[rows])
            if not (np.isfinite(loss) and np.all(np.isfinite(grad.flat()))):
                raise DivergenceError(epoch, loss, f"lr={cfg.lr} optimizer={cfg.optimizer.value}")
            mlp = optimizer.step(mlp, grad)
        if track_loss:
            history.append(_loss_row(epoch + 1, mlp, train, test))
            logger.debug("epoch %d train loss %.5f", epoch + 1, history[-1]["train_loss"])
    if epochs and history:
        logger.info("trained %d epochs, final train loss %.5f", epochs, history[-1]["train_loss"])
    return TrainResult(mlp, history)


def continue_training(mlp: Mlp, train: Dataset, cfg: RunConfig, epochs: Optional[int] = None,
                      track_loss: bool = True) -> TrainResult:
    """More epochs of plain gradient training from an existing network."""
    epochs = cfg.epochs if epochs is None else epochs
    return train_mlp(train, None, mlp.layer_dims, cfg, epochs, init=mlp, track_loss=track_loss)


def finetune(mlp: Mlp, train: Dataset, cfg: RunConfig, sampler: Optional[SamplerKind] = None,
             L: Optional[float] = None) -> CdResult:
    """CD-k fine-tuning with the sampler and L from cfg unless overridden."""
    sampler = cfg.sampler if sampler is None else SamplerKind(sampler)
    if L is not None:
        cfg = replace(cfg, L=L)
    return cd_k_train(cfg.stoch_model(mlp), train, cfg.cd_config(), sampler, cfg.hmc_config(), cfg.seed)


def stochastic_predictions(mlp: Mlp, X: np.ndarray, cfg: RunConfig, sampler: Optional[SamplerKind] = None,
                           L: Optional[float] = None) -> np.ndarray:
    """Monte-Carlo P(y=1|x) with cfg.n_samples hidden samples per row."""
    sampler = cfg.sampler if sampler is None else SamplerKind(sampler)
    model = replace(cfg, L=cfg.L if L is None else L).stoch_model(mlp)
    rng = np.random.default_rng(cfg.seed)
    return predict_probs(model, X, cfg.n_samples, rng, binary=sampler is SamplerKind.GIBBS)


def evaluate(pred: np.ndarray, dataset: Dataset, bins: int = 10) -> Dict[str, float]:
    """MAE against p_true (synthetic data only) and ECE against the labels."""
    metrics = {}
    if dataset.p_true is not None:
        metrics["mae"] = mae(pred, dataset.p_true)
    metrics["ece"] = ece(pred, dataset.y, bins)
    return metrics


@dataclass(frozen=True)
class SeedTask:
    """
    One repetition of the comparison protocol.

    Attributes:
        kind, dims, weight_scale, n_points: Synthetic data settings
        seed: Seed of this repetition
        cfg: Run configuration (its seed is replaced by `seed`)
        Ls: Variance divisors for the HMC fine-tunes
        methods: Subset of dnn, sgd, gibbs, hmc to run
        fix_data: Reuse the data of `data_seed` for every repetition
        data_seed: Seed of the shared data when fix_data is on
    """

    kind: GenKind = GenKind.BN
    dims: Tuple[int, ...] = (4, 4, 4, 1)
    weight_scale: float = 0.3
    n_points: int = 1000
    seed: int = 0
    cfg: RunConfig = RunConfig()
    Ls: Tuple[float, ...] = DEFAULT_LS
    methods: Tuple[str, ...] = (METHOD_DNN, METHOD_SGD, METHOD_GIBBS, "hmc")
    fix_data: bool = False
    data_seed: int = 0


def run_seed(task: SeedTask) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]]]:
    """
    Run every requested method for one seed.

    Returns:
        (report rows, timing rows)
    """
    cfg = replace(task.cfg, seed=task.seed)
    spec = GenSpec(task.kind, task.dims, task.weight_scale, task.n_points,
                   task.data_seed if task.fix_data else task.seed)
    _, dataset = DataGenerator.generate(spec)
    train, test = dataset.split(cfg.train_fraction, task.seed)
    monitor = RunMonitor(dataset=spec.label, seed=task.seed)
    rows: List[Dict[str, Any]] = []

    def _record(method: str, pred: np.ndarray):
        for metric, value in evaluate(pred, test, cfg.bins).items():
            rows.append({"method": method, "dataset": spec.label, "weight_scale": task.weight_scale,
                         "epochs": cfg.train_epochs, "metric": metric, "value": value, "seed": task.seed})

    monitor.method = METHOD_DNN
    with monitor.phase("train", cfg.train_epochs):
        dnn = train_mlp(train, test, task.dims, cfg, track_loss=False).mlp
    if METHOD_DNN in task.methods:
        _record(METHOD_DNN, predict(dnn, test.X))

    if METHOD_SGD in task.methods:
        monitor.method = METHOD_SGD
        with monitor.phase("finetune", cfg.epochs):
            sgd = continue_training(dnn, train, cfg, track_loss=False).mlp
        _record(METHOD_SGD, predict(sgd, test.X))

    if METHOD_GIBBS in task.methods:
        monitor.method = METHOD_GIBBS
        with monitor.phase("finetune", cfg.epochs):
            tuned = finetune(dnn, train, cfg, SamplerKind.GIBBS).mlp
        _record(METHOD_GIBBS, stochastic_predictions(tuned, test.X, cfg, SamplerKind.GIBBS))

    if "hmc" in task.methods:
        for L in task.Ls:
            monitor.method = hmc_method(L)
            with monitor.phase("finetune", cfg.epochs):
                tuned = finetune(dnn, train, cfg, SamplerKind.HMC, L).mlp
            _record(hmc_method(L), stochastic_predictions(tuned, test.X, cfg, SamplerKind.HMC, L))

    logger.info("seed %d of %s done: %d report rows", task.seed, spec.label, len(rows))
    return rows, monitor.snapshots


def run_experiment(tasks: Sequence[SeedTask], workers: int = 1) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]]]:
    """
    Run seeds serially or in a process pool; results do not depend on `workers`.

    Returns:
        (report rows, timing rows) concatenated in task order
    """
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_seed, tasks))
    else:
        results = [run_seed(task) for task in tasks]
    rows = [row for report, _ in results for row in report]
    timings = [row for _, timing in results for row in timing]
    return rows, timings
