"""
Synthetic ground-truth models and labelled datasets.

Each dataset row carries the exact P(y=1 | x) of the model that
generated it, so fitted predictors can be scored against the truth
rather than against noisy labels.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import expit

from inference.conversion import layered_markov_net, mlp_to_bayes_net
from inference.exact import enumerate_joint, ve_marginal
from models.dataset import Dataset, GenKind, GenSpec
from models.factor_net import FactorNet
from models.mlp import Mlp

logger = logging.getLogger(__name__)

INPUT_PRIOR = 0.5


@dataclass
class GeneratedModel:
    """
    A generating model and the views of it needed downstream.

    Attributes:
        net: Bayes net (bn kind) or pairwise Markov net (mn kind)
        mlp: Layered weights the net was built from
        spec: Generator settings
    """

    net: FactorNet
    mlp: Mlp
    spec: GenSpec

    @property
    def input_vars(self) -> List[int]:
        return self.mlp.input_nodes()

    @property
    def output_var(self) -> int:
        return self.mlp.output_nodes()[0]


class DataGenerator:
    """Seeded generators for the synthetic benchmarks."""

    WEIGHT_SCALES = (0.3, 1.0, 3.0, 10.0)

    @staticmethod
    def gen_model(spec: GenSpec) -> GeneratedModel:
        """
        Draw a ground-truth model.

        Edge weights are U(-w, w), biases are zero. The bn kind uses
        logistic CPDs with Bernoulli(0.5) inputs; the mn kind puts the
        same weights on pairwise potentials of the layered graph.

        Args:
            spec: Kind, layer sizes, weight scale and seed

        Returns:
            GeneratedModel whose net is fully determined by spec.seed
        """
        model_seq, _ = np.random.SeedSequence(spec.seed).spawn(2)
        mlp = Mlp.uniform(spec.dims, np.random.default_rng(model_seq), spec.weight_scale)
        if spec.kind is GenKind.BN:
            net = mlp_to_bayes_net(mlp, INPUT_PRIOR)
        else:
            net = layered_markov_net(spec.dims, mlp.weights)
        logger.debug("generated %s model with %d variables", spec.label, net.num_vars)
        return GeneratedModel(net, mlp, spec)

    @staticmethod
    def _ancestral(mlp: Mlp, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        x = (rng.random((n, mlp.layer_dims[0])) < INPUT_PRIOR).astype(float)
        current = x
        for w, b in zip(mlp.weights, mlp.biases):
            current = (rng.random((n, w.shape[0])) < expit(current @ w.T + b)).astype(float)
        return x, current[:, 0].astype(int)

    @staticmethod
    def _from_joint(gen: GeneratedModel, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        assignments, values = enumerate_joint(gen.net)
        draws = rng.choice(len(values), size=n, p=values / values.sum())
        rows = assignments[draws]
        return rows[:, gen.input_vars].astype(float), rows[:, gen.output_var].astype(int)

    @staticmethod
    def exact_labels(gen: GeneratedModel, X: np.ndarray) -> np.ndarray:
        """P(y=1 | x) by variable elimination, computed once per distinct x."""
        cache: Dict[Tuple[int, ...], float] = {}
        truth = np.empty(len(X))
        for i, row in enumerate(X):
            key = tuple(int(v) for v in row)
            if key not in cache:
                evidence = dict(zip(gen.input_vars, key))
                cache[key] = ve_marginal(gen.net, gen.output_var, evidence)[1]
            truth[i] = cache[key]
        return truth

    @staticmethod
    def sample_dataset(gen: GeneratedModel, n: int, seed: int) -> Dataset:
        """
        Draw n labelled rows.

        Bayes nets are sampled ancestrally; Markov nets by drawing whole
        assignments from the enumerated joint.

        Args:
            gen: Model from gen_model
            n: Number of rows
            seed: Seed for the row draws

        Returns:
            Dataset with binary x, binary y and exact p_true
        """
        rng = np.random.default_rng(seed)
        if gen.spec.kind is GenKind.BN:
            X, y = DataGenerator._ancestral(gen.mlp, n, rng)
        else:
            X, y = DataGenerator._from_joint(gen, n, rng)
        return Dataset(X, y, DataGenerator.exact_labels(gen, X), gen.spec.label)

    @staticmethod
    def generate(spec: GenSpec) -> Tuple[GeneratedModel, Dataset]:
        """Model and spec.n_points rows, both from spec.seed."""
        gen = DataGenerator.gen_model(spec)
        _, row_seq = np.random.SeedSequence(spec.seed).spawn(2)
        row_seed = int(row_seq.generate_state(1)[0])
        return gen, DataGenerator.sample_dataset(gen, spec.n_points, row_seed)
