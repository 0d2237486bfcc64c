"""
Reading a sigmoid network as a Bayesian network and as a Markov network.
"""

from typing import List, Sequence

import numpy as np
from scipy.special import expit, log_expit

from models.errors import StructureError
from models.factor_net import Factor, FactorNet, NetKind, edge_potential, unary_potential
from models.mlp import Mlp, OutputKind
from inference.exact import all_assignments


def _require_sigmoid_output(mlp: Mlp):
    if mlp.output_kind is not OutputKind.BERNOULLI:
        raise StructureError("graphical-model views need binary (sigmoid) output units")


def _parent_log_odds(mlp: Mlp, node: int) -> np.ndarray:
    """Log-odds of `node` for every joint setting of its parents (last parent fastest)."""
    parents = mlp.parents(node)
    settings = all_assignments(len(parents)).astype(float)
    weights = np.array([w for _, w in parents])
    return settings @ weights + mlp.bias(node)


def mlp_to_bayes_net(mlp: Mlp, input_prior: float = 0.5) -> FactorNet:
    """
    Sigmoid Bayesian network with logistic CPDs.

    Args:
        mlp: Network whose weights and biases define the CPDs
        input_prior: P(x_i = 1) for every input node

    Returns:
        kind=BAYES FactorNet; variable ids are the Mlp node ids
    """
    _require_sigmoid_output(mlp)
    if not 0 <= input_prior <= 1:
        raise StructureError(f"input prior must lie in [0, 1], got {input_prior}")
    factors: List[Factor] = [Factor((v,), [1 - input_prior, input_prior]) for v in mlp.input_nodes()]
    for node in range(mlp.layer_dims[0], mlp.num_nodes):
        on = expit(_parent_log_odds(mlp, node))
        table = np.stack([1 - on, on], axis=-1)
        scope = tuple(p for p, _ in mlp.parents(node)) + (node,)
        factors.append(Factor(scope, table.reshape(-1)))
    return FactorNet(mlp.num_nodes, factors, NetKind.BAYES)


def bn_to_mn(mlp: Mlp, normalize_cpds: bool = True) -> FactorNet:
    """
    Markov network over the nodes of a sigmoid Bayesian network.

    Every edge A->B becomes the potential e^{w_AB} when both ends are true
    (1 otherwise) and every bias b_B becomes the unary potential e^{b_B}
    when B is true. With `normalize_cpds` each non-input node v also gets
    the factor 1 / (1 + e^{s_v}) over its parents, s_v being its log-odds;
    the normalized joint then equals the Bayes-net joint with uniform input
    priors. A node with a single parent gets a unary factor, so a net in
    which no node has two parents stays pairwise.

    Args:
        mlp: Sigmoid network
        normalize_cpds: Add the per-node normalizer factors

    Returns:
        kind=MARKOV FactorNet; variable ids are the Mlp node ids
    """
    _require_sigmoid_output(mlp)
    factors: List[Factor] = [edge_potential(a, b, w) for a, b, w in mlp.edges()]
    for node in range(mlp.layer_dims[0], mlp.num_nodes):
        factors.append(unary_potential(node, mlp.bias(node)))
    if normalize_cpds:
        for node in range(mlp.layer_dims[0], mlp.num_nodes):
            scope = tuple(p for p, _ in mlp.parents(node))
            factors.append(Factor(scope, np.exp(log_expit(-_parent_log_odds(mlp, node)))))
    return FactorNet(mlp.num_nodes, factors, NetKind.MARKOV)


def layered_markov_net(layer_dims: Sequence[int], weights: Sequence[np.ndarray]) -> FactorNet:
    """Pairwise Markov network with edge potentials on consecutive layers."""
    mlp = Mlp(layer_dims, weights, [np.zeros(layer_dims[i + 1]) for i in range(len(weights))])
    return bn_to_mn(mlp, normalize_cpds=False)
