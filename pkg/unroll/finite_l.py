"""
Node marginals of the unrolled tree model.

`explicit_tree_marginal` eliminates variables leaf-to-root on a
materialized tree and is only usable for small L. `finite_l_forward`
exploits the fact that all L copies of a parent are identical, which
collapses the same elimination into a per-layer recursion whose cost
does not depend on L:

    s_H = sum_j w_j g_j + b_H + sum_i L [log(e^{p_i} e^{theta_i/L} + 1) - log(e^{p_i} + 1)]

where p_i is the log-odds of latent parent i computed the same way one
layer down. Both return the marginal of a node given the inputs and its
own ancestors only (no message from the node's children), which is the
quantity that tends to the forward pass as L grows.
"""

import logging
from typing import Dict, List, Optional

import numpy as np
from scipy.special import expit, log_expit

from models.errors import StructureError
from models.mlp import Gradient, Mlp, OutputKind, check_input, label_index
from models.unrolled_tree import FiniteLModel, UnrolledTree
from network.propagation import ce_loss, forward

logger = logging.getLogger(__name__)

FD_STEP = 1e-5


def _binary_input(mlp: Mlp, x: np.ndarray) -> np.ndarray:
    x = check_input(mlp, x)
    if np.any((x != 0) & (x != 1)):
        raise StructureError("the tree model observes binary inputs only")
    return x


def _require_bernoulli(mlp: Mlp):
    if mlp.output_kind is not OutputKind.BERNOULLI:
        raise StructureError("the tree model has binary output nodes only")


def explicit_tree_marginal(tree: UnrolledTree, x: np.ndarray, node: int) -> float:
    """
    Exact P(node = 1 | x) on a materialized tree.

    The first copy of `node` is taken as the root of its own ancestor
    subtree; every input copy is observed from `x` and every latent copy
    is summed out by passing two-entry log messages towards the root.

    Args:
        tree: Output of unroll_step1/unroll_step2
        x: Binary input vector
        node: Origin id of the node to query

    Returns:
        Marginal probability that the node is true
    """
    copies = tree.copies_of(node)
    if not copies:
        raise StructureError(f"node {node} has no copy in the tree")
    evidence = tree.observe(x)
    if copies[0] in evidence:
        return float(evidence[copies[0]])

    def _log_belief(vertex: int) -> np.ndarray:
        if vertex in evidence:
            belief = np.full(2, -np.inf)
            belief[evidence[vertex]] = 0.0
            return belief
        belief = np.array([0.0, tree.biases[tree.vertices[vertex].origin]])
        for e in tree.parent_edges(vertex):
            edge = tree.edges[e]
            parent = _log_belief(edge.parent)
            # sum over the parent's two states of m(parent) * e^{w * parent * self}
            belief[0] += np.logaddexp(parent[0], parent[1])
            belief[1] += np.logaddexp(parent[0], parent[1] + edge.weight)
        return belief

    belief = _log_belief(copies[0])
    return float(expit(belief[1] - belief[0]))


def copy_term(parent_log_odds: np.ndarray, scaled_weight: np.ndarray) -> np.ndarray:
    """
    log((e^p e^d + 1) / (e^p + 1)) elementwise, stable for any p and d.

    Small |d| goes through log1p(sigmoid(p) * expm1(d)), which keeps full
    relative accuracy when d = theta / L is tiny; larger |d| uses the
    log-sum-exp form, which cannot overflow.
    """
    p, d = np.broadcast_arrays(np.asarray(parent_log_odds, float), np.asarray(scaled_weight, float))
    out = np.empty(p.shape)
    small = np.abs(d) <= 1.0
    out[small] = np.log1p(expit(p[small]) * np.expm1(d[small]))
    big = ~small
    out[big] = np.logaddexp(p[big] + d[big], 0.0) - np.logaddexp(p[big], 0.0)
    return out


def finite_l_log_odds(m: FiniteLModel, x: np.ndarray) -> List[np.ndarray]:
    """Per-layer log-odds of every non-input node under the L-copy tree."""
    mlp = m.mlp
    _require_bernoulli(mlp)
    x = _binary_input(mlp, x)
    if m.is_limit:
        return [s.copy() for s in forward(mlp, x).pre_activations]
    L = float(m.L)
    layers: List[np.ndarray] = []
    for layer, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        if layer == 0:
            # L observed copies of weight w/L add up to w g
            s = w @ x + b
        else:
            s = b + L * copy_term(layers[-1][None, :], w / L).sum(axis=1)
        layers.append(s)
    return layers


def finite_l_forward(m: FiniteLModel, x: np.ndarray) -> List[np.ndarray]:
    """
    P(node = 1 | x) for every non-input node, layer by layer.

    In the limit mode (L=None) this is exactly `forward(mlp, x).activations`.
    """
    if m.is_limit:
        _require_bernoulli(m.mlp)
        return forward(m.mlp, _binary_input(m.mlp, x)).activations
    return [expit(s) for s in finite_l_log_odds(m, x)]


def finite_l_loglik(m: FiniteLModel, x: np.ndarray, y: int) -> float:
    """log P(y | x) at the output node of the tree model."""
    y = label_index(m.mlp, y)
    if m.is_limit:
        return -ce_loss(forward(m.mlp, _binary_input(m.mlp, x)), y)
    s = float(finite_l_log_odds(m, x)[-1][0])
    return float(log_expit(s) if y == 1 else log_expit(-s))


def finite_l_gradient(m: FiniteLModel, x: np.ndarray, y: int, step: float = FD_STEP) -> Gradient:
    """
    Gradient of finite_l_loglik with respect to all weights and biases.

    Central differences at step h and h/2 combined by Richardson
    extrapolation, (4 D(h/2) - D(h)) / 3; it never touches backprop.
    """
    base = m.mlp.parameters()

    def _loglik(theta: np.ndarray) -> float:
        return finite_l_loglik(FiniteLModel(m.mlp.with_parameters(theta), m.L), x, y)

    def _central(h: float) -> np.ndarray:
        grad = np.empty_like(base)
        for i in range(base.size):
            shift = np.zeros_like(base)
            shift[i] = h
            grad[i] = (_loglik(base + shift) - _loglik(base - shift)) / (2 * h)
        return grad

    coarse, fine = _central(step), _central(step / 2)
    return Gradient.from_flat(m.mlp, (4 * fine - coarse) / 3)


def all_node_marginals(m: FiniteLModel, x: np.ndarray) -> Dict[int, float]:
    """finite_l_forward keyed by node id."""
    probabilities = finite_l_forward(m, x)
    result: Dict[int, float] = {}
    for layer, values in enumerate(probabilities, start=1):
        for j, value in enumerate(values):
            result[m.mlp.node_id(layer, j)] = float(value)
    return result


def explicit_node_marginals(tree: UnrolledTree, mlp: Mlp, x: np.ndarray,
                            nodes: Optional[List[int]] = None) -> Dict[int, float]:
    """explicit_tree_marginal for every non-input node (or the given ones)."""
    if nodes is None:
        nodes = list(range(mlp.layer_dims[0], mlp.num_nodes))
    return {node: explicit_tree_marginal(tree, x, node) for node in nodes}
