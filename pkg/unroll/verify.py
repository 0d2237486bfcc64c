"""
Numerical convergence suites for the tree construction.

Each suite returns CSV-ready rows with the columns of `VERIFY_COLUMNS`
and collects human readable breach messages instead of stopping at the
first failure; `verify_all` raises ToleranceBreach once everything ran.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from models.errors import ToleranceBreach
from models.mlp import Mlp, binary_inputs
from models.unrolled_tree import FiniteLModel
from network.propagation import backprop, forward
from unroll.construct import unroll
from unroll.finite_l import explicit_node_marginals, finite_l_forward, finite_l_gradient

logger = logging.getLogger(__name__)

VERIFY_COLUMNS = ["seed", "dims", "L", "max_prob_gap", "max_grad_gap", "check"]

DEFAULT_DIMS: Tuple[Tuple[int, ...], ...] = ((2, 2, 1), (3, 3, 1), (4, 4, 1), (2, 3, 2, 1), (4, 4, 4, 1))
ORACLE_DIMS: Tuple[Tuple[int, ...], ...] = ((1, 1, 1), (2, 1, 1), (1, 2, 1), (2, 2, 1))


@dataclass(frozen=True)
class VerifyConfig:
    """
    Grids and tolerances of the three suites.

    Attributes:
        seeds: One random network per seed
        dims: Layer sizes, assigned to seeds round-robin
        scale: Weights and biases are drawn from U(-scale, scale)
        prob_exponents: Theorem-1 grid L = 2**k
        ratio_from: Smallest k whose halving ratio is checked
        ratio_band: Allowed gap(2L) / gap(L)
        prob_L: L at which the absolute probability tolerance applies
        prob_tol: Absolute tolerance on node probabilities at prob_L
        grad_L: Theorem-2 grid, increasing
        grad_tol: Relative gradient tolerance at the last grad_L
        oracle_L: Copy counts compared against the explicit tree
        oracle_tol: Explicit versus symbolic tolerance
    """

    seeds: Tuple[int, ...] = tuple(range(20))
    dims: Tuple[Tuple[int, ...], ...] = DEFAULT_DIMS
    scale: float = 3.0
    prob_exponents: Tuple[int, ...] = tuple(range(15))
    ratio_from: int = 6
    ratio_band: Tuple[float, float] = (0.35, 0.65)
    prob_L: int = 10 ** 4
    prob_tol: float = 5e-4
    grad_L: Tuple[int, ...] = (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5)
    grad_tol: float = 1e-3
    oracle_L: Tuple[int, ...] = (1, 2, 3)
    oracle_tol: float = 1e-10


def dims_label(dims: Sequence[int]) -> str:
    return "-".join(str(n) for n in dims)


def random_net(seed: int, dims: Sequence[int], scale: float = 3.0) -> Mlp:
    """Weights and biases from U(-scale, scale), seeded."""
    return Mlp.uniform(dims, np.random.default_rng(seed), scale, scale)


def _row(seed: int, dims: Sequence[int], L, prob_gap="", grad_gap="", check="") -> Dict[str, object]:
    return {"seed": seed, "dims": dims_label(dims), "L": L,
            "max_prob_gap": prob_gap, "max_grad_gap": grad_gap, "check": check}


def max_prob_gap(mlp: Mlp, L: int) -> float:
    """Largest |finite-L marginal - forward probability| over nodes and binary inputs."""
    model = FiniteLModel(mlp, L)
    gap = 0.0
    for x in binary_inputs(mlp.layer_dims[0]):
        reference = forward(mlp, x).activations
        for approx, exact in zip(finite_l_forward(model, x), reference):
            gap = max(gap, float(np.max(np.abs(approx - exact))))
    return gap


def max_grad_gap(mlp: Mlp, L: int) -> float:
    """
    Largest |finite-L loglik gradient + backprop| over inputs and both labels,
    relative to max(1, largest backprop entry).
    """
    model = FiniteLModel(mlp, L)
    gap, scale = 0.0, 1.0
    for x in binary_inputs(mlp.layer_dims[0]):
        trace = forward(mlp, x)
        for y in (0, 1):
            exact = backprop(mlp, trace, y)
            approx = finite_l_gradient(model, x, y)
            gap = max(gap, approx.max_abs_diff(-exact))
            scale = max(scale, exact.max_abs())
    return gap / scale


def _nets(cfg: VerifyConfig):
    for i, seed in enumerate(cfg.seeds):
        dims = cfg.dims[i % len(cfg.dims)]
        yield seed, dims, random_net(seed, dims, cfg.scale)


def theorem1_suite(cfg: VerifyConfig, breaches: List[str]) -> List[Dict[str, object]]:
    """Probability gaps on L = 2**k plus one row at prob_L."""
    rows = []
    for seed, dims, mlp in _nets(cfg):
        gaps = []
        for k in cfg.prob_exponents:
            gap = max_prob_gap(mlp, 2 ** k)
            gaps.append(gap)
            rows.append(_row(seed, dims, 2 ** k, prob_gap=gap, check="theorem1"))
        for k, (previous, current) in zip(cfg.prob_exponents[1:], zip(gaps, gaps[1:])):
            if k - 1 < cfg.ratio_from:
                continue
            ratio = current / previous if previous > 0 else float("nan")
            low, high = cfg.ratio_band
            if not low <= ratio <= high:
                breaches.append(f"theorem1 seed={seed} L={2 ** k}: halving ratio {ratio:.3f}")
        gap = max_prob_gap(mlp, cfg.prob_L)
        rows.append(_row(seed, dims, cfg.prob_L, prob_gap=gap, check="theorem1"))
        if gap > cfg.prob_tol:
            breaches.append(f"theorem1 seed={seed} L={cfg.prob_L}: gap {gap:.3g} > {cfg.prob_tol:g}")
        logger.debug("theorem1 seed=%d dims=%s gap@%d=%.3g", seed, dims_label(dims), cfg.prob_L, gap)
    return rows


def theorem2_suite(cfg: VerifyConfig, breaches: List[str]) -> List[Dict[str, object]]:
    """Relative gradient gaps over grad_L; must not increase along the grid."""
    rows = []
    for seed, dims, mlp in _nets(cfg):
        previous = float("inf")
        for L in cfg.grad_L:
            gap = max_grad_gap(mlp, L)
            rows.append(_row(seed, dims, L, grad_gap=gap, check="theorem2"))
            if gap > previous:
                breaches.append(f"theorem2 seed={seed} L={L}: gap rose from {previous:.3g} to {gap:.3g}")
            previous = gap
        if previous > cfg.grad_tol:
            breaches.append(f"theorem2 seed={seed} L={cfg.grad_L[-1]}: gap {previous:.3g} > {cfg.grad_tol:g}")
    return rows


def oracle_suite(cfg: VerifyConfig, breaches: List[str]) -> List[Dict[str, object]]:
    """Explicit tree elimination against the symbolic recursion on small nets."""
    rows = []
    for seed in cfg.seeds:
        for dims in ORACLE_DIMS:
            mlp = random_net(seed, dims, cfg.scale)
            for L in cfg.oracle_L:
                tree = unroll(mlp, L)
                model = FiniteLModel(mlp, L)
                gap = 0.0
                for x in binary_inputs(dims[0]):
                    explicit = explicit_node_marginals(tree, mlp, x)
                    symbolic = finite_l_forward(model, x)
                    for layer, values in enumerate(symbolic, start=1):
                        for j, value in enumerate(values):
                            gap = max(gap, abs(explicit[mlp.node_id(layer, j)] - float(value)))
                rows.append(_row(seed, dims, L, prob_gap=gap, check="oracle"))
                if gap > cfg.oracle_tol:
                    breaches.append(f"oracle seed={seed} dims={dims_label(dims)} L={L}: gap {gap:.3g}")
    return rows


SUITES = {"theorem1": theorem1_suite, "theorem2": theorem2_suite, "oracle": oracle_suite}


def verify_all(cfg: VerifyConfig = VerifyConfig(),
               suites: Sequence[str] = ("oracle", "theorem1", "theorem2")) -> List[Dict[str, object]]:
    """
    Run the requested suites.

    Returns:
        All rows when every check passed

    Raises:
        ToleranceBreach: Listing every offending (seed, L), with all rows attached
    """
    rows: List[Dict[str, object]] = []
    breaches: List[str] = []
    for name in suites:
        if name not in SUITES:
            raise ValueError(f"unknown suite '{name}', choose from {sorted(SUITES)}")
        logger.info("running %s suite on %d seeds", name, len(cfg.seeds))
        rows.extend(SUITES[name](cfg, breaches))
    if breaches:
        raise ToleranceBreach(breaches, rows)
    return rows
