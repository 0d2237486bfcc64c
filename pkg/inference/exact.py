"""
Exact inference on binary factor networks.

Three routes to the same numbers: brute-force enumeration (the oracle),
variable elimination with a min-degree order, and the generation-by-
generation recursion for pairwise forests used for the partition function.
"""

import logging
from collections import defaultdict
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from models.errors import CapacityError, EvidenceError, InferenceError, StructureError
from models.factor_net import Assignment, Factor, FactorNet, check_assignment

logger = logging.getLogger(__name__)

ENUMERATION_CAP = 20


def joint_unnormalized(net: FactorNet, assignment: Assignment) -> float:
    """
    Product of every factor entry selected by a complete assignment.

    For a Bayes net this is the joint probability itself.
    """
    values = check_assignment(net, assignment)
    result = 1.0
    for factor in net.factors:
        result *= factor.value(values)
    return result


def all_assignments(num_vars: int) -> np.ndarray:
    """All 2**num_vars assignments as rows; variable 0 is the most significant bit."""
    codes = np.arange(2 ** num_vars, dtype=np.int64)
    return ((codes[:, None] >> np.arange(num_vars - 1, -1, -1)) & 1).astype(np.int8)


def enumerate_joint(net: FactorNet, cap: int = ENUMERATION_CAP) -> Tuple[np.ndarray, np.ndarray]:
    """
    Unnormalized joint over every assignment.

    Returns:
        Tuple of (assignments of shape (2**n, n), values of shape (2**n,))
    """
    if net.num_vars > cap:
        raise CapacityError(f"{net.num_vars} variables exceed the enumeration cap of {cap}")
    assignments = all_assignments(net.num_vars)
    values = np.ones(assignments.shape[0])
    for factor in net.factors:
        index = tuple(assignments[:, v] for v in factor.scope)
        values *= factor.table[index]
    return assignments, values


def enumerate_marginal(net: FactorNet, query: int, evidence: Optional[Mapping[int, int]] = None,
                       cap: int = ENUMERATION_CAP) -> Tuple[float, float]:
    """(P(q=0 | e), P(q=1 | e)) by summing the enumerated joint."""
    evidence = _check_query(net, query, evidence)
    assignments, values = enumerate_joint(net, cap)
    mask = np.ones(values.shape[0], dtype=bool)
    for var, value in evidence.items():
        mask &= assignments[:, var] == value
    on = float(values[mask & (assignments[:, query] == 1)].sum())
    off = float(values[mask & (assignments[:, query] == 0)].sum())
    return _normalize_pair(off, on)


def partition_function(net: FactorNet, method: str = "auto", cap: int = ENUMERATION_CAP) -> float:
    """
    Sum of the unnormalized joint over all assignments.

    Args:
        net: Network to normalize
        method: 'tree' (pairwise forests only), 'enumerate', or 'auto'
            which prefers the tree recursion when it applies
        cap: Largest variable count enumeration will accept

    Returns:
        Z (exactly 1 for a Bayes net up to rounding)
    """
    forest = net.is_pairwise_forest()
    if method == "tree" or (method == "auto" and forest):
        if not forest:
            raise StructureError("tree recursion needs unary/pairwise factors forming a forest")
        return float(np.exp(_forest_log_partition(net)))
    if method not in ("auto", "enumerate"):
        raise ValueError(f"unknown partition method '{method}'")
    if net.num_vars > cap:
        raise CapacityError(
            f"{net.num_vars} variables exceed the enumeration cap of {cap} "
            f"and the net is not a pairwise forest"
        )
    return float(enumerate_joint(net, cap)[1].sum())


def _forest_log_partition(net: FactorNet) -> float:
    """
    log Z of a pairwise forest, one generation at a time.

    Each component is rooted at its lowest variable id; generations are
    the breadth-first layers below the root. Variables of the deepest
    generation are summed out first and each passes a two-entry message
    to its parent, so every step only touches the factors between one
    generation and the next.
    """
    unary: Dict[int, np.ndarray] = {v: np.ones(2) for v in range(net.num_vars)}
    pair: Dict[Tuple[int, int], np.ndarray] = {}
    adjacency: Dict[int, Set[int]] = defaultdict(set)
    for factor in net.factors:
        if len(factor.scope) == 1:
            unary[factor.scope[0]] = unary[factor.scope[0]] * factor.table
            continue
        a, b = factor.scope
        table = factor.table if a < b else factor.table.T
        key = (min(a, b), max(a, b))
        pair[key] = pair[key] * table if key in pair else np.array(table)
        adjacency[a].add(b)
        adjacency[b].add(a)

    log_z = 0.0
    seen: Set[int] = set()
    for root in range(net.num_vars):
        if root in seen:
            continue
        generations: List[List[int]] = [[root]]
        parent = {root: -1}
        seen.add(root)
        while True:
            frontier = []
            for v in generations[-1]:
                for u in sorted(adjacency[v]):
                    if u not in seen:
                        seen.add(u)
                        parent[u] = v
                        frontier.append(u)
            if not frontier:
                break
            generations.append(frontier)

        belief = {v: unary[v].copy() for generation in generations for v in generation}
        for generation in reversed(generations[1:]):
            for v in generation:
                p = parent[v]
                table = pair[(min(p, v), max(p, v))]
                oriented = table if p < v else table.T  # rows index the parent
                message = oriented @ belief[v]
                scale = message.max()
                if scale <= 0:
                    return float("-inf")
                log_z += np.log(scale)
                belief[p] = belief[p] * (message / scale)
        total = belief[root].sum()
        if total <= 0:
            return float("-inf")
        log_z += np.log(total)
    return float(log_z)


def min_degree_order(factors: Sequence[Factor], eliminate: Sequence[int]) -> List[int]:
    """
    Greedy elimination order: repeatedly pick the variable with the fewest
    neighbours in the current interaction graph, lowest id on ties, then
    connect its neighbours.
    """
    graph: Dict[int, Set[int]] = {v: set() for v in eliminate}
    for factor in factors:
        for v in factor.scope:
            if v in graph:
                graph[v].update(u for u in factor.scope if u != v)
    remaining = set(eliminate)
    order: List[int] = []
    full: Dict[int, Set[int]] = defaultdict(set)
    for v, nbrs in graph.items():
        full[v] |= nbrs
        for u in nbrs:
            full[u].add(v)
    while remaining:
        var = min(remaining, key=lambda v: (len(full[v]), v))
        nbrs = full.pop(var)
        for u in nbrs:
            full[u].discard(var)
            full[u] |= nbrs - {u}
        remaining.remove(var)
        order.append(var)
    return order


def ve_marginal(net: FactorNet, query: int,
                evidence: Optional[Mapping[int, int]] = None) -> Tuple[float, float]:
    """
    Exact (P(q=0 | e), P(q=1 | e)) by variable elimination.

    Args:
        net: Network to query
        query: Variable whose distribution is returned
        evidence: Observed variables and their values

    Returns:
        Normalized pair summing to 1

    Raises:
        EvidenceError: If the query variable is itself observed
        InferenceError: If the evidence has probability zero
    """
    evidence = _check_query(net, query, evidence)

    factors: List[Factor] = []
    for factor in net.factors:
        reduced = factor.reduce(evidence)
        if isinstance(reduced, Factor):
            factors.append(reduced)
        elif reduced <= 0:
            raise InferenceError(f"evidence {dict(evidence)} has probability zero")

    hidden = sorted({v for f in factors for v in f.scope} - {query})
    order = min_degree_order(factors, hidden)
    logger.debug("eliminating %s for query %d", order, query)

    for var in order:
        touching = [f for f in factors if var in f.scope]
        factors = [f for f in factors if var not in f.scope]
        product = touching[0]
        for f in touching[1:]:
            product = product.multiply(f)
        summed = product.sum_out(var)
        if isinstance(summed, Factor):
            scale = float(summed.table.max())
            if scale <= 0:
                raise InferenceError(f"evidence {dict(evidence)} has probability zero")
            factors.append(summed.scaled(scale))
        elif summed <= 0:
            raise InferenceError(f"evidence {dict(evidence)} has probability zero")

    belief = np.ones(2)
    for factor in factors:
        belief = belief * factor.table
    return _normalize_pair(float(belief[0]), float(belief[1]), evidence)


def _check_query(net: FactorNet, query: int,
                 evidence: Optional[Mapping[int, int]]) -> Dict[int, int]:
    evidence = {int(k): int(v) for k, v in (evidence or {}).items()}
    if not 0 <= query < net.num_vars:
        raise StructureError(f"query {query} outside 0..{net.num_vars - 1}")
    if query in evidence:
        raise EvidenceError(f"query variable {query} is also observed")
    for var, value in evidence.items():
        if not 0 <= var < net.num_vars:
            raise StructureError(f"evidence variable {var} outside 0..{net.num_vars - 1}")
        if value not in (0, 1):
            raise StructureError(f"evidence value for {var} must be binary, got {value}")
    return evidence


def _normalize_pair(off: float, on: float,
                    evidence: Optional[Mapping[int, int]] = None) -> Tuple[float, float]:
    total = off + on
    if not total > 0 or not np.isfinite(total):
        raise InferenceError(f"evidence {dict(evidence or {})} has probability zero")
    return off / total, on / total
