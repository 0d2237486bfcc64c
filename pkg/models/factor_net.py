"""
Discrete graphical models over binary variables.

A Factor stores its table as a numpy array of shape (2,) * len(scope);
flattening it in C order gives the "scope order, last variable fastest"
layout used by the text format. Index 0 along an axis means the variable
is false, index 1 means true.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Mapping, Sequence, Set, Tuple, Union

import numpy as np

from models.errors import StructureError


class NetKind(Enum):
    """Whether factors are locally normalized CPDs or free potentials."""
    BAYES = "bayes"
    MARKOV = "markov"


Assignment = Sequence[int]
Evidence = Mapping[int, int]


class Factor:
    """
    A nonnegative table over an ordered scope of binary variables.

    Factors are immutable; every operation returns a new factor.
    """

    __slots__ = ("scope", "table")

    def __init__(self, scope: Sequence[int], table: Union[Sequence[float], np.ndarray]):
        """
        Args:
            scope: Ordered variable ids
            table: 2**len(scope) entries, flat (last variable fastest)
                or already shaped (2,) * len(scope)
        """
        scope = tuple(int(v) for v in scope)
        if not scope:
            raise StructureError("factor scope must contain at least one variable")
        if len(set(scope)) != len(scope):
            raise StructureError(f"factor scope repeats a variable: {scope}")
        if min(scope) < 0:
            raise StructureError(f"negative variable id in scope {scope}")

        values = np.array(table, dtype=float)
        if values.size != 2 ** len(scope):
            raise StructureError(
                f"factor over {len(scope)} variables needs {2 ** len(scope)} "
                f"entries, got {values.size}"
            )
        values = values.reshape((2,) * len(scope))
        if not np.all(np.isfinite(values)):
            raise StructureError(f"factor over {scope} has non-finite entries")
        if np.any(values < 0):
            raise StructureError(f"factor over {scope} has negative entries")
        values.setflags(write=False)

        self.scope: Tuple[int, ...] = scope
        self.table: np.ndarray = values

    def value(self, assignment: Assignment) -> float:
        """Table entry selected by a full assignment of the network."""
        return float(self.table[tuple(int(assignment[v]) for v in self.scope)])

    def flat(self) -> np.ndarray:
        """Entries in file order (scope order, last variable fastest)."""
        return self.table.reshape(-1)

    def _aligned(self, scope: Tuple[int, ...]) -> np.ndarray:
        """View of the table broadcastable against `scope` (a superset)."""
        present = [v for v in scope if v in self.scope]
        perm = [self.scope.index(v) for v in present]
        shape = [2 if v in self.scope else 1 for v in scope]
        return np.transpose(self.table, perm).reshape(shape)

    def multiply(self, other: "Factor") -> "Factor":
        """Pointwise product over the union of both scopes."""
        scope = self.scope + tuple(v for v in other.scope if v not in self.scope)
        return Factor(scope, self._aligned(scope) * other._aligned(scope))

    def sum_out(self, var: int) -> Union["Factor", float]:
        """Marginalize `var`; returns a float when the scope becomes empty."""
        axis = self.scope.index(var)
        summed = self.table.sum(axis=axis)
        rest = self.scope[:axis] + self.scope[axis + 1:]
        if not rest:
            return float(summed)
        return Factor(rest, summed)

    def reduce(self, evidence: Evidence) -> Union["Factor", float]:
        """Condition on observed variables; float when nothing is left."""
        index = tuple(int(evidence[v]) if v in evidence else slice(None) for v in self.scope)
        rest = tuple(v for v in self.scope if v not in evidence)
        reduced = self.table[index]
        if not rest:
            return float(reduced)
        return Factor(rest, reduced)

    def scaled(self, divisor: float) -> "Factor":
        """Same factor divided by a positive constant."""
        return Factor(self.scope, self.table / divisor)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Factor):
            return NotImplemented
        return self.scope == other.scope and np.array_equal(self.table, other.table)

    def __repr__(self) -> str:
        return f"Factor(scope={self.scope}, table={self.flat().tolist()})"


@dataclass(frozen=True)
class FactorNet:
    """
    A set of factors over binary variables 0..num_vars-1.

    For kind=BAYES the last variable of each factor's scope is the child
    and the leading variables are its parents; every variable owns exactly
    one such factor and each table sums to 1 over the child axis.
    """

    num_vars: int
    factors: Tuple[Factor, ...] = field(default_factory=tuple)
    kind: NetKind = NetKind.MARKOV

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.num_vars < 0:
            raise StructureError(f"num_vars must be non-negative, got {self.num_vars}")
        for factor in self.factors:
            out_of_range = [v for v in factor.scope if v >= self.num_vars]
            if out_of_range:
                raise StructureError(
                    f"factor over {factor.scope} references variables "
                    f"{out_of_range} outside 0..{self.num_vars - 1}"
                )
        if self.kind is NetKind.BAYES:
            self._check_cpds()

    def _check_cpds(self):
        children = [factor.scope[-1] for factor in self.factors]
        if sorted(children) != list(range(self.num_vars)):
            raise StructureError("a Bayes net needs exactly one CPD factor per variable")
        for factor in self.factors:
            sums = factor.table.sum(axis=-1)
            if not np.allclose(sums, 1.0, atol=1e-9):
                raise StructureError(
                    f"CPD for variable {factor.scope[-1]} does not sum to 1 over the child"
                )

    def with_factor(self, factor: Factor) -> "FactorNet":
        """Copy of the net with one more factor (always a Markov net)."""
        return FactorNet(self.num_vars, self.factors + (factor,), NetKind.MARKOV)

    def cpd(self, var: int) -> Factor:
        """CPD factor of `var` in a Bayes net."""
        for factor in self.factors:
            if factor.scope[-1] == var:
                return factor
        raise StructureError(f"no CPD for variable {var}")

    def parents(self, var: int) -> Tuple[int, ...]:
        """Parents of `var` in a Bayes net (CPD scope minus the child)."""
        return self.cpd(var).scope[:-1]

    def neighbors(self) -> Dict[int, Set[int]]:
        """Interaction graph: variables sharing at least one factor."""
        graph: Dict[int, Set[int]] = {v: set() for v in range(self.num_vars)}
        for factor in self.factors:
            for v in factor.scope:
                graph[v].update(u for u in factor.scope if u != v)
        return graph

    def is_pairwise_forest(self) -> bool:
        """True when all factors are unary/pairwise and the pairs form a forest."""
        if any(len(f.scope) > 2 for f in self.factors):
            return False
        edges = {tuple(sorted(f.scope)) for f in self.factors if len(f.scope) == 2}
        root = list(range(self.num_vars))

        def find(v: int) -> int:
            while root[v] != v:
                root[v] = root[root[v]]
                v = root[v]
            return v

        for a, b in edges:
            ra, rb = find(a), find(b)
            if ra == rb:
                return False
            root[ra] = rb
        return True

    def __repr__(self) -> str:
        return (f"FactorNet(kind={self.kind.value}, num_vars={self.num_vars}, "
                f"factors={len(self.factors)})")


def edge_potential(a: int, b: int, weight: float) -> Factor:
    """Pairwise potential e^weight when both ends are true, 1 otherwise."""
    return Factor((a, b), [1.0, 1.0, 1.0, float(np.exp(weight))])


def unary_potential(var: int, log_odds: float) -> Factor:
    """Unary potential e^log_odds when true, 1 when false."""
    return Factor((var,), [1.0, float(np.exp(log_odds))])


def check_assignment(net: FactorNet, assignment: Iterable[int]) -> Tuple[int, ...]:
    """Validate a complete assignment against the net and return it as a tuple."""
    values = tuple(int(v) for v in assignment)
    if len(values) != net.num_vars:
        raise StructureError(
            f"assignment has {len(values)} values, net has {net.num_vars} variables"
        )
    if any(v not in (0, 1) for v in values):
        raise StructureError(f"assignment must be binary, got {values}")
    return values
