"""
Explicit tree produced by unrolling a layered network.

Every vertex is a copy of a node of the source network. A copy is named
by its origin plus the branch indices taken from its output root, so two
copies can never collide.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from models.errors import StructureError
from models.mlp import Mlp

CopyId = Tuple[int, Tuple[int, ...]]


@dataclass(frozen=True)
class Vertex:
    copy_id: CopyId

    @property
    def origin(self) -> int:
        return self.copy_id[0]

    @property
    def path(self) -> Tuple[int, ...]:
        return self.copy_id[1]


@dataclass(frozen=True)
class TreeEdge:
    parent: int
    child: int
    weight: float


@dataclass
class UnrolledTree:
    """
    Forest of copies; edges point from a parent copy to the child copy it feeds.

    Attributes:
        vertices: All copies, indexed by position
        edges: Directed parent -> child edges carrying (scaled) weights
        outputs: Vertex indices of the output roots, one per output node
        biases: Bias of every origin node (0 for inputs)
        input_origins: Origin ids of the network inputs, in input order
    """

    vertices: List[Vertex]
    edges: List[TreeEdge]
    outputs: List[int]
    biases: Dict[int, float]
    input_origins: List[int]
    _parents: Optional[Dict[int, List[int]]] = field(default=None, repr=False, compare=False)

    @classmethod
    def empty_for(cls, mlp: Mlp) -> "UnrolledTree":
        biases = {node: mlp.bias(node) for node in range(mlp.num_nodes)}
        return cls([], [], [], biases, mlp.input_nodes())

    def add_vertex(self, origin: int, path: Tuple[int, ...]) -> int:
        self.vertices.append(Vertex((origin, path)))
        self._parents = None
        return len(self.vertices) - 1

    def add_edge(self, parent: int, child: int, weight: float):
        self.edges.append(TreeEdge(parent, child, weight))
        self._parents = None

    def parent_edges(self, vertex: int) -> List[int]:
        """Indices of the edges entering `vertex`."""
        if self._parents is None:
            table: Dict[int, List[int]] = {v: [] for v in range(len(self.vertices))}
            for index, edge in enumerate(self.edges):
                table[edge.child].append(index)
            self._parents = table
        return self._parents[vertex]

    def copies_of(self, origin: int) -> List[int]:
        return [i for i, v in enumerate(self.vertices) if v.origin == origin]

    def is_input(self, vertex: int) -> bool:
        return self.vertices[vertex].origin in self.input_origins

    def num_components(self) -> int:
        """Connected components of the undirected structure."""
        root = list(range(len(self.vertices)))

        def find(v: int) -> int:
            while root[v] != v:
                root[v] = root[root[v]]
                v = root[v]
            return v

        for edge in self.edges:
            a, b = find(edge.parent), find(edge.child)
            if a != b:
                root[a] = b
        return len({find(v) for v in range(len(self.vertices))})

    def is_forest(self) -> bool:
        """Edge count identity |E| = |V| - #components."""
        return len(self.edges) == len(self.vertices) - self.num_components()

    def observe(self, x: np.ndarray) -> Dict[int, int]:
        """Evidence on every input copy from an input vector."""
        x = np.asarray(x)
        if x.shape != (len(self.input_origins),):
            raise StructureError(
                f"input of shape {x.shape} does not fit {len(self.input_origins)} inputs"
            )
        position = {origin: i for i, origin in enumerate(self.input_origins)}
        return {i: int(x[position[v.origin]]) for i, v in enumerate(self.vertices)
                if v.origin in position}

    def weight_sums(self) -> Dict[Tuple[int, int], float]:
        """Incoming weight per (parent origin, child copy), summed over the parent's copies."""
        sums: Dict[Tuple[int, int], float] = {}
        for edge in self.edges:
            key = (self.vertices[edge.parent].origin, edge.child)
            sums[key] = sums.get(key, 0.0) + edge.weight
        return sums

    def __repr__(self) -> str:
        return (f"UnrolledTree(vertices={len(self.vertices)}, edges={len(self.edges)}, "
                f"outputs={len(self.outputs)})")


@dataclass(frozen=True)
class FiniteLModel:
    """
    A network read as the tree model with L copies per parent.

    L=None stands for the infinite-copy limit, where the model coincides
    with the ordinary forward pass.
    """

    mlp: Mlp
    L: Optional[int] = None

    def __post_init__(self):
        if self.L is not None and int(self.L) < 1:
            raise StructureError(f"L must be at least 1, got {self.L}")

    @property
    def is_limit(self) -> bool:
        return self.L is None
