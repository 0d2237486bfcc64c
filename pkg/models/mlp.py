"""
Layered sigmoid network, its forward trace and its gradient.

The same object is read two ways: as a feed-forward network, and as a
sigmoid Bayesian network whose node (layer, j) has the nodes of the
previous layer as parents. Node ids are dense: inputs first, then each
layer in order.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from models.errors import StructureError


class OutputKind(Enum):
    """Output distribution of the last layer."""
    BERNOULLI = "bernoulli"
    CATEGORICAL = "categorical"


class Mlp:
    """
    Feed-forward network with sigmoid hidden units.

    Layer i maps n_i units to n_{i+1} units with weights[i] of shape
    (n_{i+1}, n_i) and biases[i] of shape (n_{i+1},).
    """

    def __init__(
        self,
        layer_dims: Sequence[int],
        weights: Sequence[np.ndarray],
        biases: Sequence[np.ndarray],
        output_kind: OutputKind = OutputKind.BERNOULLI
    ):
        """
        Args:
            layer_dims: Sizes [n_0, ..., n_{K+1}], input first
            weights: One (n_{i+1}, n_i) matrix per layer
            biases: One (n_{i+1},) vector per layer
            output_kind: Bernoulli (sigmoid) or categorical (softmax) output
        """
        self.layer_dims: Tuple[int, ...] = tuple(int(n) for n in layer_dims)
        self.weights: List[np.ndarray] = [np.array(w, dtype=float) for w in weights]
        self.biases: List[np.ndarray] = [np.array(b, dtype=float).reshape(-1) for b in biases]
        self.output_kind = OutputKind(output_kind)
        self._validate()

    def _validate(self):
        dims = self.layer_dims
        if len(dims) < 2:
            raise StructureError(f"an Mlp needs at least two layers, got dims {dims}")
        if any(n < 1 for n in dims):
            raise StructureError(f"layer sizes must be positive, got {dims}")
        if len(self.weights) != len(dims) - 1 or len(self.biases) != len(dims) - 1:
            raise StructureError(
                f"dims {dims} need {len(dims) - 1} weight and bias blocks, got "
                f"{len(self.weights)} and {len(self.biases)}"
            )
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[i + 1], dims[i]):
                raise StructureError(
                    f"weights[{i}] has shape {w.shape}, expected {(dims[i + 1], dims[i])}"
                )
            if b.shape != (dims[i + 1],):
                raise StructureError(f"biases[{i}] has shape {b.shape}, expected {(dims[i + 1],)}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise StructureError(f"layer {i} has non-finite parameters")
        if self.output_kind is OutputKind.CATEGORICAL and dims[-1] < 2:
            raise StructureError("a categorical output needs at least two units")

    @classmethod
    def zeros(cls, layer_dims: Sequence[int],
              output_kind: OutputKind = OutputKind.BERNOULLI) -> "Mlp":
        """All-zero weights and biases."""
        dims = list(layer_dims)
        return cls(
            dims,
            [np.zeros((dims[i + 1], dims[i])) for i in range(len(dims) - 1)],
            [np.zeros(dims[i + 1]) for i in range(len(dims) - 1)],
            output_kind
        )

    @classmethod
    def initialize(cls, layer_dims: Sequence[int], rng: np.random.Generator,
                   scale: float = 0.1,
                   output_kind: OutputKind = OutputKind.BERNOULLI) -> "Mlp":
        """Standard normal weights times `scale`, zero biases."""
        dims = list(layer_dims)
        weights = [scale * rng.standard_normal((dims[i + 1], dims[i])) for i in range(len(dims) - 1)]
        biases = [np.zeros(dims[i + 1]) for i in range(len(dims) - 1)]
        return cls(dims, weights, biases, output_kind)

    @classmethod
    def uniform(cls, layer_dims: Sequence[int], rng: np.random.Generator,
                weight_scale: float, bias_scale: float = 0.0) -> "Mlp":
        """Weights ~ U(-weight_scale, weight_scale), biases ~ U(-bias_scale, bias_scale)."""
        dims = list(layer_dims)
        weights = [rng.uniform(-weight_scale, weight_scale, (dims[i + 1], dims[i]))
                   for i in range(len(dims) - 1)]
        biases = [rng.uniform(-bias_scale, bias_scale, dims[i + 1]) if bias_scale > 0
                  else np.zeros(dims[i + 1]) for i in range(len(dims) - 1)]
        return cls(dims, weights, biases)

    @property
    def num_layers(self) -> int:
        """Number of weight layers (K + 1)."""
        return len(self.weights)

    @property
    def hidden_dims(self) -> Tuple[int, ...]:
        return self.layer_dims[1:-1]

    @property
    def num_nodes(self) -> int:
        return sum(self.layer_dims)

    def node_id(self, layer: int, index: int) -> int:
        """Dense id of unit `index` in `layer` (layer 0 = inputs)."""
        if not 0 <= layer < len(self.layer_dims) or not 0 <= index < self.layer_dims[layer]:
            raise StructureError(f"no unit {index} in layer {layer} of dims {self.layer_dims}")
        return sum(self.layer_dims[:layer]) + index

    def node_position(self, node: int) -> Tuple[int, int]:
        """Inverse of node_id."""
        offset = 0
        for layer, n in enumerate(self.layer_dims):
            if node < offset + n:
                return layer, node - offset
            offset += n
        raise StructureError(f"node {node} outside 0..{self.num_nodes - 1}")

    def parents(self, node: int) -> List[Tuple[int, float]]:
        """(parent node id, edge weight) pairs feeding `node`."""
        layer, index = self.node_position(node)
        if layer == 0:
            return []
        w = self.weights[layer - 1]
        return [(self.node_id(layer - 1, j), float(w[index, j])) for j in range(w.shape[1])]

    def bias(self, node: int) -> float:
        layer, index = self.node_position(node)
        return 0.0 if layer == 0 else float(self.biases[layer - 1][index])

    def edges(self) -> Iterator[Tuple[int, int, float]]:
        """(parent, child, weight) for every edge, layer by layer."""
        for layer, w in enumerate(self.weights):
            for i in range(w.shape[0]):
                for j in range(w.shape[1]):
                    yield self.node_id(layer, j), self.node_id(layer + 1, i), float(w[i, j])

    def output_nodes(self) -> List[int]:
        last = len(self.layer_dims) - 1
        return [self.node_id(last, i) for i in range(self.layer_dims[-1])]

    def input_nodes(self) -> List[int]:
        return list(range(self.layer_dims[0]))

    def parameters(self) -> np.ndarray:
        """All parameters flattened: per layer, weights row-major then biases."""
        return np.concatenate([np.concatenate([w.reshape(-1), b]) for w, b in zip(self.weights, self.biases)])

    def with_parameters(self, flat: np.ndarray) -> "Mlp":
        """Copy with parameters taken from a flat vector (layout of `parameters`)."""
        blocks = Gradient.from_flat(self, flat)
        return Mlp(self.layer_dims, blocks.d_weights, blocks.d_biases, self.output_kind)

    def copy(self) -> "Mlp":
        return Mlp(self.layer_dims, [w.copy() for w in self.weights],
                   [b.copy() for b in self.biases], self.output_kind)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mlp):
            return NotImplemented
        return (self.layer_dims == other.layer_dims
                and self.output_kind is other.output_kind
                and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
                and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases)))

    def __repr__(self) -> str:
        dims = "-".join(str(n) for n in self.layer_dims)
        return f"Mlp(dims={dims}, output={self.output_kind.value})"


@dataclass
class ForwardTrace:
    """
    Per-layer values of one forward pass.

    pre_activations[i] and activations[i] belong to layer i + 1;
    activations[i] = sigmoid(pre_activations[i]) except for a
    categorical output layer, which holds the softmax.
    """

    inputs: np.ndarray
    pre_activations: List[np.ndarray]
    activations: List[np.ndarray]
    output_kind: OutputKind = OutputKind.BERNOULLI

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]

    def layer_input(self, layer: int) -> np.ndarray:
        """Activation vector feeding weight layer `layer`."""
        return self.inputs if layer == 0 else self.activations[layer - 1]


@dataclass
class Gradient:
    """Derivatives with the same block shapes as an Mlp."""

    d_weights: List[np.ndarray]
    d_biases: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros_like(cls, mlp: Mlp) -> "Gradient":
        return cls([np.zeros_like(w) for w in mlp.weights], [np.zeros_like(b) for b in mlp.biases])

    @classmethod
    def from_flat(cls, mlp: Mlp, flat: np.ndarray) -> "Gradient":
        d_weights, d_biases, offset = [], [], 0
        for w, b in zip(mlp.weights, mlp.biases):
            d_weights.append(np.asarray(flat[offset:offset + w.size], dtype=float).reshape(w.shape))
            offset += w.size
            d_biases.append(np.asarray(flat[offset:offset + b.size], dtype=float).copy())
            offset += b.size
        return cls(d_weights, d_biases)

    def flat(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.reshape(-1), b]) for w, b in zip(self.d_weights, self.d_biases)])

    def matches(self, mlp: Mlp) -> bool:
        """True when every block has the shape of the corresponding Mlp block."""
        return (len(self.d_weights) == mlp.num_layers
                and all(g.shape == w.shape for g, w in zip(self.d_weights, mlp.weights))
                and all(g.shape == b.shape for g, b in zip(self.d_biases, mlp.biases)))

    def __add__(self, other: "Gradient") -> "Gradient":
        return Gradient([a + b for a, b in zip(self.d_weights, other.d_weights)],
                        [a + b for a, b in zip(self.d_biases, other.d_biases)])

    def __neg__(self) -> "Gradient":
        return self.scale(-1.0)

    def scale(self, factor: float) -> "Gradient":
        return Gradient([factor * g for g in self.d_weights], [factor * g for g in self.d_biases])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.flat())))

    def max_abs_diff(self, other: "Gradient") -> float:
        return float(np.max(np.abs(self.flat() - other.flat())))


def binary_inputs(n: int) -> np.ndarray:
    """All 2**n binary vectors as rows, first input most significant."""
    codes = np.arange(2 ** n)
    return ((codes[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(float)


def check_input(mlp: Mlp, x: np.ndarray, allow_batch: bool = False) -> np.ndarray:
    """Validate an input vector (or batch) against the first layer."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (mlp.layer_dims[0],) or (x.ndim != 1 and not (allow_batch and x.ndim == 2)):
        raise StructureError(f"input of shape {x.shape} does not fit {mlp.layer_dims[0]} input units")
    if np.any(x < 0) or np.any(x > 1):
        raise StructureError("inputs must lie in [0, 1]")
    return x


def label_index(mlp: Mlp, y: int) -> int:
    """Validate a label against the output layer."""
    y = int(y)
    arity = 2 if mlp.output_kind is OutputKind.BERNOULLI else mlp.layer_dims[-1]
    if not 0 <= y < arity:
        raise StructureError(f"label {y} outside 0..{arity - 1}")
    return y


def optional_label(mlp: Mlp, y: Optional[int]) -> Optional[int]:
    return None if y is None else label_index(mlp, y)
