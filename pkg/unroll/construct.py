"""
Unrolling a layered network into a tree.

Step 1 copies every shared parent, together with its ancestors, once per
outgoing edge. Step 2 then replaces every parent of every vertex by L
copies carrying weight/L each, again copying whole ancestor subtrees.
"""

import logging
from typing import Dict, List

from models.errors import CapacityError
from models.mlp import Mlp
from models.unrolled_tree import UnrolledTree

logger = logging.getLogger(__name__)

VERTEX_CAP = 10 ** 6


def unroll_step1(mlp: Mlp, cap: int = VERTEX_CAP) -> UnrolledTree:
    """
    One tree per output node; shared parents are duplicated per child.

    Args:
        mlp: Source network
        cap: Largest number of vertices allowed

    Returns:
        Forest rooted at the output copies with original edge weights
    """
    size: Dict[int, int] = {}
    for node in range(mlp.num_nodes):
        size[node] = 1 + sum(size[p] for p, _ in mlp.parents(node))
    total = sum(size[node] for node in mlp.output_nodes())
    if total > cap:
        raise CapacityError(f"unrolling needs {total} vertices, cap is {cap}")

    tree = UnrolledTree.empty_for(mlp)

    def _grow(node: int, vertex: int, path: tuple):
        for branch, (parent, weight) in enumerate(mlp.parents(node)):
            parent_path = path + (branch,)
            copy = tree.add_vertex(parent, parent_path)
            tree.add_edge(copy, vertex, weight)
            _grow(parent, copy, parent_path)

    for output in mlp.output_nodes():
        root = tree.add_vertex(output, ())
        tree.outputs.append(root)
        _grow(output, root, ())
    logger.debug("step 1 produced %d vertices", len(tree.vertices))
    return tree


def unroll_step2(tree: UnrolledTree, L: int, cap: int = VERTEX_CAP) -> UnrolledTree:
    """
    Replicate every parent of every vertex L times with weight/L.

    Args:
        tree: Output of unroll_step1
        L: Copies per parent
        cap: Largest number of vertices allowed

    Returns:
        New forest; L=1 reproduces the input tree
    """
    if L < 1:
        raise ValueError(f"L must be at least 1, got {L}")

    size: Dict[int, int] = {}

    def _size(vertex: int) -> int:
        if vertex not in size:
            size[vertex] = 1 + L * sum(_size(tree.edges[e].parent) for e in tree.parent_edges(vertex))
        return size[vertex]

    total = sum(_size(root) for root in tree.outputs)
    if total > cap:
        raise CapacityError(f"L={L} needs {total} vertices, cap is {cap}")

    result = UnrolledTree([], [], [], dict(tree.biases), list(tree.input_origins))

    def _copy(source: int, target: int, path: tuple):
        for branch, edge_index in enumerate(tree.parent_edges(source)):
            edge = tree.edges[edge_index]
            origin = tree.vertices[edge.parent].origin
            for i in range(L):
                copy_path = path + (branch * L + i,)
                copy = result.add_vertex(origin, copy_path)
                result.add_edge(copy, target, edge.weight / L)
                _copy(edge.parent, copy, copy_path)

    for root in tree.outputs:
        new_root = result.add_vertex(tree.vertices[root].origin, ())
        result.outputs.append(new_root)
        _copy(root, new_root, ())
    logger.debug("step 2 with L=%d produced %d vertices", L, len(result.vertices))
    return result


def unroll(mlp: Mlp, L: int, cap: int = VERTEX_CAP) -> UnrolledTree:
    """Both steps in sequence."""
    return unroll_step2(unroll_step1(mlp, cap), L, cap)


def depth_counts(tree: UnrolledTree) -> List[int]:
    """Number of vertices at each distance from the roots."""
    counts: List[int] = []
    frontier = list(tree.outputs)
    while frontier:
        counts.append(len(frontier))
        frontier = [tree.edges[e].parent for vertex in frontier for e in tree.parent_edges(vertex)]
    return counts
