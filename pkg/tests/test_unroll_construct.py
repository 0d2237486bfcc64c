import numpy as np
import pytest

from models.errors import CapacityError
from models.mlp import Mlp
from unroll.construct import depth_counts, unroll, unroll_step1, unroll_step2


class TestStep1:

    def test_two_two_one(self):
        tree = unroll_step1(Mlp.uniform([2, 2, 1], np.random.default_rng(0), 1.0))
        assert len(tree.vertices) == 7
        assert len(tree.edges) == 6
        assert tree.is_forest()

    def test_chain_is_unchanged(self, chain_net):
        tree = unroll_step1(chain_net)
        assert len(tree.vertices) == 3
        assert [v.origin for v in tree.vertices] == [2, 1, 0]

    def test_shared_parent_gets_one_copy_per_child(self):
        mlp = Mlp.zeros([1, 2, 1])
        tree = unroll_step1(mlp)
        assert len(tree.copies_of(0)) == 2
        assert len(set(v.copy_id for v in tree.vertices)) == len(tree.vertices)

    def test_one_root_per_output(self):
        tree = unroll_step1(Mlp.zeros([2, 2, 3]))
        assert len(tree.outputs) == 3
        assert tree.num_components() == 3

    def test_capacity(self):
        with pytest.raises(CapacityError):
            unroll_step1(Mlp.zeros([2, 2, 1]), cap=6)


class TestStep2:

    def test_chain_with_two_copies(self, chain_net):
        tree = unroll(chain_net, 2)
        assert len(tree.vertices) == 7
        assert depth_counts(tree) == [1, 2, 4]
        assert all(edge.weight == pytest.approx(0.5) for edge in tree.edges)

    def test_single_copy_is_identity(self, random_net):
        step1 = unroll_step1(random_net)
        step2 = unroll_step2(step1, 1)
        assert step2.vertices == step1.vertices
        assert step2.edges == step1.edges

    @pytest.mark.parametrize("L", [1, 2, 3])
    def test_weight_sums_match_network(self, L):
        mlp = Mlp.uniform([2, 2, 1], np.random.default_rng(L), 3.0)
        tree = unroll(mlp, L)
        for (parent_origin, child), total in tree.weight_sums().items():
            child_origin = tree.vertices[child].origin
            expected = dict(mlp.parents(child_origin))[parent_origin]
            assert total == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("L", [2, 3])
    def test_stays_a_forest(self, random_net, L):
        tree = unroll(random_net, L)
        assert tree.is_forest()
        assert tree.num_components() == 1

    def test_biases_carried_over(self, random_net):
        tree = unroll(random_net, 2)
        for node in range(random_net.num_nodes):
            assert tree.biases[node] == random_net.bias(node)

    def test_capacity(self, chain_net):
        with pytest.raises(CapacityError):
            unroll(chain_net, 10, cap=100)

    def test_rejects_zero_copies(self, chain_net):
        with pytest.raises(ValueError):
            unroll_step2(unroll_step1(chain_net), 0)
