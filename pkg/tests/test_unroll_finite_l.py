import numpy as np
import pytest
from scipy.special import expit

from models.errors import StructureError
from models.mlp import Mlp, binary_inputs
from models.unrolled_tree import FiniteLModel
from network.propagation import backprop, forward
from unroll.construct import unroll
from unroll.finite_l import (
    all_node_marginals,
    copy_term,
    explicit_node_marginals,
    explicit_tree_marginal,
    finite_l_forward,
    finite_l_gradient,
    finite_l_loglik,
)
from unroll.verify import max_grad_gap


ONE = np.array([1.0])


class TestCopyTerm:

    def test_zero_weight_adds_nothing(self):
        np.testing.assert_array_equal(copy_term(np.array([-3.0, 0.0, 5.0]), 0.0), 0.0)

    def test_branches_agree_at_the_switch(self):
        p = np.linspace(-6, 6, 13)
        small = copy_term(p, 1.0)
        big = np.logaddexp(p + 1.0, 0.0) - np.logaddexp(p, 0.0)
        np.testing.assert_allclose(small, big, rtol=1e-12)

    def test_saturated_parents(self):
        assert copy_term(np.array([800.0]), 2.0)[0] == pytest.approx(2.0)
        assert copy_term(np.array([-800.0]), 2.0)[0] == pytest.approx(0.0, abs=1e-300)

    def test_tiny_weight_is_first_order(self):
        p, d = 0.4, 1e-9
        assert copy_term(np.array([p]), d)[0] == pytest.approx(expit(p) * d, rel=1e-8)


class TestFiniteLForward:

    def test_chain_single_copy(self, chain_net):
        hidden, output = finite_l_forward(FiniteLModel(chain_net, 1), ONE)
        assert hidden[0] == pytest.approx(0.7310586, abs=1e-7)
        assert output[0] == pytest.approx(0.6928838, abs=1e-7)

    def test_chain_matches_explicit_tree(self, chain_net):
        for L in (1, 2, 3):
            tree = unroll(chain_net, L)
            symbolic = finite_l_forward(FiniteLModel(chain_net, L), ONE)[-1][0]
            assert explicit_tree_marginal(tree, ONE, 2) == pytest.approx(symbolic, abs=1e-12)

    def test_chain_large_L_approaches_forward(self, chain_net):
        output = finite_l_forward(FiniteLModel(chain_net, 10 ** 6), ONE)[-1][0]
        assert output == pytest.approx(0.6750376, abs=2e-6)

    def test_limit_mode_is_forward(self, random_net):
        for x in binary_inputs(2):
            limit = finite_l_forward(FiniteLModel(random_net), x)
            for a, b in zip(limit, forward(random_net, x).activations):
                np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("L", [1, 5, 100])
    def test_zero_weights_give_one_half(self, L):
        for values in finite_l_forward(FiniteLModel(Mlp.zeros([2, 3, 1]), L), np.array([1.0, 0.0])):
            np.testing.assert_allclose(values, 0.5)

    def test_first_hidden_layer_is_exact_for_any_L(self, random_net):
        x = np.array([1.0, 1.0])
        exact = forward(random_net, x).activations[0]
        for L in (1, 7, 1000):
            np.testing.assert_allclose(finite_l_forward(FiniteLModel(random_net, L), x)[0], exact, rtol=1e-14)

    def test_gap_shrinks_with_L(self, chain_net):
        exact = forward(chain_net, ONE).output[0]
        gaps = [abs(finite_l_forward(FiniteLModel(chain_net, L), ONE)[-1][0] - exact) for L in (10, 100, 1000)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_node_keyed_marginals(self, chain_net):
        marginals = all_node_marginals(FiniteLModel(chain_net, 1), ONE)
        assert set(marginals) == {1, 2}
        assert marginals[1] == pytest.approx(0.7310586, abs=1e-7)

    def test_rejects_fractional_inputs(self, chain_net):
        with pytest.raises(StructureError):
            finite_l_forward(FiniteLModel(chain_net, 2), np.array([0.5]))

    def test_rejects_zero_copies(self, chain_net):
        with pytest.raises(StructureError):
            FiniteLModel(chain_net, 0)


class TestExplicitOracle:

    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("L", [1, 2, 3])
    def test_two_two_one(self, seed, L):
        mlp = Mlp.uniform([2, 2, 1], np.random.default_rng(seed), 3.0, 3.0)
        tree = unroll(mlp, L)
        model = FiniteLModel(mlp, L)
        for x in binary_inputs(2):
            explicit = explicit_node_marginals(tree, mlp, x)
            symbolic = all_node_marginals(model, x)
            for node, value in symbolic.items():
                assert explicit[node] == pytest.approx(value, abs=1e-10)

    def test_input_copy_returns_evidence(self, chain_net):
        assert explicit_tree_marginal(unroll(chain_net, 2), ONE, 0) == 1.0

    def test_unknown_node(self, chain_net):
        with pytest.raises(StructureError):
            explicit_tree_marginal(unroll(chain_net, 1), ONE, 9)


class TestLoglikAndGradient:

    def test_chain_loglik(self, chain_net):
        model = FiniteLModel(chain_net, 1)
        assert finite_l_loglik(model, ONE, 1) == pytest.approx(np.log(0.6928838), abs=1e-6)
        assert finite_l_loglik(model, ONE, 0) == pytest.approx(np.log(1 - 0.6928838), abs=1e-6)

    def test_limit_loglik_is_negative_cross_entropy(self, random_net):
        x = np.array([1.0, 0.0])
        p = forward(random_net, x).output[0]
        assert finite_l_loglik(FiniteLModel(random_net), x, 1) == pytest.approx(np.log(p))

    def test_limit_gradient_is_negative_backprop(self, random_net):
        x = np.array([0.0, 1.0])
        for y in (0, 1):
            approx = finite_l_gradient(FiniteLModel(random_net), x, y)
            exact = backprop(random_net, forward(random_net, x), y)
            assert approx.max_abs_diff(-exact) < 1e-8

    def test_gradient_gap_decreases(self, chain_net):
        gaps = [max_grad_gap(chain_net, L) for L in (10, 100, 1000, 10 ** 4)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-3
