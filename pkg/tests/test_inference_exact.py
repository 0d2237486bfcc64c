import numpy as np
import pytest
from scipy.special import expit

from inference.conversion import bn_to_mn, mlp_to_bayes_net
from inference.exact import (
    all_assignments,
    enumerate_joint,
    enumerate_marginal,
    joint_unnormalized,
    min_degree_order,
    partition_function,
    ve_marginal,
)
from models.errors import CapacityError, EvidenceError, InferenceError, StructureError
from models.factor_net import Factor, FactorNet, NetKind, edge_potential, unary_potential
from models.mlp import Mlp


def _single_edge(w: float) -> FactorNet:
    return FactorNet(2, [edge_potential(0, 1, w)])


class TestFactor:

    def test_layout_last_variable_fastest(self):
        f = Factor((3, 5), [1.0, 2.0, 3.0, 4.0])
        assert f.value({3: 0, 5: 1}) == 2.0
        assert f.value({3: 1, 5: 0}) == 3.0
        np.testing.assert_array_equal(f.flat(), [1.0, 2.0, 3.0, 4.0])

    def test_multiply_aligns_scopes(self):
        a = Factor((0, 1), [1.0, 2.0, 3.0, 4.0])
        b = Factor((1,), [10.0, 100.0])
        product = a.multiply(b)
        assert product.scope == (0, 1)
        np.testing.assert_allclose(product.flat(), [10.0, 200.0, 30.0, 400.0])

    def test_sum_out_to_scalar(self):
        f = Factor((2,), [0.25, 0.75])
        assert f.sum_out(2) == pytest.approx(1.0)

    @pytest.mark.parametrize("scope, table", [
        ((0, 0), [1.0, 1.0, 1.0, 1.0]),
        ((0,), [1.0, 1.0, 1.0]),
        ((0,), [1.0, -1.0]),
        ((), []),
    ])
    def test_rejects_bad_tables(self, scope, table):
        with pytest.raises(StructureError):
            Factor(scope, table)

    def test_scope_outside_net(self):
        with pytest.raises(StructureError):
            FactorNet(2, [Factor((0, 2), [1.0] * 4)])


class TestJointUnnormalized:

    def test_single_edge_both_true(self):
        assert joint_unnormalized(_single_edge(0.7), [1, 1]) == pytest.approx(2.0137527, abs=1e-7)

    def test_single_edge_both_false(self):
        assert joint_unnormalized(_single_edge(0.7), [0, 0]) == 1.0

    def test_no_factors(self):
        assert joint_unnormalized(FactorNet(3, []), [0, 1, 0]) == 1.0

    def test_incomplete_assignment(self):
        with pytest.raises(StructureError):
            joint_unnormalized(_single_edge(0.7), [1])

    def test_added_factor_multiplies_pointwise(self):
        net = FactorNet(3, [edge_potential(0, 1, 0.7), unary_potential(2, -1.2)])
        extra = Factor((2, 0), [0.5, 2.0, 3.0, 0.25])
        extended = net.with_factor(extra)
        assert extended.kind is NetKind.MARKOV
        assert len(net.factors) == 2
        for assignment in all_assignments(3):
            values = [int(v) for v in assignment]
            expected = joint_unnormalized(net, values) * extra.value({2: values[2], 0: values[0]})
            assert joint_unnormalized(extended, values) == pytest.approx(expected, rel=1e-14)


class TestPartitionFunction:

    @pytest.mark.parametrize("w", [-2.0, 0.0, 0.7, 3.0])
    def test_single_edge(self, w):
        assert partition_function(_single_edge(w)) == pytest.approx(np.exp(w) + 3)

    def test_bayes_net_is_normalized(self):
        mlp = Mlp.uniform([2, 2, 1], np.random.default_rng(3), 2.0, 1.0)
        assert partition_function(mlp_to_bayes_net(mlp)) == pytest.approx(1.0, abs=1e-12)

    def test_disconnected_unaries(self):
        a, b = 0.4, -1.3
        net = FactorNet(2, [unary_potential(0, a), unary_potential(1, b)])
        assert partition_function(net) == pytest.approx((np.exp(a) + 1) * (np.exp(b) + 1))

    def test_tree_recursion_matches_enumeration(self, rng):
        # random pairwise tree over 12 variables with unary terms
        factors = [unary_potential(v, rng.uniform(-2, 2)) for v in range(12)]
        for v in range(1, 12):
            parent = int(rng.integers(0, v))
            factors.append(Factor((v, parent), rng.uniform(0.1, 3.0, 4)))
        net = FactorNet(12, factors)
        tree = partition_function(net, method="tree")
        brute = partition_function(net, method="enumerate")
        assert tree == pytest.approx(brute, rel=1e-10)

    def test_capacity(self):
        net = FactorNet(21, [Factor((0, 1, 2), [1.0] * 8)])
        with pytest.raises(CapacityError):
            partition_function(net)

    def test_tree_method_needs_forest(self):
        net = FactorNet(3, [edge_potential(0, 1, 1.0), edge_potential(1, 2, 1.0), edge_potential(0, 2, 1.0)])
        with pytest.raises(StructureError):
            partition_function(net, method="tree")


class TestVeMarginal:

    def test_logistic_cpd(self):
        net = mlp_to_bayes_net(Mlp([1, 1], [[[1.0]]], [[0.0]]))
        off, on = ve_marginal(net, 1, {0: 1})
        assert on == pytest.approx(0.7310586, abs=1e-7)
        assert off + on == pytest.approx(1.0)

    def test_isolated_uniform_variable(self):
        net = FactorNet(3, [edge_potential(0, 1, 2.0), Factor((2,), [1.0, 1.0])])
        assert ve_marginal(net, 2) == pytest.approx((0.5, 0.5))

    def test_generated_bn_matches_enumeration(self):
        mlp = Mlp.uniform([4, 4, 4, 1], np.random.default_rng(5), 3.0)
        net = mlp_to_bayes_net(mlp)
        output = mlp.output_nodes()[0]
        for x in ([0, 0, 0, 0], [1, 0, 1, 1], [1, 1, 1, 1]):
            evidence = dict(enumerate(x))
            assert ve_marginal(net, output, evidence)[1] == pytest.approx(
                enumerate_marginal(net, output, evidence)[1], abs=1e-10)

    def test_query_in_evidence(self):
        with pytest.raises(EvidenceError):
            ve_marginal(_single_edge(1.0), 0, {0: 1})

    def test_contradictory_evidence(self):
        net = FactorNet(2, [Factor((0, 1), [1.0, 0.0, 0.0, 1.0]), Factor((0,), [0.0, 1.0])])
        with pytest.raises(InferenceError):
            ve_marginal(net, 1, {0: 0})

    def test_min_degree_prefers_leaves(self):
        factors = [edge_potential(0, 1, 1.0), edge_potential(1, 2, 1.0), edge_potential(1, 3, 1.0)]
        order = min_degree_order(factors, [0, 1, 2, 3])
        assert order[0] == 0
        assert order[-1] in (1, 3)


class TestConversion:

    def test_zero_edge_is_all_ones(self):
        net = bn_to_mn(Mlp.zeros([1, 1]), normalize_cpds=False)
        edge = [f for f in net.factors if len(f.scope) == 2][0]
        np.testing.assert_array_equal(edge.flat(), [1.0, 1.0, 1.0, 1.0])

    def test_edge_table(self):
        net = bn_to_mn(Mlp([1, 1], [[[0.7]]], [[0.0]]), normalize_cpds=False)
        edge = [f for f in net.factors if len(f.scope) == 2][0]
        assert edge.table[1, 1] == pytest.approx(np.exp(0.7))
        assert edge.table[0, 0] == edge.table[0, 1] == edge.table[1, 0] == 1.0

    def test_bias_becomes_unary(self):
        net = bn_to_mn(Mlp([1, 1], [[[0.0]]], [[1.5]]), normalize_cpds=False)
        unary = [f for f in net.factors if f.scope == (1,)][0]
        np.testing.assert_allclose(unary.flat(), [1.0, np.exp(1.5)])

    @pytest.mark.parametrize("dims", [(1, 1, 1), (2, 2, 1), (2, 3, 2)])
    def test_same_joint_as_bayes_net(self, dims):
        mlp = Mlp.uniform(dims, np.random.default_rng(17), 2.5, 1.0)
        _, bn = enumerate_joint(mlp_to_bayes_net(mlp))
        _, mn = enumerate_joint(bn_to_mn(mlp))
        np.testing.assert_allclose(mn / mn.sum(), bn, atol=1e-12)

    def test_single_parent_nets_stay_pairwise(self):
        mlp = Mlp.uniform([1, 1, 1], np.random.default_rng(2), 2.0)
        assert bn_to_mn(mlp).is_pairwise_forest()

    def test_bayes_cpds(self):
        mlp = Mlp([2, 1], [[[1.0, -2.0]]], [[0.5]])
        net = mlp_to_bayes_net(mlp, input_prior=0.3)
        assert net.kind is NetKind.BAYES
        np.testing.assert_allclose(net.cpd(0).flat(), [0.7, 0.3])
        assert net.cpd(2).table[1, 0, 1] == pytest.approx(expit(1.5))
        assert net.parents(2) == (0, 1)
