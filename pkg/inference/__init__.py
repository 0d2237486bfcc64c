"""Exact inference and graphical-model conversions."""

from .exact import (
    enumerate_joint,
    enumerate_marginal,
    joint_unnormalized,
    min_degree_order,
    partition_function,
    ve_marginal,
)
from .conversion import bn_to_mn, mlp_to_bayes_net

__all__ = [
    'joint_unnormalized', 'partition_function', 've_marginal', 'min_degree_order',
    'enumerate_joint', 'enumerate_marginal', 'bn_to_mn', 'mlp_to_bayes_net',
]
