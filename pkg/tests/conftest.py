import numpy as np
import pytest

from models.dataset import GenKind, GenSpec
from models.mlp import Mlp
from data.generator import DataGenerator


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def chain_net():
    """1-1-1 network, both weights 1, zero biases."""
    return Mlp([1, 1, 1], [[[1.0]], [[1.0]]], [[0.0], [0.0]])


@pytest.fixture
def zero_net():
    return Mlp.zeros([2, 2, 1])


@pytest.fixture
def random_net():
    """2-3-2-1 network with weights and biases drawn from U(-2, 2)."""
    return Mlp.uniform([2, 3, 2, 1], np.random.default_rng(7), 2.0, 2.0)


@pytest.fixture
def small_dataset():
    """60 rows from a 2-2-1 sigmoid Bayes net with w=3."""
    _, dataset = DataGenerator.generate(GenSpec(GenKind.BN, (2, 2, 1), 3.0, 60, 11))
    return dataset
