"""Synthetic data generation and file formats."""

from .generator import DataGenerator, GeneratedModel
from .formats import (
    load_labeled_csv,
    read_dataset,
    read_factor_net,
    read_mlp,
    read_rows,
    write_dataset,
    write_factor_net,
    write_mlp,
    write_rows,
)

__all__ = [
    'DataGenerator', 'GeneratedModel',
    'write_factor_net', 'read_factor_net', 'write_mlp', 'read_mlp',
    'write_dataset', 'read_dataset', 'load_labeled_csv', 'write_rows', 'read_rows',
]
