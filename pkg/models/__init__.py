"""
Core data models: graphical models, sigmoid networks, unrolled trees,
sampler state and datasets.
"""

from .errors import (
    CapacityError,
    DataFormatError,
    DegenerateSampleError,
    DivergenceError,
    EvidenceError,
    InferenceError,
    ReportMismatchError,
    StructureError,
    ToleranceBreach,
)
from .factor_net import Factor, FactorNet, NetKind
from .mlp import ForwardTrace, Gradient, Mlp, OutputKind
from .unrolled_tree import FiniteLModel, UnrolledTree
from .chain import CdConfig, ChainState, HmcConfig, OptimizerKind, SamplerKind, StochModel
from .dataset import DataRow, Dataset, GenKind, GenSpec

__all__ = [
    'Factor', 'FactorNet', 'NetKind',
    'Mlp', 'ForwardTrace', 'Gradient', 'OutputKind',
    'UnrolledTree', 'FiniteLModel',
    'StochModel', 'ChainState', 'HmcConfig', 'CdConfig', 'SamplerKind', 'OptimizerKind',
    'Dataset', 'DataRow', 'GenSpec', 'GenKind',
    'StructureError', 'CapacityError', 'EvidenceError', 'InferenceError',
    'DivergenceError', 'DataFormatError', 'DegenerateSampleError',
    'ReportMismatchError', 'ToleranceBreach',
]
