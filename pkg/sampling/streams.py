"""
Random streams for chains.

Each chain owns a counter-based Philox generator spawned from the master
seed, so a chain's draws do not depend on how many other chains run next
to it or in which process.
"""

from typing import List, Sequence, Tuple, Union

import numpy as np

Rngs = Union[np.random.Generator, Sequence[np.random.Generator]]


def chain_rngs(seed: int, n_chains: int) -> List[np.random.Generator]:
    """One independent generator per chain."""
    children = np.random.SeedSequence(seed).spawn(n_chains)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def standard_normal(rngs: Rngs, shape: Tuple[int, ...]) -> np.ndarray:
    """A single generator fills the whole array; a list fills one row per chain."""
    if isinstance(rngs, np.random.Generator):
        return rngs.standard_normal(shape)
    if len(rngs) != shape[0]:
        raise ValueError(f"{len(rngs)} generators for {shape[0]} chains")
    return np.stack([rng.standard_normal(shape[1:]) for rng in rngs])


def uniform(rngs: Rngs, shape: Tuple[int, ...]) -> np.ndarray:
    if isinstance(rngs, np.random.Generator):
        return np.asarray(rngs.random() if shape == () else rngs.random(shape))
    if len(rngs) != shape[0]:
        raise ValueError(f"{len(rngs)} generators for {shape[0]} chains")
    return np.stack([rng.random(shape[1:]) for rng in rngs])


def select(rngs: Rngs, rows: Sequence[int]) -> Rngs:
    """Generators of a sub-batch of chains."""
    if isinstance(rngs, np.random.Generator):
        return rngs
    return [rngs[i] for i in rows]
