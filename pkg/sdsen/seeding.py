"""
All randomness flows from one run seed; each consumer gets its own derived stream.
"""

import numpy as np

_CONSUMERS = {"init": 1, "data": 2, "batch": 3}


def derive_seed(seed: int, consumer: str, index: int = 0) -> int:
    if consumer not in _CONSUMERS:
        raise ValueError(f"unknown seed consumer {consumer!r}")
    sequence = np.random.SeedSequence([int(seed), _CONSUMERS[consumer], int(index)])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def rng_for(seed: int, consumer: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, consumer, index))
