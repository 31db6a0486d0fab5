"""Counter-based random streams.

Every consumer of randomness asks for a stream by ``(seed, *stream_index)``; streams are
independent Philox generators keyed by a spawned ``SeedSequence``, so folds, sampling blocks
and replications can run on any number of workers without changing a single draw.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1


def rng_stream(seed: int, *stream: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=seed & SEED_MASK, spawn_key=tuple(stream))
    return np.random.Generator(np.random.Philox(sequence))


def derived_seed(seed: int, *stream: int) -> int:
    """A 32-bit integer seed for libraries that only accept plain integers."""
    sequence = np.random.SeedSequence(entropy=seed & SEED_MASK, spawn_key=tuple(stream))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
