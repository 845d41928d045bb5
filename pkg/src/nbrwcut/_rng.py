"""Seed plumbing.

Every random draw in the package comes from ``numpy.random.Generator(PCG64)``
seeded through a ``SeedSequence`` whose spawn key names the consumer. Keys are
explicit tuples, so a stream never depends on how many other streams were
requested before it.
"""
import numpy as np

# Spawn-key namespaces. Changing any of these changes every generated graph.
GRAPH = 1
WALK = 2
SURROGATE = 3
DEGREES = 4
COUPLING = 5
CELL = 6

# Phases of graph generation, each on its own substream.
OUT_0, OUT_1, PAIR_0, PAIR_1, CROSS = range(5)


def _check_seed(seed):
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def generator(seed, *key):
    """Generator for the substream ``key`` of master ``seed``."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed, *key):
    """A 64-bit integer seed for the substream ``key`` of ``seed``."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
