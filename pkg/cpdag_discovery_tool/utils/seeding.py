import numpy as np


def item_rng(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for one item of a seeded collection

    The stream is a Philox counter-based generator keyed by a SeedSequence
    spawned from `(seed, *key)`, so item `k` of a corpus draws the same
    numbers whatever worker or order produced it.

    Args:
        seed (int): The collection seed
        *key (int): Position of the item, e.g. `(k,)` or `(p, n, k)`

    Returns:
        np.random.Generator: A fresh generator for that item
    """
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def item_seed(seed: int, *key: int) -> int:
    """Derive a 63-bit integer seed for one item (for torch generators)"""
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
