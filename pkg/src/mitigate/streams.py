"""Seeded random streams.

Every stochastic routine takes an explicit ``numpy.random.Generator``.  Per-trial
streams are derived with :func:`substream`, which hashes the master seed together
with an integer key path through :class:`numpy.random.SeedSequence`.  The result
depends only on ``(seed, *key)``, never on scheduling order.
"""

import numpy as np


def substream(seed, *key):
    """Return an independent generator for ``(seed, key[0], key[1], ...)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
