"""Counter-based random stream derivation.

Every stochastic routine in the package takes a ``numpy.random.Generator``.
Replication loops derive one stream per (master seed, cell, replication,
role) coordinate, so results do not depend on scheduling or on the number
of workers.
"""

from __future__ import annotations

import numpy as np

#: role indices used by the Monte Carlo harness
ROLE_DATA = 0
ROLE_WEIGHTS = 1


def derive_stream(master_seed: int, *path: int) -> np.random.Generator:
    """Return an independent generator keyed by ``(master_seed, *path)``.

    Built on Philox (counter-based), keyed through ``SeedSequence`` spawn
    keys: distinct paths give statistically independent streams, and the
    stream for a given path never depends on which other paths were
    instantiated first.
    """
    seq = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=tuple(int(p) for p in path)
    )
    return np.random.Generator(np.random.Philox(seq))
