# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

"""
Reproducible random streams. Every replication owns a Philox (counter-based)
generator keyed by (master seed, replication index), so streams never depend on
how many replications ran before them or on which worker runs them.
"""

import numpy as np


def stream(master_seed: int, replication: int = 0) -> np.random.Generator:
    """
    :param master_seed: unsigned master seed
    :param replication: replication index
    :return: an independent generator for that replication
    """
    if master_seed < 0 or replication < 0:
        raise ValueError(f"Seeds and indices must be >= 0, got {master_seed}, {replication}")
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(replication,))
    return np.random.Generator(np.random.Philox(seq))
