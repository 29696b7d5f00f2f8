"""Random-state plumbing.

Every stochastic entry point accepts ``rng`` as an ``int`` seed, a
``numpy.random.Generator`` or ``None``.  Monte Carlo trials are grouped in
fixed-size blocks; block ``b`` of a run seeded with ``s`` always draws from
``SeedSequence(s, spawn_key=(b,))``, so the outcome of trial ``i`` depends only
on ``(s, i)`` and never on how blocks are distributed over workers.
"""

import numpy as np

TRIAL_BLOCK = 8192


def as_generator(rng=None):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def block_generator(seed, block):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.PCG64(ss))


def derived_seed(seed, *keys):
    """Deterministic 63-bit child seed for a labelled sub-stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def uniform_in_ball(center, radius, size, rng):
    """``size`` points uniform in the open ball ``B(center, radius)``."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    d = center.shape[0]
    g = rng.standard_normal((size, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(size) ** (1.0 / d)
    return center + g * r[:, None]
