"""Counter-based random streams (Philox4x32-10, vectorised over numpy arrays).

Every draw is a pure function of ``(seed, path_index, step)``: the seed is
the key and the pair ``(step, path_index)`` is the counter. A path therefore
sees the same numbers whether it is simulated alone, in a block, or in a
different worker, which is what makes Monte Carlo results independent of
how the work is split.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
ROUNDS = 10


def philox4x32(counter, key, rounds: int = ROUNDS):
    """Philox4x32 block function.

    ``counter`` is a sequence of four uint32-valued arrays (broadcastable),
    ``key`` a pair of Python ints below 2**32. Returns four uint64 arrays
    holding 32-bit words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK32 for c in counter)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for i in range(rounds):
        if i:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint64(k0), lo1, hi0 ^ c3 ^ np.uint64(k1), lo0
    return c0, c1, c2, c3


def _to_open_unit(hi, lo):
    # 53 bits -> midpoint of a 2**-53 cell, strictly inside (0, 1)
    m = (hi << np.uint64(21)) | (lo >> np.uint64(11))
    return (m.astype(np.float64) + 0.5) * 2.0 ** -53


def uniform_pair(seed: int, path_index, step):
    """Two independent U(0,1) arrays for the given paths at the given arrival step."""
    path_index = np.asarray(path_index, dtype=np.uint64)
    step = np.asarray(step, dtype=np.uint64)
    seed = int(seed)
    if seed < 0 or seed >= 2 ** 64:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    key = (seed & 0xFFFFFFFF, seed >> 32)
    x0, x1, x2, x3 = philox4x32((step, np.zeros_like(step), path_index & _MASK32, path_index >> _SHIFT32), key)
    return _to_open_unit(x0, x1), _to_open_unit(x2, x3)


def arrival_draws(seed: int, path_index, step, lam: float):
    """Exponential(lam) inter-arrival gap and standard normal for each path at ``step``."""
    u1, u2 = uniform_pair(seed, path_index, step)
    return -np.log(u1) / lam, ndtri(u2)
