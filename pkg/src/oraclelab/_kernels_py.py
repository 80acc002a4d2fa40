"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Both implementations must agree bit for bit; ``tests/test_kernels.py`` checks it.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    """SplitMix64 finalizer on a 64-bit word."""
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_key(seed):
    return mix64(seed & MASK64)


def answer(key, point, range_bits):
    return mix64(key ^ mix64(point)) >> (64 - range_bits)


def answers(key, points, range_bits):
    return np.array([answer(key, int(p), range_bits) for p in points], dtype=np.uint64)


def table(key, domain_bits, range_bits):
    return answers(key, range(1 << domain_bits), range_bits)


def inclusion_counts(samples, size):
    """Count, for each point below ``size``, the samples whose point set contains it.

    ``samples`` is an iterable of point collections; duplicates inside one
    sample count once.
    """
    counts = np.zeros(size, dtype=np.int64)
    for sample in samples:
        for p in set(sample):
            counts[p] += 1
    return counts
