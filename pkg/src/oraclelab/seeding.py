"""Deterministic seed derivation.

Every random stream in the package is keyed by a master seed plus a path of
labels, so any single trial can be re-run in isolation.
"""

import hashlib
import random


def derive_seed(master, *labels):
    """Return a 64-bit seed from ``master`` and a label path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master)).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode())
    return int.from_bytes(h.digest(), "big")


def make_rng(master, *labels):
    return random.Random(derive_seed(master, *labels))
