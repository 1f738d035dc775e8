"""Deterministic random-stream derivation.

Every run derives child seeds from one master seed along a key path
(replica, episode, purpose, ...), so independent components never share a
stream and a run can be resumed at an episode boundary without serializing
generator internals.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    # splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def _key_to_int(key) -> int:
    if isinstance(key, str):
        digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big")
    return int(key) & _MASK64


def derive_seed(master: int, *keys) -> int:
    """Fold a key path into the master seed, one splitmix round per key."""
    state = _mix64(int(master) & _MASK64)
    for key in keys:
        state = (state + _GOLDEN) & _MASK64
        state = _mix64(state ^ _key_to_int(key))
    return state


def make_rng(master: int, *keys) -> np.random.Generator:
    """Generator seeded from the master seed and a key path."""
    return np.random.Generator(np.random.PCG64(derive_seed(master, *keys)))
