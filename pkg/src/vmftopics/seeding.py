"""Labeled substream derivation: every source of randomness in a run is a
named child of the single run seed, so runs are reproducible bit for bit."""

import hashlib

import numpy as np


def substream(seed: int, label: str) -> np.random.Generator:
    """Return an independent generator derived from (seed, label).

    The label is hashed with SHA-256 so the mapping is stable across
    platforms and Python versions.
    """
    digest = hashlib.sha256(label.encode("utf-8")).digest()[:16]
    key = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))
