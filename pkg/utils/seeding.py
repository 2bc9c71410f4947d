"""Counter-based random streams.

Every random draw in the package comes from a stream addressed by
(master seed, path...), so the value of a draw never depends on which
worker produced it or in what order.
"""

import hashlib

import numpy as np


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return int.from_bytes(hashlib.blake2b(part.encode(), digest_size=8).digest(), "little")
    if part < 0:
        raise ValueError(f"Stream path entries must be nonnegative, got {part}")
    return int(part)


def seed_sequence(seed: int, *path: int | str) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError(f"Seed must be nonnegative, got {seed}")
    return np.random.SeedSequence(seed, spawn_key=tuple(_key(p) for p in path))


def stream(seed: int, *path: int | str) -> np.random.Generator:
    """Philox generator keyed by (seed, path)."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *path)))


def uniform_at(seed: int, *path: int | str) -> float:
    """A single uniform in [0, 1) fixed by (seed, path)."""
    hi, lo = seed_sequence(seed, *path).generate_state(2, dtype=np.uint32)
    return ((int(hi) << 21) ^ (int(lo) >> 11)) / float(1 << 53)
