"""Labeled seed derivation and vectorized seeded hashing.

All randomness in symnorm flows from a single root seed. A component asks
for a seed by label, e.g. ``derive_seed(root, "levels", "member", phi)``;
the label tuple is rendered as canonical JSON and hashed, so the same
labels always give the same seed and different labels give unrelated ones.

Per-index hashing (bucket, sign, subsampling membership) uses a 64-bit
mixing function evaluated on numpy ``uint64`` arrays.
"""
import hashlib
import json
from typing import Tuple, Union

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

SeedLike = Union[int, np.ndarray]


def _canonical(root: int, labels: Tuple) -> str:
    return json.dumps([int(root) & MASK64, *labels], sort_keys=True, separators=(",", ":"))


def derive_seed(root: int, *labels) -> int:
    """
    Derive a 64-bit seed from a root seed and a label path.

    Args:
        root: Root seed
        *labels: JSON-serializable labels (component, purpose, index, ...)

    Returns:
        Unsigned 64-bit integer seed

    Example:
        >>> derive_seed(7, "countsketch", 3) == derive_seed(7, "countsketch", 3)
        True
    """
    digest = hashlib.blake2b(_canonical(root, labels).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def mix64(keys, seed: SeedLike) -> np.ndarray:
    """
    Hash integer keys under a seed (splitmix64 finalizer).

    ``keys`` and ``seed`` broadcast against each other, so a column of seeds
    against a row of keys hashes every key under every seed.
    """
    k = np.asarray(keys)
    if k.dtype != np.uint64:
        k = k.astype(np.int64).astype(np.uint64)
    s = np.asarray(seed, dtype=np.uint64) if not isinstance(seed, int) else np.uint64(seed & MASK64)
    with np.errstate(over="ignore"):
        z = k * _GOLDEN + s
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


def seed_family(root: int, *labels, shape) -> np.ndarray:
    """
    Expand one labeled seed into an array of seeds.

    Entry j (in C order) depends only on the labels and j, so growing the
    leading axis of ``shape`` keeps every existing seed unchanged.
    """
    base = derive_seed(root, *labels)
    size = int(np.prod(shape))
    return mix64(np.arange(size, dtype=np.uint64), base).reshape(shape)


def bucket_and_sign(keys, seeds: SeedLike, width: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Bucket in [0, width) and sign in {-1, +1} from a single hash.

    The low bits select the bucket and the top bit selects the sign.
    """
    h = mix64(keys, seeds)
    buckets = (h % np.uint64(width)).astype(np.int64)
    signs = 1 - 2 * (h >> np.uint64(63)).astype(np.int64)
    return buckets, signs


def sampled(keys, seeds: SeedLike, phi: int) -> np.ndarray:
    """
    Subsampling membership with rate 2^-phi.

    A key is a member when the top ``phi`` bits of its hash are all zero.
    """
    if phi <= 0:
        return np.ones(np.broadcast(np.asarray(keys), np.asarray(seeds)).shape, dtype=bool)
    h = mix64(keys, seeds)
    return (h >> np.uint64(64 - phi)) == 0


def uniform01(root: int, *labels) -> float:
    """A uniform draw from [0, 1) determined by labels."""
    return (derive_seed(root, *labels) >> 11) * (1.0 / (1 << 53))
