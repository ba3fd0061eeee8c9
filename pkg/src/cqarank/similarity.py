"""SimHash fingerprints and cosine similarity."""
from __future__ import annotations

from collections import Counter
from typing import Iterable

import numpy as np

MASK64 = (1 << 64) - 1
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
# Default seed XORed into the FNV offset basis.
SIMHASH_SEED = 0x5EED5EED5EED5EED


def _fmix64(h: int) -> int:
    # murmur3 finalizer; FNV alone leaves the high bits of short strings biased
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & MASK64
    h ^= h >> 33
    h = (h * 0xC4CEB9FE1A85EC53) & MASK64
    h ^= h >> 33
    return h


def hash64(token: str, seed: int = SIMHASH_SEED) -> int:
    """FNV-1a over the UTF-8 bytes of ``token`` followed by a 64-bit avalanche."""
    h = (FNV_OFFSET ^ seed) & MASK64
    for byte in token.encode("utf-8"):
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return _fmix64(h)


_BITS = np.arange(64, dtype=np.uint64)


def simhash(tokens: Iterable, seed: int = SIMHASH_SEED) -> int:
    """64-bit SimHash of a token multiset; empty input gives 0."""
    counts = Counter(t.surface if hasattr(t, "surface") else t for t in tokens)
    if not counts:
        return 0
    hashes = np.array([hash64(tok, seed) for tok in counts], dtype=np.uint64)
    weights = np.array(list(counts.values()), dtype=np.int64)
    bits = ((hashes[:, None] >> _BITS[None, :]) & np.uint64(1)).astype(np.int64)
    totals = weights @ (2 * bits - 1)
    return int(sum(1 << i for i in range(64) if totals[i] > 0))


def hamming_distance(a: int, b: int) -> int:
    return ((a ^ b) & MASK64).bit_count()


def hamming_similarity(a: int, b: int) -> float:
    return 1.0 - hamming_distance(a, b) / 64.0


def cosine(u, v) -> float:
    """Cosine similarity; 0 when either vector has zero norm."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))
