"""Deterministic splittable PRNG.

Counter-based generator built on the splitmix64 finalizer. A stream is a
128-bit state (key, counter); drawing a word applies two finalizer rounds
over (key, counter) and bumps the counter; splitting derives child keys
from (key, counter, child index) and by convention retires the parent.
All arithmetic is modulo 2**64, so scalar (Python int) and vectorized
(numpy uint64) paths produce identical bits on every platform.

Construction, with ``mix64`` the splitmix64 finalizer,
``GOLDEN = 0x9E3779B97F4A7C15`` and ``SEED_SALT = 0x9FB21C651E98DF25``
(domain separation between seeding and drawing):

    seed:     key = mix64(seed ^ SEED_SALT), counter = 0
    next:     word_i = mix64(key ^ mix64((counter + 1) * GOLDEN))
    split:    child_key_i = mix64(mix64(key ^ (counter + 1 + i) * GOLDEN) + GOLDEN)

Uniform index reduction uses the multiply-shift trick: the index into
``[0, n)`` is the upper 64 bits of ``draw * n`` (bias below 1 ulp for any
n we use; exactness is not required for task sampling).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SEED_SALT = 0x9FB21C651E98DF25

_U64_GOLDEN = np.uint64(GOLDEN)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_ONE = np.uint64(1)
_LOW32 = np.uint64(0xFFFFFFFF)


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit word (scalar path)."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return (x ^ (x >> 31)) & MASK64


def mix64_vec(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer on uint64 arrays; bit-identical to mix64."""
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


@dataclass(frozen=True)
class PrngState:
    """Immutable 128-bit stream state: two 64-bit words (key, counter)."""

    key: int
    counter: int = 0

    def __post_init__(self):
        object.__setattr__(self, "key", self.key & MASK64)
        object.__setattr__(self, "counter", self.counter & MASK64)


def from_seed(seed: int) -> PrngState:
    """Derive a stream from a 64-bit seed (seed 0 is fine)."""
    return PrngState(key=mix64((seed ^ SEED_SALT) & MASK64), counter=0)


def next_u64(s: PrngState) -> tuple[int, PrngState]:
    """Draw one 64-bit word, returning (word, advanced state)."""
    c = (s.counter + 1) & MASK64
    word = mix64(s.key ^ mix64((c * GOLDEN) & MASK64))
    return word, PrngState(s.key, c)


def split(s: PrngState, n: int) -> list[PrngState]:
    """Derive n statistically independent child streams.

    The parent must not be drawn from afterwards (convention, not
    enforced). Children start at counter 0.
    """
    if n < 1:
        raise ValueError("split requires n >= 1")
    children = []
    for i in range(n):
        inner = mix64(s.key ^ (((s.counter + 1 + i) * GOLDEN) & MASK64))
        children.append(PrngState(key=mix64((inner + GOLDEN) & MASK64), counter=0))
    return children


def uniform_index(word: int, n: int) -> int:
    """Map one draw to an index in [0, n) via multiply-shift reduction."""
    if n < 1:
        raise ValueError("uniform_index requires n >= 1")
    return (word * n) >> 64


# Vectorized lane streams: parallel arrays of keys and counters.


def keys_from_seed(seed: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a fresh seed-derived stream into n lane streams (vectorized)."""
    root = from_seed(seed)
    idx = np.arange(1, n + 1, dtype=np.uint64)
    inner = mix64_vec(np.uint64(root.key) ^ (np.uint64(root.counter) + idx) * _U64_GOLDEN)
    keys = mix64_vec(inner + _U64_GOLDEN)
    return keys, np.zeros(n, dtype=np.uint64)


def next_u64_vec(keys: np.ndarray, counters: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Draw one word per lane; returns (words, advanced counters)."""
    c = counters + _ONE
    words = mix64_vec(keys ^ mix64_vec(c * _U64_GOLDEN))
    return words, c


def split_vec(keys: np.ndarray, counters: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Derive one child stream per lane (i = 0 child of each lane)."""
    inner = mix64_vec(keys ^ (counters + _ONE) * _U64_GOLDEN)
    return mix64_vec(inner + _U64_GOLDEN), np.zeros_like(counters)


def _mulhi64(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Upper 64 bits of a 64x64 product, via 32-bit limbs."""
    a_lo = a & _LOW32
    a_hi = a >> _S32
    b_lo = b & _LOW32
    b_hi = b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    carry = ((ll >> _S32) + (lh & _LOW32) + (hl & _LOW32)) >> _S32
    return a_hi * b_hi + (lh >> _S32) + (hl >> _S32) + carry


def uniform_index_vec(words: np.ndarray, n) -> np.ndarray:
    """Vectorized multiply-shift reduction to [0, n); n may be per-lane."""
    return _mulhi64(words, np.asarray(n, dtype=np.uint64))
