"""Deterministic 64-bit PRNG: xoshiro256** seeded through splitmix64.

Every random decision in the library flows through this module so that
instances are reproducible bit-for-bit across runs, platforms, and
reimplementations in other languages.  The consumption rules are pinned:

* ``next_word`` advances xoshiro256** once and returns 64 bits.
* the bit stream is the little-endian concatenation of output words
  (bit t of the stream is bit ``t % 64`` of word ``t // 64``);
* ``randbelow(n)`` draws ``bit_length(n - 1)`` bits from the stream and
  rejects values ``>= n``;
* ``shuffle`` is a Fisher-Yates pass from the top index downward.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Rng:
    """xoshiro256** generator with a shared little-endian bit cache."""

    __slots__ = ("_s", "_bit_buf", "_bit_count")

    def __init__(self, seed: int):
        seed &= _MASK64
        state = seed
        s = []
        for _ in range(4):
            state, word = splitmix64(state)
            s.append(word)
        self._s = s
        self._bit_buf = 0
        self._bit_count = 0

    def next_word(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def take_bits(self, count: int) -> int:
        """Next ``count`` stream bits as an integer (first bit = LSB)."""
        while self._bit_count < count:
            self._bit_buf |= self.next_word() << self._bit_count
            self._bit_count += 64
        out = self._bit_buf & ((1 << count) - 1)
        self._bit_buf >>= count
        self._bit_count -= count
        return out

    def bit_array(self, count: int) -> np.ndarray:
        """Next ``count`` stream bits as a uint8 array of 0/1 values.

        Consumes exactly the same bits as ``count`` calls of
        ``take_bits(1)``.
        """
        out = np.empty(count, dtype=np.uint8)
        pos = 0
        # drain the partial cache first, then expand whole words in bulk
        while pos < count and self._bit_count > 0:
            out[pos] = self._bit_buf & 1
            self._bit_buf >>= 1
            self._bit_count -= 1
            pos += 1
        remaining = count - pos
        if remaining > 0:
            n_words = (remaining + 63) // 64
            words = np.array(
                [self.next_word() for _ in range(n_words)], dtype=np.uint64
            )
            bits = np.unpackbits(words.view(np.uint8), bitorder="little")
            out[pos:] = bits[:remaining]
            tail = bits[remaining:]
            for i, b in enumerate(tail):
                if b:
                    self._bit_buf |= 1 << i
            self._bit_count = len(tail)
        return out

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by masked rejection on the bit stream."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        if n == 1:
            return 0
        k = (n - 1).bit_length()
        while True:
            v = self.take_bits(k)
            if v < n:
                return v

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, top index downward."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
