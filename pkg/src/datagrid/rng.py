"""Seeded deterministic randomness.

Every random draw in the package comes from a :class:`KeyStream`: the
ChaCha20 keystream under a key derived from ``(label, seed)``.  Distinct
labels give independent streams for the same seed, so e.g. the Shamir
coefficients and the sealed-mode key never share bytes.
"""

from __future__ import annotations

import hashlib
import os

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

from .errors import ParameterError

SEED_BITS = 64
_BUFFER = 4096


def check_seed(seed: int) -> int:
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**SEED_BITS:
        raise ParameterError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return seed


def fresh_seed() -> int:
    """Entropy-backed seed for interactive use; tests always pass explicit seeds."""
    return int.from_bytes(os.urandom(8), "big")


def derive_key(seed: int, label: str) -> bytes:
    check_seed(seed)
    return hashlib.sha256(label.encode() + b"\x00" + seed.to_bytes(8, "big")).digest()


class KeyStream:
    def __init__(self, seed: int, label: str):
        key = derive_key(seed, label)
        self._enc = Cipher(algorithms.ChaCha20(key, b"\x00" * 16), mode=None).encryptor()
        self._buf = b""
        self._pos = 0

    def read(self, n: int) -> bytes:
        if n <= len(self._buf) - self._pos:
            out = self._buf[self._pos:self._pos + n]
            self._pos += n
            return out
        head = self._buf[self._pos:]
        need = n - len(head)
        if need > _BUFFER:
            self._buf, self._pos = b"", 0
            return head + self._enc.update(b"\x00" * need)
        self._buf = self._enc.update(b"\x00" * _BUFFER)
        self._pos = need
        return head + self._buf[:need]

    def randbelow(self, m: int) -> int:
        """Uniform integer in ``[0, m)`` by masked rejection sampling."""
        if m < 1:
            raise ParameterError("randbelow needs m >= 1")
        if m == 1:
            return 0
        bits = (m - 1).bit_length()
        nbytes = (bits + 7) // 8
        mask = (1 << bits) - 1
        while True:
            v = int.from_bytes(self.read(nbytes), "big") & mask
            if v < m:
                return v

    def choice(self, items):
        return items[self.randbelow(len(items))]
