"""Systematic (k, n) MDS erasure coding over GF(256), plus sealed mode.

The generator matrix stacks the k x k identity on a Cauchy block whose
entry (i, j) is ``1 / ((k + i) xor j)``.  Any k rows are invertible, so
any k shares decode.

Sealed mode encrypts the object once with AES-128-CTR under a random
16-byte key, erasure-codes the ciphertext, and Shamir-splits the key with
the same (k, n); key share ``i`` rides in share ``i``'s header.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import DomainError, InconsistentSharesError
from .finite_field import gf_inv, mat_apply, mat_inv
from .rng import KeyStream
from .secret_sharing import interpolate_zero, split_with_stream
from .share import Scheme, Share, ShareParams, check_family, equal_payload_lengths, object_digest

KEY_LEN = 16
_CTR_NONCE = b"\x00" * 16  # each key encrypts exactly one object


@dataclass(frozen=True)
class CodingMatrix:
    k: int
    n: int
    rows: tuple[tuple[int, ...], ...]


def build_matrix(k: int, n: int) -> CodingMatrix:
    params = ShareParams(k, n)
    rows = [tuple(int(i == j) for j in range(k)) for i in range(k)]
    for i in range(params.n - params.k):
        rows.append(tuple(gf_inv((k + i) ^ j) for j in range(k)))
    return CodingMatrix(k, n, tuple(rows))


def stripe_length(length: int, k: int) -> int:
    return -(-length // k)


def _encode_payloads(data: bytes, params: ShareParams) -> list[bytes]:
    if len(data) == 0:
        raise DomainError("cannot encode empty data")
    k = params.k
    width = stripe_length(len(data), k)
    padded = np.zeros(k * width, dtype=np.uint8)
    padded[:len(data)] = np.frombuffer(data, dtype=np.uint8)
    stripes = padded.reshape(k, width)
    matrix = build_matrix(params.k, params.n)
    coded = mat_apply(matrix.rows, stripes)
    return [row.tobytes() for row in coded]


def encode(data: bytes, k: int, n: int) -> list[Share]:
    params = ShareParams(k, n)
    oid = object_digest(data)
    return [
        Share(params=params, index=i + 1, scheme=Scheme.RS_SYSTEMATIC, object_id=oid,
              original_length=len(data), payload=p)
        for i, p in enumerate(_encode_payloads(data, params))
    ]


def _decode_family(family: list[Share]) -> bytes:
    params = family[0].params
    width = equal_payload_lengths(family)
    if width != stripe_length(family[0].original_length, params.k):
        raise InconsistentSharesError("payload length does not match original length")
    used = family[:params.k]
    matrix = build_matrix(params.k, params.n)
    sub = [matrix.rows[s.index - 1] for s in used]
    received = np.stack([np.frombuffer(s.payload, dtype=np.uint8) for s in used])
    stripes = mat_apply(mat_inv(sub), received)
    return stripes.tobytes()[:family[0].original_length]


def decode(shares: Iterable[Share]) -> bytes:
    return _decode_family(check_family(shares, Scheme.RS_SYSTEMATIC))


def _ctr(key: bytes, data: bytes) -> bytes:
    return Cipher(algorithms.AES(key), modes.CTR(_CTR_NONCE)).encryptor().update(data)


def sealed_encode(data: bytes, k: int, n: int, seed: int) -> list[Share]:
    params = ShareParams(k, n)
    if len(data) == 0:
        raise DomainError("cannot encode empty data")
    key = KeyStream(seed, "sealed-key").read(KEY_LEN)
    oid = object_digest(data)
    payloads = _encode_payloads(_ctr(key, data), params)
    key_shares = split_with_stream(key, params, KeyStream(seed, "sealed-key-shares"))
    return [
        Share(params=params, index=i + 1, scheme=Scheme.RS_SEALED, object_id=oid,
              original_length=len(data), payload=p, key_share=ks.payload)
        for i, (p, ks) in enumerate(zip(payloads, key_shares))
    ]


def sealed_decode(shares: Iterable[Share]) -> bytes:
    family = check_family(shares, Scheme.RS_SEALED)
    if any(len(s.key_share) != KEY_LEN for s in family):
        raise InconsistentSharesError("sealed share without a 16-byte key share")
    k = family[0].params.k
    points = [(s.index, np.frombuffer(s.key_share, dtype=np.uint8)) for s in family[:k]]
    key = interpolate_zero(points).tobytes()
    return _ctr(key, _decode_family(family))


def coded_storage_bytes(length: int, k: int, n: int) -> int:
    """Total payload bytes of a coded family: n * ceil(length / k)."""
    return n * stripe_length(length, k)
