"""Byte-wise Shamir (k, n) threshold sharing over GF(256).

Each byte of the secret is the constant term of its own random
polynomial of degree k-1; share ``i`` holds the evaluations at ``x = i``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .finite_field import EXP, LOG, MUL
from .rng import KeyStream
from .share import Scheme, Share, ShareParams, check_family, equal_payload_lengths, object_digest


def evaluate_shares(secret: np.ndarray, coeffs: np.ndarray, xs: Sequence[int]) -> list[np.ndarray]:
    """Evaluate the per-byte polynomials at every point in ``xs``.

    ``secret`` has shape (L,), ``coeffs`` shape (L, k-1) holding the
    non-constant coefficients in increasing degree.
    """
    out = []
    degree = coeffs.shape[1]
    for x in xs:
        if degree == 0:
            out.append(secret.copy())
            continue
        acc = coeffs[:, degree - 1].copy()
        for d in range(degree - 2, -1, -1):
            acc = MUL[x][acc] ^ coeffs[:, d]
        out.append(MUL[x][acc] ^ secret)
    return out


def split_with_stream(secret: bytes, params: ShareParams, stream: KeyStream,
                      scheme: Scheme = Scheme.SHAMIR, object_id: bytes | None = None) -> list[Share]:
    if len(secret) == 0:
        raise DomainError("cannot split an empty secret")
    k, n = params.k, params.n
    data = np.frombuffer(secret, dtype=np.uint8)
    # byte-major: the k-1 coefficients for byte j are contiguous in the stream
    raw = stream.read(len(secret) * (k - 1))
    coeffs = np.frombuffer(raw, dtype=np.uint8).reshape(len(secret), k - 1)
    oid = object_digest(secret) if object_id is None else object_id
    payloads = evaluate_shares(data, coeffs, range(1, n + 1))
    return [
        Share(params=params, index=i, scheme=scheme, object_id=oid,
              original_length=len(secret), payload=p.tobytes())
        for i, p in zip(range(1, n + 1), payloads)
    ]


def split(secret: bytes, params: ShareParams, seed: int) -> list[Share]:
    """Split ``secret`` into ``params.n`` shares; deterministic in ``seed``."""
    return split_with_stream(secret, params, KeyStream(seed, "shamir"))


def lagrange_at_zero(xs: Sequence[int]) -> list[int]:
    """Basis weights l_i(0) = prod_{j != i} x_j / (x_j - x_i) in GF(256)."""
    weights = []
    for i, xi in enumerate(xs):
        log_num = 0
        log_den = 0
        for j, xj in enumerate(xs):
            if i == j:
                continue
            log_num += LOG[xj]
            log_den += LOG[xj ^ xi]
        weights.append(EXP[(log_num - log_den) % 255])
    return weights


def interpolate_zero(points: Sequence[tuple[int, np.ndarray]]) -> np.ndarray:
    xs = [x for x, _ in points]
    out = np.zeros_like(points[0][1])
    for w, (_, y) in zip(lagrange_at_zero(xs), points):
        out ^= MUL[w][y]
    return out


def reconstruct(shares: Iterable[Share], scheme: Scheme = Scheme.SHAMIR) -> bytes:
    """Recover the secret from any ``k`` or more consistent shares."""
    family = check_family(shares, scheme)
    equal_payload_lengths(family)
    k = family[0].params.k
    used = family[:k]
    points = [(s.index, np.frombuffer(s.payload, dtype=np.uint8)) for s in used]
    secret = interpolate_zero(points)
    return secret.tobytes()[:family[0].original_length]

