"""Scheme dispatch: partition an object into shares and put it back together."""

from __future__ import annotations

from collections.abc import Iterable

from . import erasure_coding, fragmentation, secret_sharing
from .errors import ParameterError
from .share import Scheme, Share, ShareParams


def partition(data: bytes, scheme: Scheme, params: ShareParams, seed: int | None = None) -> list[Share]:
    if scheme in (Scheme.SHAMIR, Scheme.RS_SEALED) and seed is None:
        raise ParameterError(f"{scheme.label} needs a seed")
    if scheme == Scheme.SHAMIR:
        return secret_sharing.split(data, params, seed)
    if scheme == Scheme.RS_SYSTEMATIC:
        return erasure_coding.encode(data, params.k, params.n)
    if scheme == Scheme.RS_SEALED:
        return erasure_coding.sealed_encode(data, params.k, params.n, seed)
    if params.k != params.n:
        raise ParameterError("fragmentation needs every piece: use k == n")
    return fragmentation.fragment(data, fragmentation.FragmentationScheme.even(len(data), params.n))


def recombine(shares: Iterable[Share]) -> bytes:
    shares = list(shares)
    if not shares:
        raise ParameterError("no shares given")
    scheme = shares[0].scheme
    if scheme == Scheme.SHAMIR:
        return secret_sharing.reconstruct(shares)
    if scheme == Scheme.RS_SYSTEMATIC:
        return erasure_coding.decode(shares)
    if scheme == Scheme.RS_SEALED:
        return erasure_coding.sealed_decode(shares)
    return fragmentation.reassemble(shares)


def share_size(scheme: Scheme, length: int, params: ShareParams) -> int:
    """Payload bytes per share for an object of ``length`` bytes."""
    if scheme == Scheme.SHAMIR:
        return length
    return -(-length // params.k)
