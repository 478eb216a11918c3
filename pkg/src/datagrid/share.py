"""The share record common to every partitioning scheme."""

from __future__ import annotations

import enum
import hashlib
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import InconsistentSharesError, InsufficientSharesError, ParameterError

MAX_SHARES = 255
OBJECT_ID_LEN = 16


class Scheme(enum.IntEnum):
    SHAMIR = 1
    RS_SYSTEMATIC = 2
    RS_SEALED = 3
    FRAGMENT = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Scheme":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ParameterError(f"unknown scheme {label!r}") from None


@dataclass(frozen=True)
class ShareParams:
    k: int
    n: int

    def __post_init__(self):
        if not (1 <= self.k <= self.n <= MAX_SHARES):
            raise ParameterError(f"need 1 <= k <= n <= {MAX_SHARES}, got k={self.k}, n={self.n}")


@dataclass(frozen=True)
class Share:
    params: ShareParams
    index: int
    scheme: Scheme
    object_id: bytes
    original_length: int
    payload: bytes
    key_share: bytes = b""

    def __post_init__(self):
        if not 1 <= self.index <= self.params.n:
            raise ParameterError(f"share index {self.index} outside [1, {self.params.n}]")
        if len(self.object_id) != OBJECT_ID_LEN:
            raise ParameterError("object_id must be 16 bytes")
        if self.original_length < 0:
            raise ParameterError("original_length must be non-negative")


def object_digest(data: bytes) -> bytes:
    """Object identity: SHA-256 of the plaintext truncated to 16 bytes."""
    return hashlib.sha256(data).digest()[:OBJECT_ID_LEN]


def check_family(shares: Iterable[Share], scheme: Scheme | None = None) -> list[Share]:
    """Validate that ``shares`` belong to one family; return them sorted by index.

    Raises InsufficientSharesError when fewer than ``k`` are present and
    InconsistentSharesError on mixed headers or repeated indices.
    """
    shares = sorted(shares, key=lambda s: s.index)
    if not shares:
        raise InsufficientSharesError("no shares given")
    first = shares[0]
    for s in shares[1:]:
        if s.object_id != first.object_id:
            raise InconsistentSharesError("shares come from different objects")
        if s.params != first.params or s.scheme != first.scheme:
            raise InconsistentSharesError("shares disagree on scheme or (k, n)")
        if s.original_length != first.original_length:
            raise InconsistentSharesError("shares disagree on original length")
    if scheme is not None and first.scheme != scheme:
        raise InconsistentSharesError(f"expected {scheme.label} shares, got {first.scheme.label}")
    indices = [s.index for s in shares]
    if len(set(indices)) != len(indices):
        raise InconsistentSharesError("duplicate share indices")
    if len(shares) < first.params.k:
        raise InsufficientSharesError(f"need {first.params.k} shares, got {len(shares)}")
    return shares


def equal_payload_lengths(shares: Sequence[Share]) -> int:
    lengths = {len(s.payload) for s in shares}
    if len(lengths) != 1:
        raise InconsistentSharesError("payload lengths differ within the family")
    return lengths.pop()
