"""``.dgsh`` share files and the JSON manifest tying a family together.

Header layout, big-endian, 36 bytes::

    magic "DGSH" | version | scheme | k | n | index | reserved=0
    object_id (16) | original_length (u64) | key_share_len (u16)

followed by ``key_share_len`` key-share bytes and then the payload.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

from .erasure_coding import KEY_LEN, stripe_length
from .errors import FormatError
from .share import Scheme, Share, ShareParams

MAGIC = b"DGSH"
VERSION = 1
HEADER = struct.Struct(">4sBBBBBB16sQH")
HEADER_LEN = HEADER.size
EXTENSION = ".dgsh"


def write_share(share: Share) -> bytes:
    expected_key = KEY_LEN if share.scheme == Scheme.RS_SEALED else 0
    if len(share.key_share) != expected_key:
        raise FormatError("key_share_len", f"{share.scheme.label} shares carry {expected_key} key bytes")
    header = HEADER.pack(MAGIC, VERSION, int(share.scheme), share.params.k, share.params.n,
                         share.index, 0, share.object_id, share.original_length, len(share.key_share))
    return header + share.key_share + share.payload


def read_share(data: bytes) -> Share:
    if len(data) < HEADER_LEN:
        raise FormatError("header", f"truncated: {len(data)} < {HEADER_LEN} bytes")
    magic, version, scheme, k, n, index, reserved, oid, length, ks_len = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError("magic", f"expected {MAGIC!r}, got {magic!r}")
    if version != VERSION:
        raise FormatError("version", f"unsupported version {version}")
    try:
        scheme = Scheme(scheme)
    except ValueError:
        raise FormatError("scheme", f"unknown scheme code {scheme}") from None
    if k == 0:
        raise FormatError("k", "threshold must be at least 1")
    if n < k:
        raise FormatError("n", f"n={n} < k={k}")
    if not 1 <= index <= n:
        raise FormatError("index", f"index {index} outside [1, {n}]")
    if reserved != 0:
        raise FormatError("reserved", "reserved byte must be zero")
    expected_key = KEY_LEN if scheme == Scheme.RS_SEALED else 0
    if ks_len != expected_key:
        raise FormatError("key_share_len", f"{scheme.label} shares carry {expected_key} key bytes, header says {ks_len}")
    if len(data) < HEADER_LEN + ks_len:
        raise FormatError("key_share", "truncated key share")
    key_share = bytes(data[HEADER_LEN:HEADER_LEN + ks_len])
    payload = bytes(data[HEADER_LEN + ks_len:])
    if length == 0:
        raise FormatError("original_length", "empty objects are not stored")
    if scheme == Scheme.SHAMIR:
        if len(payload) != length:
            raise FormatError("original_length", f"shamir payload is {len(payload)} bytes, header says {length}")
    elif scheme == Scheme.FRAGMENT:
        if k != n:
            raise FormatError("k", "fragment families need every piece (k == n)")
        if not 1 <= len(payload) <= length:
            raise FormatError("original_length", "fragment longer than its object")
    elif len(payload) != stripe_length(length, k):
        raise FormatError("original_length", f"coded payload is {len(payload)} bytes, expected ceil({length}/{k})")
    return Share(params=ShareParams(k, n), index=index, scheme=scheme, object_id=bytes(oid),
                 original_length=length, payload=payload, key_share=key_share)


def share_filename(stem: str, index: int) -> str:
    return f"{stem}.{index}{EXTENSION}"


def save_share(path: str | Path, share: Share) -> None:
    Path(path).write_bytes(write_share(share))


def load_share(path: str | Path) -> Share:
    return read_share(Path(path).read_bytes())


@dataclass(frozen=True)
class Manifest:
    object_id: bytes
    scheme: Scheme
    k: int
    n: int
    shares: tuple[str, ...]

    def to_json(self) -> str:
        doc = {
            "object_id": self.object_id.hex(),
            "scheme": self.scheme.label,
            "k": self.k,
            "n": self.n,
            "shares": list(self.shares),
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Manifest":
        try:
            doc = json.loads(text)
            return cls(
                object_id=bytes.fromhex(doc["object_id"]),
                scheme=Scheme[doc["scheme"].upper()],
                k=int(doc["k"]),
                n=int(doc["n"]),
                shares=tuple(doc["shares"]),
            )
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise FormatError("manifest", str(exc)) from None
