"""Byte-range fragmentation and the completeness / disjointness checks."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

from .errors import IncompletenessError, InconsistentSharesError, SchemeError
from .share import MAX_SHARES, Scheme, Share, ShareParams, object_digest


@dataclass(frozen=True)
class FragmentationScheme:
    object_length: int
    ranges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "ranges", tuple((int(a), int(b)) for a, b in self.ranges))
        if self.object_length < 0:
            raise SchemeError("object length must be non-negative")
        for start, end in self.ranges:
            if not 0 <= start < end <= self.object_length:
                raise SchemeError(f"range [{start},{end}) empty or outside [0,{self.object_length})")

    @classmethod
    def even(cls, object_length: int, pieces: int) -> "FragmentationScheme":
        """``pieces`` contiguous ranges whose sizes differ by at most one byte."""
        if not 1 <= pieces <= object_length:
            raise SchemeError(f"cannot cut {object_length} bytes into {pieces} nonempty pieces")
        base, extra = divmod(object_length, pieces)
        ranges, start = [], 0
        for i in range(pieces):
            end = start + base + (i < extra)
            ranges.append((start, end))
            start = end
        return cls(object_length, tuple(ranges))


@dataclass(frozen=True)
class SchemeReport:
    completeness: bool
    disjointness: bool

    @property
    def ok(self) -> bool:
        return self.completeness and self.disjointness


def check_scheme(scheme: FragmentationScheme) -> SchemeReport:
    ordered = sorted(scheme.ranges)
    disjoint = all(a_end <= b_start for (_, a_end), (b_start, _) in zip(ordered, ordered[1:]))
    covered = 0
    for start, end in ordered:
        if start > covered:
            break
        covered = max(covered, end)
    return SchemeReport(completeness=covered >= scheme.object_length, disjointness=disjoint)


def fragment(obj: bytes, scheme: FragmentationScheme) -> list[Share]:
    """Cut ``obj`` along ``scheme``.

    Fragment ``i`` is the i-th range in ascending offset order, so the
    index alone tells reassembly where the bytes go.
    """
    if scheme.object_length != len(obj):
        raise SchemeError(f"scheme is for {scheme.object_length} bytes, object has {len(obj)}")
    report = check_scheme(scheme)
    if not report.ok or not scheme.ranges:
        raise SchemeError(f"scheme is not a valid fragmentation: {report}")
    if len(scheme.ranges) > MAX_SHARES:
        raise SchemeError(f"at most {MAX_SHARES} fragments")
    count = len(scheme.ranges)
    params = ShareParams(count, count)
    oid = object_digest(obj)
    return [
        Share(params=params, index=i, scheme=Scheme.FRAGMENT, object_id=oid,
              original_length=len(obj), payload=obj[start:end])
        for i, (start, end) in enumerate(sorted(scheme.ranges), start=1)
    ]


def reassemble(fragments: Iterable[Share]) -> bytes:
    by_index: dict[int, Share] = {}
    first = None
    for f in fragments:
        if f.scheme != Scheme.FRAGMENT:
            raise InconsistentSharesError(f"not a fragment: {f.scheme.label}")
        if first is None:
            first = f
        elif (f.object_id, f.params, f.original_length) != (first.object_id, first.params, first.original_length):
            raise InconsistentSharesError("fragments come from different objects")
        seen = by_index.setdefault(f.index, f)
        if seen.payload != f.payload:
            raise InconsistentSharesError(f"conflicting payloads for fragment {f.index}")
    if first is None:
        raise IncompletenessError("no fragments given")
    missing = sorted(set(range(1, first.params.n + 1)) - by_index.keys())
    if missing:
        raise IncompletenessError(f"missing fragments {missing}")
    data = b"".join(by_index[i].payload for i in range(1, first.params.n + 1))
    if len(data) != first.original_length:
        raise IncompletenessError("fragments do not cover the object exactly")
    return data

