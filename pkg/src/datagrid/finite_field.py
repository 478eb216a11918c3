"""GF(2^8) arithmetic modulo x^8 + x^4 + x^3 + x + 1 (0x11b).

Scalar helpers work on Python ints; the ``MUL`` table lets callers do
vectorised products as ``MUL[c][array]`` on uint8 numpy arrays.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import DomainError

POLY = 0x11B
GENERATOR = 0x03  # 0x02 is not primitive for 0x11b


def _xtime_mul(a: int, b: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        if a & 0x100:
            a ^= POLY
        b >>= 1
    return r


def _build_tables():
    exp = [0] * 510
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x = _xtime_mul(x, GENERATOR)
    for i in range(255, 510):
        exp[i] = exp[i - 255]
    return exp, log


EXP, LOG = _build_tables()

MUL = np.zeros((256, 256), dtype=np.uint8)
for _a in range(1, 256):
    for _b in range(1, 256):
        MUL[_a, _b] = EXP[LOG[_a] + LOG[_b]]
del _a, _b

INV = np.zeros(256, dtype=np.uint8)
INV[1:] = [EXP[255 - LOG[a]] for a in range(1, 256)]


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def gf_inv(a: int) -> int:
    if a == 0:
        raise DomainError("zero has no multiplicative inverse in GF(256)")
    return EXP[255 - LOG[a]]


def gf_div(a: int, b: int) -> int:
    return gf_mul(a, gf_inv(b))


def gf_pow(a: int, e: int) -> int:
    if e == 0:
        return 1
    if a == 0:
        return 0
    return EXP[(LOG[a] * e) % 255]


def poly_eval(coeffs: Sequence[int], x: int) -> int:
    """Horner evaluation; ``coeffs[0]`` is the constant term."""
    if len(coeffs) == 0:
        raise DomainError("cannot evaluate an empty polynomial")
    acc = 0
    for c in reversed(coeffs):
        acc = gf_mul(acc, x) ^ c
    return acc


def mat_inv(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Gauss-Jordan inverse of a square matrix over GF(256)."""
    size = len(rows)
    aug = [list(r) + [int(i == j) for j in range(size)] for i, r in enumerate(rows)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col]), None)
        if pivot is None:
            raise DomainError("matrix is singular over GF(256)")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = gf_inv(aug[col][col])
        aug[col] = [gf_mul(v, inv_p) for v in aug[col]]
        for r in range(size):
            f = aug[r][col]
            if r != col and f:
                aug[r] = [v ^ gf_mul(f, p) for v, p in zip(aug[r], aug[col])]
    return [row[size:] for row in aug]


def mat_apply(matrix: Sequence[Sequence[int]], vectors: np.ndarray) -> np.ndarray:
    """Multiply ``matrix`` (r x c) by ``vectors`` (c x L uint8) bytewise."""
    out = np.zeros((len(matrix), vectors.shape[1]), dtype=np.uint8)
    for i, row in enumerate(matrix):
        acc = out[i]
        for c, v in zip(row, vectors):
            if c:
                acc ^= MUL[c][v]
    return out
