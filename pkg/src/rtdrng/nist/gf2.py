"""GF(2) kernels: LFSR linear complexity and binary matrix rank."""

from __future__ import annotations

import numpy as np


def berlekamp_massey(bits) -> int:
    """Length of the shortest LFSR generating the sequence over GF(2).

    Connection polynomials live in Python ints (bit i = coefficient of
    x^i); the discrepancy at step t is the parity of poly AND window, where
    the window holds the sequence reversed so bit i is s[t - i].
    """
    if hasattr(bits, "tolist"):
        seq = bits.tolist()
    else:
        seq = list(bits)
    if not seq:
        raise ValueError("sequence must be nonempty")
    poly = 1
    prev = 1
    length = 0
    last_change = -1
    window = 0
    for t, s in enumerate(seq):
        window = (window << 1) | int(s)
        if (poly & window).bit_count() & 1:
            backup = poly
            poly ^= prev << (t - last_change)
            if 2 * length <= t:
                length = t + 1 - length
                prev = backup
                last_change = t
    return length


def gf2_rank(matrix) -> int:
    """Rank of a 0/1 matrix over GF(2) by elimination on int-packed rows."""
    m = np.asarray(matrix, dtype=np.uint8)
    if m.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    ncols = m.shape[1]
    pad = (-ncols) % 8
    pivots: dict[int, int] = {}
    for packed in np.packbits(m, axis=1):
        row = int.from_bytes(packed.tobytes(), "big") >> pad
        while row:
            top = row.bit_length() - 1
            if top in pivots:
                row ^= pivots[top]
            else:
                pivots[top] = row
                break
    return len(pivots)


__all__ = ["berlekamp_massey", "gf2_rank"]
