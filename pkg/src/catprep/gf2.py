"""GF(2) linear algebra on bit matrices.

Rank computation packs rows into machine words (uint64) so row elimination
runs at memory speed; this is the inner loop of every entanglement-entropy
evaluation.
"""

from __future__ import annotations

import numpy as np


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 uint8 matrix into (rows, words) uint64.

    Bit ``j`` of a row lives at word ``j // 64``, bit position ``j % 64``.
    """
    if bits.ndim != 2:
        raise ValueError("expected a 2-D bit matrix")
    by = np.packbits(bits, axis=1, bitorder="little")
    pad = (-by.shape[1]) % 8
    if pad:
        by = np.pad(by, ((0, 0), (0, pad)))
    return np.ascontiguousarray(by).view(np.uint64)


def rank_gf2(bits: np.ndarray, ncols: int | None = None) -> int:
    """GF(2) rank of a 0/1 matrix via in-place elimination on a packed copy."""
    m, c = bits.shape
    if ncols is None:
        ncols = c
    if m == 0 or ncols == 0:
        return 0
    w = pack_rows(bits)
    one = np.uint64(1)
    r = 0
    for col in range(ncols):
        wi, ki = divmod(col, 64)
        colbits = (w[r:, wi] >> np.uint64(ki)) & one
        nz = np.nonzero(colbits)[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            w[[r, p]] = w[[p, r]]
        if nz.size > 1:
            w[r + nz[1:]] ^= w[r]
        r += 1
        if r == m:
            break
    return r


class BitBasis:
    """Incremental GF(2) row basis over Python big-ints.

    Suited to small spaces (tens of bits): coin-toss deduction, detector
    closure checks.  Vectors are ints with bit ``i`` = coordinate ``i``.
    """

    def __init__(self):
        self._rows: dict[int, int] = {}  # highest set bit -> reduced row

    def _reduce(self, v: int) -> int:
        while v:
            h = v.bit_length() - 1
            row = self._rows.get(h)
            if row is None:
                return v
            v ^= row
        return 0

    def add(self, v: int) -> bool:
        """Insert ``v``; return True if it enlarged the span."""
        v = self._reduce(v)
        if v == 0:
            return False
        self._rows[v.bit_length() - 1] = v
        return True

    def contains(self, v: int) -> bool:
        return self._reduce(v) == 0

    @property
    def rank(self) -> int:
        return len(self._rows)


def vector_from_sites(sites) -> int:
    """Indicator int with bits set at ``sites``."""
    v = 0
    for s in sites:
        v |= 1 << int(s)
    return v
