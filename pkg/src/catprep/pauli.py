"""Signed multi-qubit Pauli operators in binary (X-bit / Z-bit) form."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}


@dataclass(frozen=True)
class PauliString:
    """A signed Pauli operator on ``n`` qubits.

    The operator is ``sign * prod_i P_i`` where ``P_i`` is I, X, Y or Z
    depending on the bits ``(x_bits[i], z_bits[i])``.  Only real signs are
    representable; ±i phases never appear in externally visible operators.
    """

    n: int
    x_bits: np.ndarray = field(repr=False)
    z_bits: np.ndarray = field(repr=False)
    sign: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("PauliString needs at least one qubit")
        if self.sign not in (+1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        x = np.ascontiguousarray(self.x_bits, dtype=np.uint8) & 1
        z = np.ascontiguousarray(self.z_bits, dtype=np.uint8) & 1
        if x.shape != (self.n,) or z.shape != (self.n,):
            raise ValueError("bit vectors must have length n")
        object.__setattr__(self, "x_bits", x)
        object.__setattr__(self, "z_bits", z)

    @classmethod
    def from_label(cls, label: str, sign: int = 1) -> "PauliString":
        """Build from a character string like ``"ZIZ"`` (qubit 0 first)."""
        bits = [_CHAR_TO_BITS[c] for c in label]
        x = np.array([b[0] for b in bits], dtype=np.uint8)
        z = np.array([b[1] for b in bits], dtype=np.uint8)
        return cls(len(label), x, z, sign)

    @classmethod
    def from_sites(cls, n: int, sites, kind: str, sign: int = 1) -> "PauliString":
        """Place the single-letter Pauli ``kind`` on each of ``sites``."""
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        xb, zb = _CHAR_TO_BITS[kind]
        sites = np.asarray(list(sites), dtype=np.intp)
        if sites.size and (sites.min() < 0 or sites.max() >= n):
            raise ValueError("site out of range")
        x[sites] = xb
        z[sites] = zb
        return cls(n, x, z, sign)

    @property
    def weight(self) -> int:
        """Number of sites with a non-identity factor."""
        return int(np.count_nonzero(self.x_bits | self.z_bits))

    def is_identity(self) -> bool:
        return self.weight == 0

    def label(self) -> str:
        chars = "".join(
            _BITS_TO_CHAR[(int(x), int(z))]
            for x, z in zip(self.x_bits, self.z_bits)
        )
        return ("+" if self.sign > 0 else "-") + chars

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        anti = (self.x_bits & other.z_bits) ^ (self.z_bits & other.x_bits)
        return int(anti.sum()) % 2 == 0

    def __str__(self) -> str:
        return self.label()


def zz_pair(n: int, a: int, b: int, sign: int = 1) -> PauliString:
    """Z_a Z_b on ``n`` qubits."""
    return PauliString.from_sites(n, (a, b), "Z", sign)


def yy_pair(n: int, a: int, b: int, sign: int = 1) -> PauliString:
    """Y_a Y_b on ``n`` qubits."""
    return PauliString.from_sites(n, (a, b), "Y", sign)


def x_parity(n: int, sites, sign: int = 1) -> PauliString:
    """Product of X over ``sites``."""
    return PauliString.from_sites(n, sites, "X", sign)
