"""Stabilizer-state engine in the Aaronson-Gottesman tableau form.

State is tracked as 2n signed Pauli generators (n destabilizers, then n
stabilizers).  The bit planes are stored site-major, ``x[site, row]``, so a
batched gate sublayer touches contiguous rows and runs in a handful of
whole-array operations; generator-level row arithmetic (measurements) works
on strided columns, which stay cheap because few generators anticommute
with a local measurement.

Phases: generator phases live in {0, 1, 2, 3} encoding i^phase.  Valid
stabilizer rows always carry 0 or 2 (signs +/-).  Destabilizer phases are
not maintained through measurements; nothing observable reads them.
"""

from __future__ import annotations

import enum

import numpy as np

from .gf2 import rank_gf2
from .pauli import PauliString

LOG2 = float(np.log(2.0))


class Basis(enum.Enum):
    """Product-state initializations."""

    MINUS_X = "minus_x"   # |-> everywhere, stabilizers -X_i
    PLUS_X = "plus_x"     # |+> everywhere, stabilizers +X_i
    ZERO_Z = "zero_z"     # |0> everywhere, stabilizers +Z_i


class Tableau:
    """Stabilizer/destabilizer tableau for an ``n``-qubit pure state."""

    def __init__(self, n: int, basis: Basis = Basis.ZERO_Z):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.x = np.zeros((n, 2 * n), dtype=np.uint8)
        self.z = np.zeros((n, 2 * n), dtype=np.uint8)
        self.phase = np.zeros(2 * n, dtype=np.uint8)
        idx = np.arange(n)
        if basis is Basis.ZERO_Z:
            self.x[idx, idx] = 1            # destabilizers X_i
            self.z[idx, n + idx] = 1        # stabilizers +Z_i
        else:
            self.z[idx, idx] = 1            # destabilizers Z_i
            self.x[idx, n + idx] = 1        # stabilizers (+/-)X_i
            if basis is Basis.MINUS_X:
                self.phase[n + idx] = 2

    # ------------------------------------------------------------------
    # construction / bookkeeping

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.phase = self.phase.copy()
        return t

    def stabilizer_labels(self) -> list[str]:
        return [self._row_label(self.n + i) for i in range(self.n)]

    def _row_label(self, r: int) -> str:
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[int(self.phase[r]) & 3]
        chars = "IXZY"  # index x + 2z
        body = "".join(chars[int(xi) + 2 * int(zi)]
                       for xi, zi in zip(self.x[:, r], self.z[:, r]))
        return sign + body

    def validate(self) -> None:
        """Assert tableau invariants (on-demand check, not a hot path)."""
        n = self.n
        sx = self.x[:, n:].T.astype(np.int64)
        sz = self.z[:, n:].T.astype(np.int64)
        sym = (sx @ sz.T + sz @ sx.T) % 2
        if np.any(sym):
            raise AssertionError("stabilizer rows do not all commute")
        if rank_gf2(np.concatenate([self.x[:, n:].T, self.z[:, n:].T], axis=1)) != n:
            raise AssertionError("stabilizer rows not independent")
        dx = self.x[:, :n].T.astype(np.int64)
        dz = self.z[:, :n].T.astype(np.int64)
        pairing = (dx @ sz.T + dz @ sx.T) % 2
        if not np.array_equal(pairing, np.eye(n, dtype=np.int64)):
            raise AssertionError("destabilizer pairing broken")
        if np.any(self.phase[n:] & 1):
            raise AssertionError("stabilizer row with imaginary phase")

    # ------------------------------------------------------------------
    # elementary gates (site-row operations over all 2n generators)

    def apply_h(self, q: int) -> None:
        self._check_site(q)
        xq = self.x[q]
        zq = self.z[q]
        self.phase = (self.phase + 2 * (xq & zq)) & 3
        tmp = xq.copy()
        self.x[q] = zq
        self.z[q] = tmp

    def apply_s(self, q: int) -> None:
        self._check_site(q)
        xq = self.x[q]
        zq = self.z[q]
        self.phase = (self.phase + 2 * (xq & zq)) & 3
        self.z[q] = zq ^ xq

    def apply_cx(self, control: int, target: int) -> None:
        self._check_site(control)
        self._check_site(target)
        if control == target:
            raise ValueError("CX sites must be distinct")
        xc = self.x[control]
        zc = self.z[control]
        xt = self.x[target]
        zt = self.z[target]
        self.phase = (self.phase + 2 * (xc & zt & (xt ^ zc ^ 1))) & 3
        self.x[target] = xt ^ xc
        self.z[control] = zc ^ zt

    def apply_gate(self, gate: str, sites) -> None:
        """Apply a named Clifford generator: ``"H"``, ``"S"`` or ``"CX"``."""
        if gate == "H":
            (q,) = sites
            self.apply_h(q)
        elif gate == "S":
            (q,) = sites
            self.apply_s(q)
        elif gate == "CX":
            a, b = sites
            self.apply_cx(a, b)
        else:
            raise ValueError(f"unknown gate {gate!r}")

    def apply_x(self, q: int) -> None:
        """Pauli X flip (conjugation flips signs of rows with Z at q)."""
        self._check_site(q)
        self.phase = (self.phase + 2 * self.z[q]) & 3

    # ------------------------------------------------------------------
    # two-site rotations

    def apply_zz_rotation(self, a: int, b: int) -> None:
        """Conjugate by exp(-i pi/4 Z_a Z_b) via H_a CX_{ba} H_a S_a S_b."""
        if a == b:
            raise ValueError("rotation sites must be distinct")
        self.apply_s(b)
        self.apply_s(a)
        self.apply_h(a)
        self.apply_cx(b, a)
        self.apply_h(a)

    def apply_xx_rotation(self, a: int, b: int) -> None:
        """Conjugate by exp(-i pi/4 X_a X_b) via H_a H_b S_b H_b CX_{ab} S_a H_a."""
        if a == b:
            raise ValueError("rotation sites must be distinct")
        self.apply_h(a)
        self.apply_s(a)
        self.apply_cx(a, b)
        self.apply_h(b)
        self.apply_s(b)
        self.apply_h(b)
        self.apply_h(a)

    def apply_zz_pairs(self, a_sites: np.ndarray, b_sites: np.ndarray) -> None:
        """exp(-i pi/4 Z_a Z_b) on each disjoint pair (a_k, b_k), batched.

        Bit action per pair: z_a ^= x_a^x_b, z_b ^= x_a^x_b; a generator's
        sign flips once per pair holding Y on one site and I or Z on the
        other.
        """
        if len(a_sites) == 0:
            return
        xa = self.x[a_sites]
        xb = self.x[b_sites]
        za = self.z[a_sites]
        zb = self.z[b_sites]
        t = xa ^ xb
        flip = np.bitwise_xor.reduce(
            (xa & za & (1 ^ xb)) ^ (xb & zb & (1 ^ xa)), axis=0)
        self.z[a_sites] = za ^ t
        self.z[b_sites] = zb ^ t
        self.phase = (self.phase + 2 * flip) & 3

    def apply_xx_pairs(self, a_sites: np.ndarray, b_sites: np.ndarray) -> None:
        """exp(-i pi/4 X_a X_b) on each disjoint pair (a_k, b_k), batched."""
        if len(a_sites) == 0:
            return
        xa = self.x[a_sites]
        xb = self.x[b_sites]
        za = self.z[a_sites]
        zb = self.z[b_sites]
        t = za ^ zb
        flip = np.bitwise_xor.reduce(
            (za & (1 ^ xa) & (1 ^ zb)) ^ (zb & (1 ^ xb) & (1 ^ za)), axis=0)
        self.x[a_sites] = xa ^ t
        self.x[b_sites] = xb ^ t
        self.phase = (self.phase + 2 * flip) & 3

    # ------------------------------------------------------------------
    # measurement and expectation

    def _anticommute_bits(self, p: PauliString) -> np.ndarray:
        """Per-generator anticommutation bit with p (restricted to support)."""
        sup = np.nonzero(p.x_bits | p.z_bits)[0]
        xs = self.x[sup]
        zs = self.z[sup]
        return np.bitwise_xor.reduce(
            (xs & p.z_bits[sup, None]) ^ (zs & p.x_bits[sup, None]), axis=0)

    def measure_pauli(self, p: PauliString, rng) -> tuple[int, bool]:
        """Projectively measure the Pauli operator ``p``.

        Returns ``(outcome, was_deterministic)``.  Deterministic means p (up
        to sign) already lies in the stabilizer group; the state is then
        unchanged.  Otherwise the outcome is a fair coin from ``rng`` and p
        joins the group with the measured sign.
        """
        self._check_pauli(p)
        n = self.n
        anti = self._anticommute_bits(p)
        stab_anti = np.nonzero(anti[n:])[0]
        p_phase = 0 if p.sign > 0 else 2
        if stab_anti.size == 0:
            sign = self._group_sign(p, anti)
            return (sign * p.sign, True)

        pivot = n + int(stab_anti[0])
        targets = np.nonzero(anti)[0]
        targets = targets[targets != pivot]
        if targets.size:
            stab_targets = targets[targets >= n]
            if stab_targets.size:
                self.phase[stab_targets] = (
                    self.phase[stab_targets]
                    + self.phase[pivot]
                    + _product_phase(self.x[:, pivot], self.z[:, pivot],
                                     self.x[:, stab_targets], self.z[:, stab_targets])
                ) & 3
            self.x[:, targets] ^= self.x[:, pivot:pivot + 1]
            self.z[:, targets] ^= self.z[:, pivot:pivot + 1]

        # old pivot stabilizer becomes the paired destabilizer
        self.x[:, pivot - n] = self.x[:, pivot]
        self.z[:, pivot - n] = self.z[:, pivot]
        # fair bit; drawn as a uniform so dense and tableau backends consume
        # their shared stream identically
        outcome = 1 if rng.random() < 0.5 else -1
        self.x[:, pivot] = p.x_bits
        self.z[:, pivot] = p.z_bits
        self.phase[pivot] = (p_phase + (0 if outcome == 1 else 2)) & 3
        return (outcome, False)

    def measure_x_site(self, site: int, rng) -> tuple[int, bool]:
        """Single-site X measurement, the protocol hot path.

        Same contract as :meth:`measure_pauli` with p = X_site; skips the
        generic support machinery since the anticommutation pattern is just
        the site's Z bit row.
        """
        self._check_site(site)
        n = self.n
        anti = self.z[site]
        stab_anti = np.nonzero(anti[n:])[0]
        if stab_anti.size == 0:
            return (self._group_sign_x_site(site, anti), True)

        pivot = n + int(stab_anti[0])
        targets = np.nonzero(anti)[0]
        targets = targets[targets != pivot]
        if targets.size:
            stab_targets = targets[targets >= n]
            if stab_targets.size:
                self.phase[stab_targets] = (
                    self.phase[stab_targets]
                    + self.phase[pivot]
                    + _product_phase(self.x[:, pivot], self.z[:, pivot],
                                     self.x[:, stab_targets], self.z[:, stab_targets])
                ) & 3
            self.x[:, targets] ^= self.x[:, pivot:pivot + 1]
            self.z[:, targets] ^= self.z[:, pivot:pivot + 1]

        self.x[:, pivot - n] = self.x[:, pivot]
        self.z[:, pivot - n] = self.z[:, pivot]
        outcome = 1 if rng.random() < 0.5 else -1
        self.x[:, pivot] = 0
        self.z[:, pivot] = 0
        self.x[site, pivot] = 1
        self.phase[pivot] = 0 if outcome == 1 else 2
        return (outcome, False)

    def _group_sign_x_site(self, site: int, anti: np.ndarray) -> int:
        """Deterministic X_site outcome via the destabilizer decomposition."""
        n = self.n
        rows = n + np.nonzero(anti[:n])[0]
        xs = self.x[:, rows]
        zs = self.z[:, rows]
        e = int(self.phase[rows].sum()) + int(np.count_nonzero(xs & zs))
        if rows.size > 1:
            zprefix = np.bitwise_xor.accumulate(zs, axis=1)[:, :-1]
            e += 2 * int(np.bitwise_xor.reduce(xs[:, 1:] & zprefix, axis=None))
        e &= 3
        return 1 if e == 0 else -1

    def expectation(self, p: PauliString) -> int:
        """<p> for a stabilizer state: +1, -1, or 0.  Never mutates."""
        self._check_pauli(p)
        anti = self._anticommute_bits(p)
        if np.any(anti[self.n:]):
            return 0
        return self._group_sign(p, anti) * p.sign

    def _group_sign(self, p: PauliString, anti: np.ndarray) -> int:
        """Sign s with s*p in the stabilizer group, given p commutes with it.

        The stabilizer factors of p are indexed by the destabilizers that
        anticommute with p; the factors pairwise commute, so the product
        phase reduces to per-site Y counts plus a Z-past-X crossing parity.
        """
        n = self.n
        j = np.nonzero(anti[:n])[0]
        if j.size == 0:
            # identity is excluded by _check_pauli, so this cannot happen
            raise AssertionError("no stabilizer decomposition found")
        rows = n + j
        xs = self.x[:, rows]
        zs = self.z[:, rows]
        xtot = np.bitwise_xor.reduce(xs, axis=1)
        ztot = np.bitwise_xor.reduce(zs, axis=1)
        if not (np.array_equal(xtot, p.x_bits) and np.array_equal(ztot, p.z_bits)):
            raise AssertionError("stabilizer decomposition mismatch")
        e = int(self.phase[rows].sum()) + int(np.count_nonzero(xs & zs))
        if j.size > 1:
            zprefix = np.bitwise_xor.accumulate(zs, axis=1)[:, :-1]
            e += 2 * int(np.bitwise_xor.reduce(xs[:, 1:] & zprefix, axis=None))
        e -= int(np.count_nonzero(xtot & ztot))
        e &= 3
        if e not in (0, 2):
            raise AssertionError("group element with imaginary phase")
        return 1 if e == 0 else -1

    # ------------------------------------------------------------------
    # entanglement observables

    def entanglement_entropy(self, region) -> float:
        """Von Neumann entropy of ``region`` in nats: (rank - |A|) log 2."""
        region = np.asarray(sorted(set(int(s) for s in region)), dtype=np.intp)
        if region.size == 0:
            return 0.0
        if region.min() < 0 or region.max() >= self.n:
            raise ValueError("region site out of range")
        n = self.n
        block = np.concatenate(
            [self.x[region, n:].T, self.z[region, n:].T], axis=1)
        r = rank_gf2(np.ascontiguousarray(block))
        return (r - region.size) * LOG2

    def mutual_information_2(self, a, b) -> float:
        """I2(A:B) = S_A + S_B - S_AB for disjoint regions."""
        a = set(int(s) for s in a)
        b = set(int(s) for s in b)
        if a & b:
            raise ValueError("regions overlap")
        return (self.entanglement_entropy(a) + self.entanglement_entropy(b)
                - self.entanglement_entropy(a | b))

    def mutual_information_3(self, a, b, c) -> float:
        """I3(A:B:C), the tripartite mutual information."""
        a = set(int(s) for s in a)
        b = set(int(s) for s in b)
        c = set(int(s) for s in c)
        if (a & b) or (a & c) or (b & c):
            raise ValueError("regions overlap")
        s = self.entanglement_entropy
        return (s(a) + s(b) + s(c)
                - s(a | b) - s(b | c) - s(a | c)
                + s(a | b | c))

    # ------------------------------------------------------------------

    def _check_site(self, q: int) -> None:
        if not 0 <= q < self.n:
            raise ValueError(f"site {q} out of range for n={self.n}")

    def _check_pauli(self, p: PauliString) -> None:
        if p.n != self.n:
            raise ValueError("operator size does not match state")
        if p.is_identity():
            raise ValueError("identity operator rejected")


def _product_phase(x1: np.ndarray, z1: np.ndarray,
                   x2: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """Mod-4 exponent of i from multiplying Pauli column 1 into column(s) 2.

    Cyclic products (XY, YZ, ZX) contribute +1 each, anticyclic -1; the
    result is summed over sites.  Column 2 may be a (sites, k) matrix.
    """
    if x2.ndim == 2:
        x1 = x1[:, None]
        z1 = z1[:, None]
    nx1 = 1 ^ x1
    nz1 = 1 ^ z1
    nx2 = 1 ^ x2
    nz2 = 1 ^ z2
    plus = ((x1 & nz1) & (x2 & z2)) | ((x1 & z1) & (nx2 & z2)) | ((nx1 & z1) & (x2 & nz2))
    minus = ((x1 & nz1) & (nx2 & z2)) | ((x1 & z1) & (x2 & nz2)) | ((nx1 & z1) & (x2 & z2))
    if x2.ndim == 1:
        return (int(plus.sum()) - int(minus.sum())) & 3
    return (plus.sum(axis=0, dtype=np.int64)
            - minus.sum(axis=0, dtype=np.int64)) & 3


def new_product_state(n: int, basis: Basis | str) -> Tableau:
    """Fresh product state; ``basis`` may be a Basis or its string value."""
    if isinstance(basis, str):
        basis = Basis(basis)
    return Tableau(n, basis)
