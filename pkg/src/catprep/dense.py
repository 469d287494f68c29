"""Exact state-vector backend.

Used for non-Clifford evolution (timing parameter != 1, transverse field)
and as the brute-force oracle for the tableau engine.  Qubit ``q`` occupies
bit ``n - 1 - q`` of the amplitude index, so ``amps.reshape([2] * n)`` puts
qubit ``q`` on axis ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .pauli import PauliString

MAX_DENSE_QUBITS = 20
_NORM_TOL = 1e-10


class IntegratorError(RuntimeError):
    """Raised when step-halving verification of the propagator fails."""


def _site_mask(n: int, bits: np.ndarray) -> int:
    """Index bitmask for the sites flagged in ``bits`` (qubit q = bit n-1-q)."""
    mask = 0
    for q in np.nonzero(bits)[0]:
        mask |= 1 << (n - 1 - int(q))
    return mask


class StateVector:
    """Normalized pure state of up to 20 qubits."""

    def __init__(self, n: int, amps: np.ndarray | None = None):
        if not 1 <= n <= MAX_DENSE_QUBITS:
            raise ValueError(f"dense backend supports 1..{MAX_DENSE_QUBITS} qubits")
        self.n = n
        if amps is None:
            amps = np.zeros(2**n, dtype=np.complex128)
            amps[0] = 1.0
        else:
            amps = np.asarray(amps, dtype=np.complex128).reshape(2**n).copy()
        self.amps = amps
        self._check_norm()

    @classmethod
    def product_x(cls, n: int, sign: int = -1) -> "StateVector":
        """|+>^n or |->^n (sign = +1 / -1)."""
        idx = np.arange(2**n)
        amps = np.full(2**n, 2.0 ** (-n / 2), dtype=np.complex128)
        if sign < 0:
            amps *= (-1.0) ** (np.bitwise_count(idx) & 1)
        return cls(n, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps)

    def _bit(self, q: int) -> np.ndarray:
        idx = np.arange(2**self.n)
        return (idx >> (self.n - 1 - q)) & 1

    def _check_norm(self) -> None:
        nrm = float(np.vdot(self.amps, self.amps).real)
        if abs(nrm - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm deviates from 1 by {abs(nrm - 1.0):.2e}")

    # ------------------------------------------------------------------
    # Pauli action

    def _pauli_apply(self, p: PauliString) -> np.ndarray:
        """Return P|psi> as a fresh amplitude array."""
        if p.n != self.n:
            raise ValueError("operator size does not match state")
        n = self.n
        xmask = _site_mask(n, p.x_bits)
        zmask = _site_mask(n, p.z_bits)
        ny = int(np.count_nonzero(p.x_bits & p.z_bits))
        idx = np.arange(2**n)
        par = np.bitwise_count(idx & zmask) & 1
        coef = p.sign * (1j**ny) * (-1.0) ** par
        out = np.empty_like(self.amps)
        out[idx ^ xmask] = coef * self.amps
        return out

    def expectation(self, p: PauliString) -> float:
        """Real part of <psi|P|psi> (P Hermitian, so the value is real)."""
        return float(np.vdot(self.amps, self._pauli_apply(p)).real)

    def apply_pauli_rotation(self, p: PauliString, angle: float) -> None:
        """psi <- exp(-i angle P) psi, exactly."""
        self.amps = (np.cos(angle) * self.amps
                     - 1j * np.sin(angle) * self._pauli_apply(p))
        self._check_norm()

    # ------------------------------------------------------------------
    # protocol operations

    def evolve_zz_layer(self, pairs, theta: float) -> None:
        """Diagonal phases exp(-i (pi/4) theta Z_a Z_b) for each pair."""
        if theta == 0.0 or len(pairs) == 0:
            return
        w = np.zeros(2**self.n, dtype=np.int64)
        for a, b in pairs:
            if not (0 <= a < self.n and 0 <= b < self.n) or a == b:
                raise ValueError(f"invalid pair ({a}, {b})")
            par = self._bit(a) ^ self._bit(b)
            w += 1 - 2 * par
        self.amps = self.amps * np.exp(-1j * (np.pi / 4) * theta * w)
        self._check_norm()

    def project_x(self, site: int, outcome: int) -> float:
        """Project onto X_site = outcome; returns the branch probability.

        The state is left unnormalized; callers renormalize after checking
        the returned probability.
        """
        if not 0 <= site < self.n:
            raise ValueError("site out of range")
        a = self.amps.reshape(2**site, 2, 2 ** (self.n - 1 - site))
        comp = (a[:, 0, :] + outcome * a[:, 1, :]) / np.sqrt(2.0)
        prob = float(np.sum(np.abs(comp) ** 2))
        half = comp / np.sqrt(2.0)
        out = np.empty_like(a)
        out[:, 0, :] = half
        out[:, 1, :] = outcome * half
        self.amps = out.reshape(-1)
        return prob

    def measure_x(self, site: int, rng) -> tuple[int, bool]:
        """Born-rule X measurement; returns (outcome, was_deterministic).

        Consumes one uniform draw only when the outcome is genuinely random,
        mirroring the tableau backend's draw pattern.
        """
        a = self.amps.reshape(2**site, 2, 2 ** (self.n - 1 - site))
        plus = (a[:, 0, :] + a[:, 1, :]) / np.sqrt(2.0)
        p_plus = float(np.sum(np.abs(plus) ** 2))
        tol = 1e-9
        if p_plus >= 1.0 - tol:
            outcome, deterministic = 1, True
        elif p_plus <= tol:
            outcome, deterministic = -1, True
        else:
            outcome = 1 if rng.random() < p_plus else -1
            deterministic = False
        prob = self.project_x(site, outcome)
        if prob < 1e-12:
            raise ValueError("projected onto a branch of negligible norm")
        self.amps /= np.sqrt(prob)
        self._check_norm()
        return outcome, deterministic

    # ------------------------------------------------------------------
    # entanglement

    def entropy(self, region) -> float:
        """Von Neumann entropy (nats) of the reduced state on ``region``."""
        region = sorted(set(int(s) for s in region))
        if not region:
            return 0.0
        if region[0] < 0 or region[-1] >= self.n:
            raise ValueError("region site out of range")
        rest = [q for q in range(self.n) if q not in region]
        tensor = self.amps.reshape([2] * self.n)
        mat = np.transpose(tensor, axes=region + rest).reshape(
            2 ** len(region), 2 ** len(rest))
        svals = np.linalg.svd(mat, compute_uv=False)
        lam = svals**2
        lam = lam[lam > 1e-14]
        return float(-np.sum(lam * np.log(lam)))

    def mutual_information_2(self, a, b) -> float:
        a = set(int(s) for s in a)
        b = set(int(s) for s in b)
        if a & b:
            raise ValueError("regions overlap")
        return self.entropy(a) + self.entropy(b) - self.entropy(a | b)


@dataclass
class HamiltonianSpec:
    """Sum of real couplings times Pauli strings; Hermitian by construction."""

    n: int
    terms: list[tuple[float, PauliString]] = field(default_factory=list)

    def add(self, coupling: float, p: PauliString) -> "HamiltonianSpec":
        if p.n != self.n:
            raise ValueError("term size does not match")
        self.terms.append((float(coupling), p))
        return self

    @classmethod
    def zz_bonds(cls, n: int, pairs, gamma_x: float = 0.0) -> "HamiltonianSpec":
        """H = sum_{(a,b)} Z_a Z_b + gamma_x * sum_i X_i."""
        spec = cls(n)
        for a, b in pairs:
            spec.add(1.0, PauliString.from_sites(n, (a, b), "Z"))
        if gamma_x != 0.0:
            for i in range(n):
                spec.add(gamma_x, PauliString.from_sites(n, (i,), "X"))
        return spec

    def to_sparse(self) -> sparse.csr_matrix:
        n = self.n
        dim = 2**n
        idx = np.arange(dim)
        rows, cols, vals = [], [], []
        for coupling, p in self.terms:
            xmask = _site_mask(n, p.x_bits)
            zmask = _site_mask(n, p.z_bits)
            ny = int(np.count_nonzero(p.x_bits & p.z_bits))
            par = np.bitwise_count(idx & zmask) & 1
            coef = coupling * p.sign * (1j**ny) * (-1.0) ** par
            rows.append(idx ^ xmask)
            cols.append(idx)
            vals.append(coef)
        mat = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim), dtype=np.complex128)
        return mat.tocsr()


def evolve_hamiltonian(state: StateVector, h: HamiltonianSpec | sparse.spmatrix,
                       dt: float, verify: bool = False,
                       verify_tol: float = 1e-8) -> None:
    """state <- exp(-i dt H) state via the Al-Mohy--Higham propagator.

    ``verify`` re-propagates in two half steps and rejects the result if the
    two answers differ beyond ``verify_tol``.
    """
    if dt == 0.0:
        return
    mat = h.to_sparse() if isinstance(h, HamiltonianSpec) else h
    if mat.shape[0] != state.amps.size:
        raise ValueError("Hamiltonian dimension does not match state")
    out = expm_multiply(-1j * dt * mat, state.amps)
    if verify:
        half = expm_multiply(-1j * (dt / 2) * mat, state.amps)
        half = expm_multiply(-1j * (dt / 2) * mat, half)
        err = float(np.linalg.norm(out - half))
        if err > verify_tol:
            raise IntegratorError(
                f"step-halving mismatch {err:.2e} exceeds {verify_tol:.0e}")
    state.amps = out
    state._check_norm()
