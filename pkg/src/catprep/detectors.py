"""Target-state recognition.

A target is a set of local stabilizer strings plus a set of global symmetry
strings; the detector fires when every string lies in the state's stabilizer
group up to sign (|expectation| = 1).  Signs are ignored here because the
preparation times count target states of either stabilizer sign; signed
verdicts are exposed separately (:func:`toric_sector`).

Detection never mutates the state.  On a tableau the group-membership test
for a batch of same-letter strings is a single vectorized parity check; on a
dense state each string's expectation value is evaluated explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Lattice
from .pauli import PauliString
from .tableau import Tableau

_DENSE_TOL = 1e-9


@dataclass
class StringGroup:
    """Strings sharing one Pauli letter, defined by their site lists."""

    letter: str           # "X", "Z" or "Y", the letter placed on every site
    sites: np.ndarray     # (K, w) site indices, one row per string

    def __len__(self) -> int:
        return self.sites.shape[0]

    def pauli_strings(self, n: int) -> list[PauliString]:
        return [PauliString.from_sites(n, row, self.letter) for row in self.sites]


@dataclass
class TargetSpec:
    """Local + global stabilizer sets that define a target state."""

    kind: str
    n: int
    local_groups: list[StringGroup]
    global_groups: list[StringGroup]

    def local_strings(self) -> list[PauliString]:
        return [p for g in self.local_groups for p in g.pauli_strings(self.n)]

    def global_strings(self) -> list[PauliString]:
        return [p for g in self.global_groups for p in g.pauli_strings(self.n)]


def make_target_spec(kind: str, lat: Lattice) -> TargetSpec:
    """Build the named target for a lattice.

    cat_x / cat_y: chain cat state via Z_i Z_{i+2} (or Y_i Y_{i+2}) pairs on
    odd sites with the odd-site X parity as the global symmetry.
    toric_code: Lieb-lattice vertex (4 Z) and plaquette (4 X) stabilizers
    plus the X line symmetries.  xu_moore: square-lattice diamond stabilizers
    plus the diagonal X lines.
    """
    n = lat.n_sites
    if kind in ("cat_x", "cat_y"):
        if lat.kind != "chain":
            raise ValueError(f"{kind} target requires a chain")
        letter = "Z" if kind == "cat_x" else "Y"
        locals_ = [StringGroup(letter, lat.cat_pairs())]
        globals_ = [StringGroup("X", lat.odd_sites()[None, :])]
        return TargetSpec(kind, n, locals_, globals_)
    if kind == "toric_code":
        if lat.kind != "lieb":
            raise ValueError("toric_code target requires the Lieb lattice")
        locals_ = [StringGroup("Z", lat.vertex_stars()),
                   StringGroup("X", lat.plaquettes())]
        globals_ = [StringGroup("X", np.stack(lat.line_symmetries()))]
        return TargetSpec(kind, n, locals_, globals_)
    if kind == "xu_moore":
        if lat.kind != "square":
            raise ValueError("xu_moore target requires the square lattice")
        locals_ = [StringGroup("Z", lat.vertex_stars())]
        globals_ = [StringGroup("X", np.stack(lat.line_symmetries()))]
        return TargetSpec(kind, n, locals_, globals_)
    raise ValueError(f"unknown target kind {kind!r}")


# ----------------------------------------------------------------------
# membership tests

def group_membership_mask(state: Tableau, group: StringGroup,
                          rows: np.ndarray | None = None) -> np.ndarray:
    """Boolean per string: is it in the stabilizer group up to sign?

    A string is in the group (either sign) iff it commutes with every
    stabilizer row, which for a single-letter string is a parity check on
    one bit plane.  ``rows`` restricts to a subset of strings.
    """
    n = state.n
    sites = group.sites if rows is None else group.sites[rows]
    if sites.size == 0:
        return np.ones(0, dtype=bool)
    if group.letter == "Z":
        plane = state.x
    elif group.letter == "X":
        plane = state.z
    else:
        plane = state.x ^ state.z
    bits = plane[sites][..., n:]                 # (K, w, n)
    anti = np.bitwise_xor.reduce(bits, axis=1)
    return ~np.any(anti, axis=1)


def _abs_expectations_dense(state, strings) -> np.ndarray:
    return np.array([abs(state.expectation(p)) for p in strings])


def _group_fired(state, group: StringGroup) -> bool:
    if isinstance(state, Tableau):
        return bool(np.all(group_membership_mask(state, group)))
    vals = _abs_expectations_dense(state, group.pauli_strings(state.n))
    return bool(np.all(vals >= 1.0 - _DENSE_TOL))


def detect_local(state, spec: TargetSpec) -> bool:
    """True iff every local string has |expectation| = 1."""
    return all(_group_fired(state, g) for g in spec.local_groups)


def detect_global(state, spec: TargetSpec) -> bool:
    """True iff every global symmetry string has |expectation| = 1."""
    return all(_group_fired(state, g) for g in spec.global_groups)


def detect_target(state, spec: TargetSpec) -> bool:
    """Local and global sets both present."""
    return detect_local(state, spec) and detect_global(state, spec)


def toric_sector(state: Tableau, spec: TargetSpec) -> tuple[np.ndarray, np.ndarray]:
    """Signs of every vertex and plaquette stabilizer (the defect pattern).

    Only meaningful once the toric-code detector has fired; calling earlier
    raises.
    """
    if spec.kind != "toric_code":
        raise ValueError("sector readout is defined for the toric_code target")
    if not detect_local(state, spec):
        raise ValueError("toric_code detector has not fired yet")
    vgroup, pgroup = spec.local_groups
    v_signs = np.array([state.expectation(p) for p in vgroup.pauli_strings(spec.n)])
    p_signs = np.array([state.expectation(p) for p in pgroup.pauli_strings(spec.n)])
    return v_signs, p_signs
