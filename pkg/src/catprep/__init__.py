"""catprep: stochastic circuits that prepare long-range entangled states.

Simulates layered circuits of probabilistically applied two-site gates and
single-site X measurements on chains and 2-D lattices, tracks the times at
which local and global stabilizers of the target state emerge, and provides
the matching closed-form predictions and ensemble statistics.
"""

from .pauli import PauliString, x_parity, yy_pair, zz_pair
from .tableau import Basis, Tableau, new_product_state
from .dense import HamiltonianSpec, StateVector, evolve_hamiltonian
from .lattice import Lattice
from .detectors import TargetSpec, detect_global, detect_local, detect_target, toric_sector
from .protocols import ProtocolParams, TrajectoryRecord, run_trajectory
from .rng import trajectory_rng

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "HamiltonianSpec",
    "Lattice",
    "PauliString",
    "ProtocolParams",
    "StateVector",
    "Tableau",
    "TargetSpec",
    "TrajectoryRecord",
    "detect_global",
    "detect_local",
    "detect_target",
    "evolve_hamiltonian",
    "new_product_state",
    "run_trajectory",
    "toric_sector",
    "trajectory_rng",
    "x_parity",
    "yy_pair",
    "zz_pair",
    "__version__",
]
