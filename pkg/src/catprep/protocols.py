"""Stochastic circuit drivers.

One layer = a unitary sublayer (each candidate gate applied with probability
p_u) followed by a measurement sublayer (each measured site read out in X
with probability p_m).  All randomness is drawn by the driver in a fixed
pattern, so the tableau and dense backends consume a shared stream
identically and produce bit-identical trajectories where both apply.

Layers are 1-based.  With p_u = 1 a measurement creates a stable two-site
stabilizer only in odd layers; the drivers do not special-case parity, the
effect emerges from the circuit itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse as _sp

from . import analytics
from .dense import StateVector, evolve_hamiltonian
from .detectors import StringGroup, TargetSpec, group_membership_mask
from .lattice import Lattice
from .pauli import PauliString
from .tableau import Basis, Tableau

__all__ = [
    "ProtocolParams", "TrajectoryRecord", "make_backend", "run_trajectory",
    "step_chain", "step_chain_noncommuting", "step_lieb",
    "step_lieb_noncommuting", "step_square", "decoder_step", "ghz_sign_fix",
]


@dataclass
class ProtocolParams:
    """Stochastic-circuit knobs for one parameter point."""

    p_u: float
    p_m: float
    theta: float = 1.0
    gamma_x: float = 0.0
    gate_set: str = "zz"              # "zz" or "zz+xx"
    decoder: bool = False
    halting: bool = False
    halting_fidelity: float = 0.99
    t_max: int = 1_000_000
    backend: str = "stabilizer"       # "stabilizer" or "dense"
    brickwork_order: tuple[str, str] = ("even", "odd")

    def validate(self, lat: Lattice) -> None:
        if not (0.0 <= self.p_u <= 1.0 and 0.0 <= self.p_m <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.gate_set not in ("zz", "zz+xx"):
            raise ValueError(f"unknown gate set {self.gate_set!r}")
        if self.backend not in ("stabilizer", "dense"):
            raise ValueError(f"unknown backend {self.backend!r}")
        nonclifford = self.theta != 1.0 or self.gamma_x != 0.0
        if nonclifford and self.backend != "dense":
            raise ValueError(
                "theta != 1 or gamma_x != 0 requires the dense backend")
        if self.gate_set == "zz+xx" and (self.backend != "stabilizer" or nonclifford):
            raise ValueError("the zz+xx gate set runs on the stabilizer backend")
        if self.decoder and (lat.kind != "chain" or self.gate_set != "zz"):
            raise ValueError("the decoder is defined for the zz chain protocol")
        if self.halting and lat.kind != "chain":
            raise ValueError("halting cutoff is defined for the chain protocol")
        if self.t_max < 1:
            raise ValueError("t_max must be positive")
        if sorted(self.brickwork_order) != ["even", "odd"]:
            raise ValueError("brickwork_order must permute ('even', 'odd')")


@dataclass
class TrajectoryRecord:
    """Per-run verdicts and optional time series.

    tau_zz: first layer after which every local target string is present.
    tau_z2: first layer >= tau_zz after which the global set is present.
    tau:    first layer with local and global sets present together (equals
            tau_z2 whenever locals persist, which holds for all zz-gate
            protocols).  Fields are None when censored at t_max.
    """

    tau_zz: int | None = None
    tau_z2: int | None = None
    tau: int | None = None
    censored: bool = False
    t_final: int = 0
    halting_cutoff: int | None = None
    sample_times: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    series: dict[str, np.ndarray] = field(default_factory=dict)
    local_fired: bool = False
    global_fired: bool = False
    last_outcomes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int8))


# ----------------------------------------------------------------------
# backends

class _BackendBase:
    state = None

    def entropy(self, region) -> float:
        raise NotImplementedError

    def mutual_information_2(self, a, b) -> float:
        sa = self.entropy(a)
        sb = self.entropy(b)
        sab = self.entropy(list(a) + list(b))
        return sa + sb - sab

    def mutual_information_3(self, a, b, c) -> float:
        s = self.entropy
        a, b, c = list(a), list(b), list(c)
        return (s(a) + s(b) + s(c)
                - s(a + b) - s(b + c) - s(a + c) + s(a + b + c))


class TableauBackend(_BackendBase):
    kind = "stabilizer"

    def __init__(self, lat: Lattice, params: ProtocolParams):
        self.lat = lat
        self.state = Tableau(lat.n_sites, Basis.MINUS_X)

    def apply_zz_sublayer(self, selections) -> None:
        for a, b in selections:
            self.state.apply_zz_pairs(a, b)

    def apply_zzxx_matching(self, a, b) -> None:
        # exp(-i pi/4 XX) exp(-i pi/4 ZZ) per pair; the two factors commute
        self.state.apply_zz_pairs(a, b)
        self.state.apply_xx_pairs(a, b)

    def measure_x(self, site: int, rng) -> int:
        return self.state.measure_x_site(site, rng)[0]

    def entropy(self, region) -> float:
        return self.state.entanglement_entropy(region)

    def group_fired_mask(self, group: StringGroup, rows=None) -> np.ndarray:
        return group_membership_mask(self.state, group, rows)

    def group_abs_mean(self, group: StringGroup) -> float:
        return float(group_membership_mask(self.state, group).mean())


class DenseBackend(_BackendBase):
    kind = "dense"

    def __init__(self, lat: Lattice, params: ProtocolParams):
        self.lat = lat
        self.theta = params.theta
        self.gamma_x = params.gamma_x
        self.state = StateVector.product_x(lat.n_sites, -1)
        self._strings: dict[int, list[PauliString]] = {}
        self._x_field = None
        if self.gamma_x != 0.0:
            from .dense import HamiltonianSpec
            spec = HamiltonianSpec(lat.n_sites)
            for i in range(lat.n_sites):
                spec.add(self.gamma_x, PauliString.from_sites(lat.n_sites, (i,), "X"))
            self._x_field = spec.to_sparse()

    def apply_zz_sublayer(self, selections) -> None:
        pairs = [(int(a), int(b)) for sa, sb in selections for a, b in zip(sa, sb)]
        if self.gamma_x == 0.0:
            self.state.evolve_zz_layer(pairs, self.theta)
            return
        # ZZ bonds and the transverse field evolve in one exponential; the
        # field stays on even in a layer where every bond failed
        diag = np.zeros(self.state.amps.size, dtype=np.float64)
        for a, b in pairs:
            par = self.state._bit(a) ^ self.state._bit(b)
            diag += 1.0 - 2.0 * par
        h = _sp.diags(diag).tocsr() + self._x_field
        evolve_hamiltonian(self.state, h, (np.pi / 4) * self.theta)

    def apply_zzxx_matching(self, a, b) -> None:
        raise NotImplementedError("zz+xx gates run on the stabilizer backend")

    def measure_x(self, site: int, rng) -> int:
        return self.state.measure_x(site, rng)[0]

    def entropy(self, region) -> float:
        return self.state.entropy(region)

    def _group_strings(self, group: StringGroup) -> list[PauliString]:
        key = id(group)
        if key not in self._strings:
            self._strings[key] = group.pauli_strings(self.state.n)
        return self._strings[key]

    def group_fired_mask(self, group: StringGroup, rows=None) -> np.ndarray:
        strings = self._group_strings(group)
        if rows is not None:
            strings = [strings[int(r)] for r in rows]
        vals = np.array([abs(self.state.expectation(p)) for p in strings])
        return vals >= 1.0 - 1e-9

    def group_abs_mean(self, group: StringGroup) -> float:
        strings = self._group_strings(group)
        return float(np.mean([abs(self.state.expectation(p)) for p in strings]))


def make_backend(lat: Lattice, params: ProtocolParams):
    params.validate(lat)
    if params.backend == "dense":
        return DenseBackend(lat, params)
    return TableauBackend(lat, params)


# ----------------------------------------------------------------------
# layer steps

def _select_matching(rng, a: np.ndarray, b: np.ndarray, p: float):
    mask = rng.random(a.size) < p
    return a[mask], b[mask]


def _measurement_sublayer(backend, lat: Lattice, params: ProtocolParams,
                          rng) -> np.ndarray:
    """Measure each designated site with probability p_m; 0 = unmeasured."""
    outcomes = np.zeros(lat.n_sites, dtype=np.int8)
    mask = rng.random(lat.measured_sites.size) < params.p_m
    for site in lat.measured_sites[mask]:
        outcomes[site] = backend.measure_x(int(site), rng)
    return outcomes


def step_chain(backend, lat: Lattice, params: ProtocolParams,
               layer_index: int, rng) -> np.ndarray:
    """One layer of the commuting ZZ chain protocol; returns outcomes."""
    if lat.kind != "chain":
        raise ValueError("step_chain requires a chain lattice")
    sels = [_select_matching(rng, a, b, params.p_u) for a, b in lat.matchings]
    backend.apply_zz_sublayer(sels)
    return _measurement_sublayer(backend, lat, params, rng)


def step_chain_noncommuting(backend, lat: Lattice, params: ProtocolParams,
                            rng) -> np.ndarray:
    """Brick-work layer of exp(-i pi/4 XX) exp(-i pi/4 ZZ) two-site gates."""
    if lat.kind != "chain":
        raise ValueError("step_chain_noncommuting requires a chain lattice")
    order = {"even": 0, "odd": 1}
    for name in params.brickwork_order:
        a, b = lat.matchings[order[name]]
        sa, sb = _select_matching(rng, a, b, params.p_u)
        backend.apply_zzxx_matching(sa, sb)
    return _measurement_sublayer(backend, lat, params, rng)


def step_lieb(backend, lat: Lattice, params: ProtocolParams,
              layer_index: int, rng) -> np.ndarray:
    """ZZ gates on every Lieb-lattice edge with probability p_u, then red
    site measurements."""
    if lat.kind != "lieb":
        raise ValueError("step_lieb requires the Lieb lattice")
    sels = [_select_matching(rng, a, b, params.p_u) for a, b in lat.matchings]
    backend.apply_zz_sublayer(sels)
    return _measurement_sublayer(backend, lat, params, rng)


def step_square(backend, lat: Lattice, params: ProtocolParams,
                layer_index: int, rng) -> np.ndarray:
    """ZZ gates on every square-lattice edge with probability p_u, then red
    site measurements."""
    if lat.kind != "square":
        raise ValueError("step_square requires the square lattice")
    sels = [_select_matching(rng, a, b, params.p_u) for a, b in lat.matchings]
    backend.apply_zz_sublayer(sels)
    return _measurement_sublayer(backend, lat, params, rng)


def step_lieb_noncommuting(backend, lat: Lattice, params: ProtocolParams,
                           rng) -> np.ndarray:
    """Four directional sublayers of XX*ZZ gates around every red site."""
    if lat.kind != "lieb":
        raise ValueError("step_lieb_noncommuting requires the Lieb lattice")
    for a, b in lat.matchings:      # ordered N, S, E, W
        sa, sb = _select_matching(rng, a, b, params.p_u)
        backend.apply_zzxx_matching(sa, sb)
    return _measurement_sublayer(backend, lat, params, rng)


def decoder_step(backend, lat: Lattice, params: ProtocolParams,
                 prev_outcomes: np.ndarray, rng) -> None:
    """Conditional repair block after a measurement sublayer.

    For each measured site whose previous outcome was -1 (a fair coin stands
    in when the site went unmeasured), apply the two neighboring ZZ gates
    and re-measure, each element with the circuit's own p_u / p_m, i.e. the
    decoder hardware is as unreliable as the rest of the circuit.  Re-done
    measurements overwrite the outcome record in place.
    """
    L = lat.L
    for site in lat.measured_sites:
        site = int(site)
        o = int(prev_outcomes[site])
        if o == 0:
            o = 1 if rng.random() < 0.5 else -1
        if o != -1:
            continue
        left = (site - 1) % L
        right = (site + 1) % L
        if rng.random() < params.p_u:
            backend.apply_zz_sublayer([(np.array([left]), np.array([site]))])
        if rng.random() < params.p_u:
            backend.apply_zz_sublayer([(np.array([site]), np.array([right]))])
        if rng.random() < params.p_m:
            prev_outcomes[site] = backend.measure_x(site, rng)


def ghz_sign_fix(state: Tableau, lat: Lattice, last_outcomes: np.ndarray) -> None:
    """Synchronize cat-state stabilizer signs with X flips on odd sites.

    The last outcome at even site i fixed the sign of Z_{i-1} Z_{i+1}; a
    prefix-parity walk picks the odd sites to flip so every local pair ends
    at +1.  All measured sites must carry a recorded outcome.
    """
    if lat.kind != "chain":
        raise ValueError("ghz_sign_fix is defined for the chain")
    L = lat.L
    if np.any(last_outcomes[lat.measured_sites] == 0):
        raise ValueError("missing measurement outcome on an even site")
    odd = np.arange(1, L, 2)
    flip = np.zeros(L // 2, dtype=bool)
    for k in range(L // 2 - 1):
        j = odd[k]
        s = int(last_outcomes[(j + 1) % L])
        flip[k + 1] = flip[k] ^ (s == -1)
    for k, j in enumerate(odd):
        if flip[k]:
            state.apply_x(int(j))


# ----------------------------------------------------------------------
# trajectory driver

_STEPS = {
    ("chain", "zz"): "chain_zz",
    ("chain", "zz+xx"): "chain_zzxx",
    ("lieb", "zz"): "lieb_zz",
    ("lieb", "zz+xx"): "lieb_zzxx",
    ("square", "zz"): "square_zz",
}


def _halting_cutoff(lat: Lattice, params: ProtocolParams) -> int:
    p_eff = params.p_u**2 * params.p_m
    tau = analytics.tau_fidelity(params.halting_fidelity, p_eff, lat.L)
    return int(math.ceil(2.0 * tau + 4.0))


def _make_observables(backend, lat: Lattice, names):
    funcs = {}
    for name in names:
        if name == "s_half":
            region = lat.half_region()
            funcs[name] = lambda region=region: backend.entropy(region)
        elif name == "zz":
            group = StringGroup("Z", lat.cat_pairs())
            funcs[name] = lambda group=group: backend.group_abs_mean(group)
        elif name == "yy":
            group = StringGroup("Y", lat.unmeasured_pairs())
            funcs[name] = lambda group=group: backend.group_abs_mean(group)
        elif name == "parity":
            group = StringGroup("X", lat.odd_sites()[None, :])
            funcs[name] = lambda group=group: backend.group_abs_mean(group)
        elif name == "i2":
            a, b = lat.antipodal_pair()
            funcs[name] = lambda a=a, b=b: backend.mutual_information_2([a], [b])
        elif name == "i3":
            qa, qb, qc = lat.quarter_regions()
            funcs[name] = lambda qa=qa, qb=qb, qc=qc: backend.mutual_information_3(qa, qb, qc)
        else:
            raise ValueError(f"unknown observable {name!r}")
    return funcs


class _DetectorTracker:
    """First-firing bookkeeping with latching where the protocol allows it.

    Z-letter local groups commute with every zz-protocol element, so a fired
    string stays fired and only the not-yet-fired remainder is rechecked.
    Everything else is re-evaluated in full.
    """

    def __init__(self, backend, spec: TargetSpec, params: ProtocolParams):
        self.backend = backend
        self.spec = spec
        latchable = params.gate_set == "zz" and params.gamma_x == 0.0
        self._unfired = {}
        for gi, group in enumerate(spec.local_groups):
            if latchable and group.letter == "Z":
                self._unfired[gi] = np.ones(len(group), dtype=bool)

    def local_fired(self) -> bool:
        ok = True
        for gi, group in enumerate(self.spec.local_groups):
            pending = self._unfired.get(gi)
            if pending is None:
                if not bool(np.all(self.backend.group_fired_mask(group))):
                    ok = False
            else:
                rows = np.nonzero(pending)[0]
                if rows.size:
                    mask = self.backend.group_fired_mask(group, rows)
                    pending[rows[mask]] = False
                if pending.any():
                    ok = False
        return ok

    def global_fired(self) -> bool:
        return all(bool(np.all(self.backend.group_fired_mask(g)))
                   for g in self.spec.global_groups)


def run_trajectory(lat: Lattice, params: ProtocolParams,
                   target: TargetSpec | None, rng, *,
                   stop_at_target: bool = True,
                   series_observables=(),
                   series_stride: int = 1,
                   series_start: int = 1,
                   fixed_layers: int | None = None) -> TrajectoryRecord:
    """Run one trajectory from the all-minus state.

    With ``stop_at_target`` the run ends at the layer where the target
    detector first fires (tau); otherwise, or when ``fixed_layers`` is set,
    it runs for a fixed number of layers recording the requested observable
    series.  Runs that never fire are marked censored, never dropped.
    """
    params.validate(lat)
    backend = make_backend(lat, params)
    step_kind = _STEPS.get((lat.kind, params.gate_set))
    if step_kind is None:
        raise ValueError(f"no protocol for {lat.kind} with {params.gate_set}")

    tracker = _DetectorTracker(backend, target, params) if target else None
    obs = _make_observables(backend, lat, series_observables)
    cutoff = _halting_cutoff(lat, params) if params.halting else None

    rec = TrajectoryRecord(halting_cutoff=cutoff)
    series: dict[str, list[float]] = {k: [] for k in obs}
    times: list[int] = []
    last_outcomes = np.zeros(lat.n_sites, dtype=np.int8)

    t_stop = fixed_layers if fixed_layers is not None else params.t_max
    t = 0
    while t < t_stop:
        t += 1
        halted = cutoff is not None and t > cutoff
        layer_params = params if not halted else replace(params, p_u=0.0)
        if step_kind == "chain_zz":
            outcomes = step_chain(backend, lat, layer_params, t, rng)
        elif step_kind == "chain_zzxx":
            outcomes = step_chain_noncommuting(backend, lat, layer_params, rng)
        elif step_kind == "lieb_zz":
            outcomes = step_lieb(backend, lat, layer_params, t, rng)
        elif step_kind == "lieb_zzxx":
            outcomes = step_lieb_noncommuting(backend, lat, layer_params, rng)
        else:
            outcomes = step_square(backend, lat, layer_params, t, rng)

        if params.decoder:
            decoder_step(backend, lat, layer_params, outcomes, rng)
        measured = outcomes != 0
        last_outcomes[measured] = outcomes[measured]

        if tracker is not None:
            if rec.tau is None:
                loc = tracker.local_fired()
                if loc and rec.tau_zz is None:
                    rec.tau_zz = t
                if loc and tracker.global_fired():
                    rec.tau_z2 = t
                    rec.tau = t
                    rec.local_fired = True
                    rec.global_fired = True
                elif halted and not loc:
                    # no gates remain to create the missing local
                    # stabilizers: the run can never fire
                    break
            if (rec.tau is not None and stop_at_target
                    and fixed_layers is None and not obs):
                break

        if obs and t >= series_start and (t - series_start) % series_stride == 0:
            times.append(t)
            for k, f in obs.items():
                series[k].append(f())
        if (obs and rec.tau is not None and stop_at_target
                and fixed_layers is None):
            break

    rec.t_final = t
    rec.censored = tracker is not None and rec.tau is None
    rec.sample_times = np.asarray(times, dtype=np.int64)
    rec.series = {k: np.asarray(v, dtype=np.float64) for k, v in series.items()}
    rec.last_outcomes = last_outcomes
    if tracker is not None and rec.tau is None:
        rec.local_fired = rec.tau_zz is not None
        rec.global_fired = False
    return rec
