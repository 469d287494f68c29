"""Closed-form predictions and small-model oracles.

Mean preparation times come from order statistics of per-site completion
times; the below-threshold regime is described by a six-state Markov chain
over 3-site stabilizer configurations.  Everything here is evaluated by
direct, adaptively truncated summation of the defining series; special
function closed forms appear only in tests as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import BitBasis, vector_from_sites

__all__ = [
    "tau_naive", "order_statistic_pmf", "order_statistic_cdf",
    "mean_time_pm1", "mean_time_pu1", "tau_fidelity", "MarkovChain",
    "markov_chain", "cdf_zz", "p_x", "tau_z2", "mean_tau_zz",
    "combined_mean_time",
    "CircuitRow", "local_circuit_table", "decoder_success_probability",
    "mean_time_lieb", "coin_toss_square", "three_site_occupancy",
]

_SUM_TOL = 1e-15
_SUM_MAX_T = 100_000_000


def tau_naive(L: int, p: float) -> float:
    """Leading-order mean time log(2/L) / log(1-p) for effective rate p."""
    if not 0.0 < p < 1.0:
        raise ValueError("effective probability must lie strictly in (0, 1)")
    if L < 2 or L % 2:
        raise ValueError("L must be even and at least 2")
    return float(np.log(2.0 / L) / np.log1p(-p))


def _second_largest_cdf(F: float, m: int) -> float:
    """CDF of the (m-1)-th order statistic of m iid draws with base CDF F."""
    # P(at most one of m draws still pending)
    return F ** (m - 1) * (1.0 + (m - 1) * (1.0 - F))


def order_statistic_cdf(t: int, L: int, p: float) -> float:
    """CDF at integer t of the time to fix all but one of L/2 sites.

    Per-site completion is geometric with per-layer success p and base CDF
    F(t) = 1 - (1-p)^(t+1); the last site follows from the others.
    """
    if t < 0:
        return 0.0
    m = _check_sites(L)
    F = -np.expm1((t + 1) * np.log1p(-p)) if p < 1.0 else 1.0
    return float(_second_largest_cdf(F, m))


def order_statistic_pmf(t: int, L: int, p: float) -> float:
    """PMF at integer t of the same order statistic."""
    if t < 0:
        return 0.0
    return order_statistic_cdf(t, L, p) - order_statistic_cdf(t - 1, L, p)


def _check_sites(L: int) -> int:
    if L < 4 or L % 2:
        raise ValueError("L must be even and at least 4")
    return L // 2


def _os_mean(cdf) -> float:
    """Sum of (1 - cdf(t)) over t >= 0 with adaptive truncation."""
    total = 0.0
    t = 0
    while t < _SUM_MAX_T:
        tail = 1.0 - cdf(t)
        total += tail
        if tail < _SUM_TOL * (1.0 + total):
            return total
        t += 1
    raise ValueError("mean-time series did not converge (is the rate zero?)")


def mean_time_pm1(L: int, p_u: float) -> float:
    """Mean layers to the cat state when every site is measured (p_m = 1)."""
    if not 0.0 < p_u <= 1.0:
        raise ValueError("p_u must lie in (0, 1]")
    m = _check_sites(L)
    if p_u == 1.0:
        return 1.0
    p = p_u**2
    return _os_mean(lambda t: order_statistic_cdf(t, L, p)) + 1.0


def mean_time_pu1(L: int, p_m: float) -> float:
    """Mean layers when every gate fires (p_u = 1).

    Only odd layers create stable stabilizers, hence the factor 2 on the
    order-statistic mean.
    """
    if not 0.0 < p_m <= 1.0:
        raise ValueError("p_m must lie in (0, 1]")
    _check_sites(L)
    if p_m == 1.0:
        return 1.0
    return 2.0 * _os_mean(lambda t: order_statistic_cdf(t, L, p_m)) + 1.0


def tau_fidelity(phi: float, p: float, L: int) -> float:
    """Layers needed so a fraction phi of runs holds all local stabilizers."""
    if not 0.0 < phi < 1.0:
        raise ValueError("fidelity must lie strictly in (0, 1)")
    if not 0.0 < p <= 1.0:
        raise ValueError("effective probability must lie in (0, 1]")
    if L < 4 or L % 2:
        raise ValueError("L must be even and at least 4")
    if p == 1.0:
        return -1.0
    return float(0.5 * np.log(8.0 * (1.0 - phi) / (L * (L - 2))) / np.log1p(-p) - 1.0)


# ----------------------------------------------------------------------
# six-state Markov chain of 3-site stabilizer configurations

@dataclass
class MarkovChain:
    """Column-stochastic transition matrix over the six 3-site states.

    a[i, j] is the probability of moving from state j+1 to state i+1 in one
    layer.  States 5 and 6 are the absorbing pair carrying the two-site ZZ
    stabilizer.
    """

    p_u: float
    p_m: float
    a: np.ndarray

    def occupancy(self, t: int) -> np.ndarray:
        """State distribution after t layers starting from state 1."""
        v = np.zeros(6)
        v[0] = 1.0
        for _ in range(t):
            v = self.a @ v
        return v


def markov_chain(p_u: float, p_m: float) -> MarkovChain:
    if not (0.0 <= p_u <= 1.0 and 0.0 <= p_m <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    pu, pm = p_u, p_m
    qu, qm = 1.0 - pu, 1.0 - pm
    a = np.array([
        [2*pm*pu*qu + qu**2, pm*pu**2 + pm*qu**2 + pu*qu,
         pm*pu**2 + pm*qu**2 + pu*qu, 2*pm*qu*pu + pu**2, 0.0, 0.0],
        [qm*qu*pu, qm*qu**2, qm*pu**2, qm*qu*pu, 0.0, 0.0],
        [qm*qu*pu, qm*pu**2, qm*qu**2, qm*qu*pu, 0.0, 0.0],
        [qm*pu**2, qm*qu*pu, qm*qu*pu, qm*qu**2, 0.0, 0.0],
        [pm*pu**2, pm*qu*pu, pm*qu*pu, pm*qu**2,
         2*pm*pu*qu + pu**2 + qu**2, pm*pu**2 + pm*qu**2 + 2*pu*qu],
        [0.0, 0.0, 0.0, 0.0, 2*qm*qu*pu, qm*pu**2 + qm*qu**2],
    ])
    return MarkovChain(pu, pm, a)


def cdf_zz(t: int, p_u: float, p_m: float) -> float:
    """Probability that one 3-site cluster holds its ZZ stabilizer by layer t."""
    if t < 0:
        return 0.0
    occ = markov_chain(p_u, p_m).occupancy(t)
    return float(occ[4] + occ[5])


def p_x(p_u: float, p_m: float) -> float:
    """Stationary probability of the bare-X absorbing state (state 5)."""
    num = p_m + 2.0 * (1.0 - p_m) * p_u * (1.0 - p_u)
    den = p_m + 4.0 * (1.0 - p_m) * p_u * (1.0 - p_u)
    if den == 0.0:
        raise ValueError("p_X undefined: denominator vanishes")
    return num / den


def tau_z2(L: int, p_u: float, p_m: float) -> float:
    """Mean extra layers to recover the global parity: p_X^(-L/2)."""
    _check_sites(L)
    return float(p_x(p_u, p_m) ** (-(L // 2)))


def mean_tau_zz(L: int, p_u: float, p_m: float) -> float:
    """Mean layers until all local ZZ stabilizers are present.

    The (L/2 - 1)-th order statistic of L/2 independent clusters whose
    per-cluster completion CDF is F_ZZ from the six-state chain.
    """
    m = _check_sites(L)
    chain = markov_chain(p_u, p_m)
    total = 0.0
    v = np.zeros(6)
    v[0] = 1.0
    t = 0
    while t < _SUM_MAX_T:
        tail = 1.0 - _second_largest_cdf(float(v[4] + v[5]), m)
        total += tail
        if tail < _SUM_TOL * (1.0 + total):
            return total
        v = chain.a @ v
        t += 1
    raise ValueError("mean-time series did not converge")


def _parity_relaxation_wait(L: int, p_u: float, p_m: float) -> float:
    """Mean layers from all-locals to all clusters in the bare-X state.

    After absorption every cluster flips between states 5 and 6 with rates
    alpha = P(5->6), beta = P(6->5).  Absorption always enters state 5 (the
    chain has no transient->6 edges), so the freshly completed cluster
    starts there while the others start near stationarity; the number of
    clusters in state 6 is itself a small Markov chain whose hitting time
    of zero is solved exactly.
    """
    from scipy import stats

    m = L // 2
    qm, qu = 1.0 - p_m, 1.0 - p_u
    alpha = 2.0 * qm * qu * p_u
    beta = p_m * p_u**2 + p_m * qu**2 + 2.0 * p_u * qu
    if alpha == 0.0:
        return 0.0
    pi6 = alpha / (alpha + beta)
    ks = np.arange(m + 1)
    down = stats.binom.pmf(ks[:, None], ks[None, :], beta)      # (d, k)
    trans = np.zeros((m + 1, m + 1))
    for k in range(m + 1):
        up = stats.binom.pmf(np.arange(m - k + 1), m - k, alpha)
        for d in range(k + 1):
            lo = k - d
            trans[lo:lo + up.size, k] += down[d, k] * up
    q = trans[1:, 1:]
    h = np.linalg.solve(np.eye(m) - q.T, np.ones(m))
    h = np.concatenate([[0.0], h])
    start = stats.binom.pmf(np.arange(m), m - 1, pi6)
    return float(np.dot(start, h[:m]))


def combined_mean_time(L: int, p_u: float, p_m: float,
                       parity_wait: str = "relaxation") -> float:
    """Mean layers to the full cat state in the below-threshold regime.

    The order-statistic mean over the chain CDF gives the local part; the
    parity recovery adds either the exact two-state relaxation wait
    ("relaxation", default) or its large-L geometric asymptote
    p_X^(-L/2) - 1 ("geometric").
    """
    if parity_wait not in ("relaxation", "geometric"):
        raise ValueError("parity_wait must be 'relaxation' or 'geometric'")
    local = mean_tau_zz(L, p_u, p_m)
    if parity_wait == "relaxation":
        return local + _parity_relaxation_wait(L, p_u, p_m)
    return local + tau_z2(L, p_u, p_m) - 1.0


def chain_model_mean_time(L: int, p_u: float, p_m: float, runs: int,
                          rng, t_max: int = 1_000_000) -> tuple[float, float]:
    """Exact evaluation of the six-state-chain model of the preparation time.

    Samples L/2 independent chains from state 1 and stops at the first
    layer where the target condition holds: every cluster in the bare-X
    absorbing state, or all but one there with the straggler in the X-basis
    product state (whose ZZ pair follows from closure and whose even-site X
    is still present).  This is the same condition the circuit detector
    implements, so the only discrepancy against a circuit ensemble is
    sampling noise on both sides.  Returns (mean, stderr).
    """
    m = _check_sites(L)
    chain = markov_chain(p_u, p_m)
    cum = np.cumsum(chain.a, axis=0)          # cum[i, j] = P(next <= i | j)
    states = np.zeros((runs, m), dtype=np.int8)
    taus = np.zeros(runs, dtype=np.int64)
    active = np.ones(runs, dtype=bool)
    t = 0
    while active.any():
        t += 1
        if t > t_max:
            raise ValueError("chain model did not converge within t_max")
        u = rng.random((int(active.sum()), m))
        sub = states[active]
        nxt = np.empty_like(sub)
        for s in range(6):
            mask = sub == s
            if mask.any():
                nxt[mask] = np.searchsorted(cum[:, s], u[mask], side="right")
        states[active] = nxt
        n5 = (nxt == 4).sum(axis=1)
        n1 = (nxt == 0).sum(axis=1)
        fired = (n5 == m) | ((n5 == m - 1) & (n1 == 1))
        idx = np.nonzero(active)[0][fired]
        taus[idx] = t
        active[idx] = False
    mean = float(taus.mean())
    return mean, float(taus.std(ddof=1) / np.sqrt(runs))


# ----------------------------------------------------------------------
# Table of the eight one-step 3-site circuits

@dataclass(frozen=True)
class CircuitRow:
    """One of the eight 3-qubit one-step circuits.

    ``stabilizer_map`` records how the circuit transforms the X_2 and
    Y_2 Z_3 stabilizers; ``deterministic`` flags the single circuit whose
    measurement outcome is fixed when starting from the all-minus state.
    """

    unitaries: tuple[bool, bool]
    measured: bool
    probability: float
    stabilizer_map: dict
    deterministic: bool


def local_circuit_table(p_u: float, p_m: float) -> list[CircuitRow]:
    """All eight 3-qubit one-step circuits with probabilities and actions."""
    pu, pm = p_u, p_m
    qu, qm = 1.0 - pu, 1.0 - pm
    to_x2 = {"X2": "X2", "Y2Z3": "X2"}
    keep = {"X2": "X2", "Y2Z3": "Y2Z3"}
    swap = {"X2": "Y2Z3", "Y2Z3": "X2"}
    rows = [
        CircuitRow((True, True), True, pu * pu * pm, to_x2, False),
        CircuitRow((True, False), True, pu * qu * pm, to_x2, False),
        CircuitRow((False, True), True, pu * qu * pm, to_x2, False),
        CircuitRow((False, False), True, qu * qu * pm, to_x2, True),
        CircuitRow((True, True), False, pu * pu * qm, keep, False),
        CircuitRow((True, False), False, pu * qu * qm, swap, False),
        CircuitRow((False, True), False, pu * qu * qm, swap, False),
        CircuitRow((False, False), False, qu * qu * qm, keep, False),
    ]
    return rows


def decoder_success_probability(p_u: float, p_m: float) -> float:
    """Stabilizer-creation probability with a perfect decoder attached.

    Rows 1 and 4 create the stabilizer outright; row 8 (idle circuit)
    succeeds half the time once the decoder conditions on a random outcome.
    """
    rows = local_circuit_table(p_u, p_m)
    return rows[0].probability + rows[3].probability + 0.5 * rows[7].probability


# ----------------------------------------------------------------------
# 2-D mean times

def mean_time_lieb(L: int, p_m: float) -> float:
    """Mean layers to the toric code on the Lieb lattice at p_u = 1.

    L^2 - 1 vertex stabilizers must fix (the last follows from closure),
    each via an odd-layer measurement of rate p_m.
    """
    if not 0.0 < p_m <= 1.0:
        raise ValueError("p_m must lie in (0, 1]")
    if L < 2:
        raise ValueError("L must be at least 2")
    if p_m == 1.0:
        return 1.0
    m = L * L

    def cdf(t: int) -> float:
        F = -np.expm1((t + 1) * np.log1p(-p_m))
        return _second_largest_cdf(float(F), m)

    return 2.0 * _os_mean(cdf) + 1.0


# ----------------------------------------------------------------------
# square-lattice coin-toss model

def _square_coin_geometry(L: int):
    """Red-site indexing and deduction relations for the L x L square lattice.

    Red sites map to rotated coordinates u = (x+y)/2, v = (x-y)/2 mod L with
    the identification (u, v) ~ (u + L/2, v + L/2).  Diamond stabilizers
    multiply to the identity along every diagonal (fixed u or v class mod
    L/2) and along every cone set [u - a mod L < L/2] xor [v - b mod L < L/2].
    """
    if L < 4 or L % 2:
        raise ValueError("square lattice needs even L >= 4")
    reds = [(x, y) for x in range(L) for y in range(L) if (x + y) % 2 == 0]
    index = {}
    uv = []
    for i, (x, y) in enumerate(reds):
        u = ((x + y) // 2) % L
        v = (((x - y) % (2 * L)) // 2) % L
        index[(x, y)] = i
        uv.append((u, v))
    half = L // 2

    def sites_where(pred):
        return [i for i, (u, v) in enumerate(uv) if pred(u, v)]

    diagonals = []
    for u0 in range(half):
        diagonals.append(sites_where(lambda u, v, u0=u0: u % half == u0))
    for v0 in range(half):
        diagonals.append(sites_where(lambda u, v, v0=v0: v % half == v0))
    cones = []
    seen = set()
    for a in range(L):
        for b in range(L):
            cone = frozenset(sites_where(
                lambda u, v, a=a, b=b: ((u - a) % L < half) ^ ((v - b) % L < half)))
            if cone and cone not in seen:
                seen.add(cone)
                cones.append(sorted(cone))
    return len(reds), diagonals, cones


def _closure_basis(n_coins: int, diagonals, cones) -> BitBasis:
    basis = BitBasis()
    for d in diagonals:
        basis.add(vector_from_sites(d))
    if cones:
        basis.add(vector_from_sites(cones[0]))
    return basis


def coin_toss_square(L: int, p_m: float, rng, runs: int,
                     deduction: str = "closure") -> float:
    """Mean Xu-Moore preparation time from the coin-toss model.

    Each round every tail flips to heads with probability p_m, then implied
    heads are deduced from the always-present global symmetries.  "closure"
    deduces through full GF(2) span membership (what the stabilizer group
    itself does); "single_pass" applies the literal one-missing-coin rule
    once per relation per round.  tau = 2 * rounds - 1.
    """
    if not 0.0 < p_m <= 1.0:
        raise ValueError("p_m must lie in (0, 1]")
    if runs < 1:
        raise ValueError("need at least one run")
    if deduction not in ("closure", "single_pass"):
        raise ValueError("deduction must be 'closure' or 'single_pass'")
    n_coins, diagonals, cones = _square_coin_geometry(L)
    relations = diagonals + cones
    total = 0
    for _ in range(runs):
        heads = np.zeros(n_coins, dtype=bool)
        rounds = 0
        if deduction == "closure":
            basis = _closure_basis(n_coins, diagonals, cones)
        while not heads.all():
            rounds += 1
            flip = rng.random(n_coins) < p_m
            newly = np.nonzero(~heads & flip)[0]
            heads[flip] = True
            if deduction == "closure":
                for i in newly:
                    basis.add(1 << int(i))
                for i in np.nonzero(~heads)[0]:
                    if basis.contains(1 << int(i)):
                        heads[i] = True
                        basis.add(1 << int(i))
            else:
                for rel in relations:
                    pending = [i for i in rel if not heads[i]]
                    if len(pending) == 1:
                        heads[pending[0]] = True
        total += 2 * rounds - 1
    return total / runs


# ----------------------------------------------------------------------
# 3-site circuit Monte Carlo (oracle for the Markov chain)

def _span_set(rows) -> frozenset:
    """Unsigned GF(2) span of (x, z) bit-vector generators, as a frozenset."""
    elems = {(bytes(3), bytes(3))}
    for x, z in rows:
        xb, zb = np.asarray(x, dtype=np.uint8), np.asarray(z, dtype=np.uint8)
        for ex, ez in list(elems):
            nx = (np.frombuffer(ex, dtype=np.uint8) ^ xb).tobytes()
            nz = (np.frombuffer(ez, dtype=np.uint8) ^ zb).tobytes()
            elems.add((nx, nz))
    return frozenset(elems)


def _group_set(labels) -> frozenset:
    from .pauli import PauliString

    rows = []
    for lab in labels:
        p = PauliString.from_label(lab)
        rows.append((p.x_bits, p.z_bits))
    return _span_set(rows)


def three_site_occupancy(p_u: float, p_m: float, runs: int, t_max: int,
                         rng) -> np.ndarray:
    """Simulated state occupancies of the 3-site cluster circuit.

    Runs the actual stabilizer circuit (two bond gates at rate p_u, middle
    X measurement at rate p_m, from the all-minus state) and classifies the
    state after each layer into the six canonical stabilizer groups.
    Returns counts of shape (t_max + 1, 6) including layer 0.

    Transitions are memoized over the reachable signed-state space, so large
    run counts reduce to table lookups.
    """
    from .pauli import PauliString
    from .tableau import Basis, Tableau

    x2_probe = PauliString.from_sites(3, (1,), "X")
    references = [_group_set(gens) for gens in (
        ("XII", "IXI", "IIX"),
        ("XII", "IZY", "IXX"),
        ("IIX", "YZI", "XXI"),
        ("YZI", "IZY", "ZXZ"),
        ("ZIZ", "IXI", "XXX"),
        ("ZIZ", "IYZ", "XXX"),
    )]

    def classify(t: Tableau) -> int:
        rows = [(t.x[:, 3 + i], t.z[:, 3 + i]) for i in range(3)]
        group = _span_set(rows)
        for k, ref in enumerate(references):
            if group == ref:
                return k
        raise AssertionError("3-site state outside the six-state space")

    def canon(t: Tableau) -> tuple:
        rows = []
        for r in range(3, 6):
            rows.append((t.x[:, r].tobytes(), t.z[:, r].tobytes(), int(t.phase[r])))
        return tuple(sorted(rows))

    class _Coin:
        """Feeds one prescribed uniform, recording whether it was consumed."""

        def __init__(self, value: float):
            self.value = value
            self.used = False

        def random(self):
            self.used = True
            return self.value

    start = Tableau(3, Basis.MINUS_X)
    states = {canon(start): 0}
    tableaus = [start]
    classes = [classify(start)]
    # transitions[s][config] = (next_if_plus, next_if_minus); config packs
    # the three application coins (gate 12, gate 23, measure 2)
    transitions: list[list[tuple[int, int] | None]] = [[None] * 8]

    def explore(s: int, config: int) -> tuple[int, int]:
        nxt = []
        for coin_value in (0.25, 0.75):     # outcome +1, outcome -1
            t = tableaus[s].copy()
            if config & 1:
                t.apply_zz_rotation(0, 1)
            if config & 2:
                t.apply_zz_rotation(1, 2)
            if config & 4:
                t.measure_pauli(x2_probe, _Coin(coin_value))
            key = canon(t)
            if key not in states:
                states[key] = len(tableaus)
                tableaus.append(t)
                classes.append(classify(t))
                transitions.append([None] * 8)
            nxt.append(states[key])
        return nxt[0], nxt[1]

    counts = np.zeros((t_max + 1, 6), dtype=np.int64)
    state_ids = np.zeros(runs, dtype=np.int64)
    counts[0, 0] = runs
    for t in range(1, t_max + 1):
        draws = rng.random((runs, 3))
        configs = ((draws[:, 0] < p_u).astype(np.int64)
                   | ((draws[:, 1] < p_u).astype(np.int64) << 1)
                   | ((draws[:, 2] < p_m).astype(np.int64) << 2))
        outcome_draws = rng.random(runs) < 0.5
        new_ids = np.empty_like(state_ids)
        for i in range(runs):
            s = int(state_ids[i])
            c = int(configs[i])
            tr = transitions[s][c]
            if tr is None:
                tr = explore(s, c)
                transitions[s][c] = tr
            new_ids[i] = tr[0] if outcome_draws[i] else tr[1]
        state_ids = new_ids
        counts[t] = np.bincount([classes[int(s)] for s in state_ids], minlength=6)
    return counts
