"""Trajectory ensembles: orchestration, statistics, fits, data collapse.

Trajectories are independent work units keyed by (seed, point_id, traj_id);
aggregation happens in trajectory order, so results are bitwise identical
for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .detectors import TargetSpec, make_target_spec
from .lattice import Lattice
from .protocols import ProtocolParams, TrajectoryRecord, run_trajectory
from .rng import trajectory_rng

__all__ = [
    "PointConfig", "EnsembleStats", "run_ensemble",
    "FitResult", "fit_mean_time", "CollapseFit", "data_collapse",
]


@dataclass
class PointConfig:
    """One parameter point of an ensemble run."""

    lattice_kind: str
    L: int
    params: ProtocolParams
    trajectories: int
    seed: int
    point_id: int = 0
    target_kind: str | None = "cat_x"
    stop_at_target: bool = True
    fixed_layers: int | None = None
    series_observables: tuple[str, ...] = ()
    series_stride: int = 1
    series_start: int = 1
    equilibration_constant: float = 4.0
    workers: int = 1

    def lattice(self) -> Lattice:
        return Lattice.make(self.lattice_kind, self.L)

    def target(self, lat: Lattice) -> TargetSpec | None:
        if self.target_kind is None:
            return None
        return make_target_spec(self.target_kind, lat)

    def equilibration_layers(self) -> int:
        return int(math.ceil(self.equilibration_constant * self.L))


@dataclass
class EnsembleStats:
    """Aggregated statistics for one parameter point.

    Censored runs are excluded from the tau means but counted; steady-state
    averages use batch means over the post-equilibration window to absorb
    autocorrelation.
    """

    config: PointConfig
    n_traj: int = 0
    tau_mean: float = math.nan
    tau_stderr: float = math.nan
    tau_censored: int = 0
    tau_zz_mean: float = math.nan
    tau_zz_stderr: float = math.nan
    tau_zz_censored: int = 0
    tau_z2_mean: float = math.nan
    tau_z2_stderr: float = math.nan
    tau_histogram: dict[int, int] = field(default_factory=dict)
    sample_times: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    series_mean: dict[str, np.ndarray] = field(default_factory=dict)
    series_stderr: dict[str, np.ndarray] = field(default_factory=dict)
    steady_mean: dict[str, float] = field(default_factory=dict)
    steady_stderr: dict[str, float] = field(default_factory=dict)
    per_traj_steady: dict[str, np.ndarray] = field(default_factory=dict)


def _run_one(args) -> TrajectoryRecord:
    cfg, traj_id = args
    lat = cfg.lattice()
    target = cfg.target(lat)
    rng = trajectory_rng(cfg.seed, cfg.point_id, traj_id)
    return run_trajectory(
        lat, cfg.params, target, rng,
        stop_at_target=cfg.stop_at_target,
        series_observables=cfg.series_observables,
        series_stride=cfg.series_stride,
        series_start=cfg.series_start,
        fixed_layers=cfg.fixed_layers,
    )


def _mean_stderr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return math.nan, math.nan
    if v.size == 1:
        return float(v[0]), math.nan
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))


def run_ensemble(cfg: PointConfig) -> EnsembleStats:
    """Run the point's trajectories and aggregate deterministically."""
    if cfg.trajectories < 2:
        raise ValueError("need at least 2 trajectories")
    jobs = [(cfg, i) for i in range(cfg.trajectories)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_one, jobs, chunksize=32))
    else:
        records = [_run_one(j) for j in jobs]
    return aggregate(cfg, records)


def aggregate(cfg: PointConfig, records: list[TrajectoryRecord]) -> EnsembleStats:
    stats = EnsembleStats(config=cfg, n_traj=len(records))
    taus = [r.tau for r in records if r.tau is not None]
    stats.tau_censored = sum(1 for r in records if r.tau is None)
    stats.tau_mean, stats.tau_stderr = _mean_stderr(taus)
    if cfg.target_kind is not None and stats.tau_censored == len(records):
        stats.tau_mean = math.inf
    tzz = [r.tau_zz for r in records if r.tau_zz is not None]
    stats.tau_zz_censored = sum(1 for r in records if r.tau_zz is None)
    stats.tau_zz_mean, stats.tau_zz_stderr = _mean_stderr(tzz)
    tz2 = [r.tau_z2 for r in records if r.tau_z2 is not None]
    stats.tau_z2_mean, stats.tau_z2_stderr = _mean_stderr(tz2)
    hist: dict[int, int] = {}
    for t in taus:
        hist[t] = hist.get(t, 0) + 1
    stats.tau_histogram = dict(sorted(hist.items()))

    if cfg.series_observables and records and records[0].sample_times.size:
        times = records[0].sample_times
        for r in records:
            if not np.array_equal(r.sample_times, times):
                raise ValueError("trajectories sampled at different times; "
                                 "use fixed_layers for series runs")
        stats.sample_times = times
        equil = cfg.equilibration_layers()
        steady_mask = times > equil
        for k in cfg.series_observables:
            block = np.stack([r.series[k] for r in records])
            stats.series_mean[k] = block.mean(axis=0)
            stats.series_stderr[k] = (block.std(axis=0, ddof=1)
                                      / np.sqrt(len(records)))
            if steady_mask.any():
                per_traj = block[:, steady_mask].mean(axis=1)
                stats.per_traj_steady[k] = per_traj
                m, s = _mean_stderr(per_traj)
                stats.steady_mean[k] = m
                stats.steady_stderr[k] = s
    return stats


# ----------------------------------------------------------------------
# mean-time ansatz fit

@dataclass
class FitResult:
    a: float
    b: float
    c: float
    cov: np.ndarray
    residuals: np.ndarray

    @property
    def b_err(self) -> float:
        return float(np.sqrt(self.cov[1, 1]))

    @property
    def c_err(self) -> float:
        return float(np.sqrt(self.cov[2, 2]))


def _mean_time_ansatz(L, a, b, c):
    return a + b * np.log(L / 2.0) + np.power(c, -L / 2.0)


def fit_mean_time(data, sigma=None) -> FitResult:
    """Least-squares fit of tau = a + b log(L/2) + c^(-L/2).

    ``data`` is a sequence of (L, mean_tau); ``sigma`` optional per-point
    errors.  Needs at least four system sizes.
    """
    data = sorted(data)
    if len(data) < 4:
        raise ValueError("need at least 4 system sizes")
    L = np.array([d[0] for d in data], dtype=np.float64)
    y = np.array([d[1] for d in data], dtype=np.float64)
    slope0 = max((y[-1] - y[0]) / (np.log(L[-1] / 2) - np.log(L[0] / 2)), 1e-3)
    p0 = (float(y[0] - slope0 * np.log(L[0] / 2)), float(slope0), 0.9)
    popt, pcov = optimize.curve_fit(
        _mean_time_ansatz, L, y, p0=p0, sigma=sigma,
        bounds=([-np.inf, 0.0, 1e-3], [np.inf, np.inf, 1.5]),
        maxfev=20000)
    resid = y - _mean_time_ansatz(L, *popt)
    if not np.all(np.isfinite(pcov)):
        raise RuntimeError(f"mean-time fit did not converge; residuals {resid}")
    return FitResult(float(popt[0]), float(popt[1]), float(popt[2]), pcov, resid)


# ----------------------------------------------------------------------
# finite-size data collapse

@dataclass
class CollapseFit:
    p_mc: float
    nu: float
    cost: float
    p_mc_err: float
    nu_err: float
    degenerate: bool = False


def _collapse_cost(points, p_mc: float, nu: float) -> float:
    """Master-curve residual: each point against the interpolation of the
    other sizes' points in the scaled coordinate x = (p_m - p_mc) L^(1/nu)."""
    xs = [(pm - p_mc) * L ** (1.0 / nu) for L, pm, y, s in points]
    cost = 0.0
    used = 0
    for i, (L_i, pm_i, y_i, s_i) in enumerate(points):
        ref = [(xs[j], points[j][2], points[j][3])
               for j in range(len(points)) if points[j][0] != L_i]
        ref.sort()
        rx = np.array([r[0] for r in ref])
        ry = np.array([r[1] for r in ref])
        rs = np.array([r[2] for r in ref])
        x = xs[i]
        if x < rx[0] or x > rx[-1]:
            continue
        k = int(np.searchsorted(rx, x))
        k = max(1, min(k, len(rx) - 1))
        w = (x - rx[k - 1]) / (rx[k] - rx[k - 1]) if rx[k] > rx[k - 1] else 0.5
        yhat = (1 - w) * ry[k - 1] + w * ry[k]
        shat2 = ((1 - w) * rs[k - 1]) ** 2 + (w * rs[k]) ** 2
        cost += (y_i - yhat) ** 2 / (s_i**2 + shat2 + 1e-18)
        used += 1
    if used < max(4, len(points) // 4):
        return np.inf
    return cost / used


def data_collapse(points, nu_starts=(0.8, 1.0, 1.3, 1.8),
                  bootstrap: int = 40, seed: int = 0) -> CollapseFit:
    """Fit (p_m^c, nu) by collapsing I3(L, p_m) onto a master curve.

    ``points``: sequence of (L, p_m, value, stderr) covering at least three
    sizes.  Derivative-free minimization from a grid of starts; parametric
    bootstrap over the point values supplies the confidence intervals.
    """
    points = [tuple(map(float, p)) for p in points]
    sizes = sorted({p[0] for p in points})
    if len(sizes) < 3:
        raise ValueError("need at least 3 system sizes")
    if max(sizes) < 4 * min(sizes):
        raise ValueError("sizes must span at least a factor of 4")
    pms = sorted({p[1] for p in points})

    def objective(theta, pts):
        p_mc, nu = theta
        if not (pms[0] - 0.5 <= p_mc <= pms[-1] + 0.5) or not (0.2 <= nu <= 10.0):
            return np.inf
        if not (0.0 < p_mc < 1.0):
            return np.inf
        return _collapse_cost(pts, p_mc, nu)

    def minimize(pts, starts):
        best = None
        for x0 in starts:
            res = optimize.minimize(
                objective, x0=list(x0), args=(pts,),
                method="Nelder-Mead",
                options={"xatol": 1e-4, "fatol": 1e-8, "maxiter": 800})
            if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
                best = res
        if best is None:
            raise RuntimeError("collapse search found no feasible optimum")
        return best

    grid = [(pm0, nu0) for pm0 in np.linspace(pms[0], pms[-1], 5)
            for nu0 in nu_starts]
    best = minimize(points, grid)
    p_mc, nu = float(best.x[0]), float(best.x[1])

    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(bootstrap):
        pts = [(L, pm, y + s * rng.standard_normal(), s)
               for L, pm, y, s in points]
        try:
            res = minimize(pts, [(p_mc, nu)])  # restart from the optimum
        except RuntimeError:
            continue
        boots.append(res.x)
    if boots:
        boots = np.array(boots)
        p_err = float(boots[:, 0].std(ddof=1)) if len(boots) > 1 else math.nan
        n_err = float(boots[:, 1].std(ddof=1)) if len(boots) > 1 else math.nan
    else:
        p_err = n_err = math.nan

    # degenerate landscape: cost flat over a broad nu range
    probe = [objective([p_mc, nu_try], points)
             for nu_try in (max(0.3, nu / 2), nu, nu * 2)]
    degenerate = (np.isfinite(probe[0]) and np.isfinite(probe[2])
                  and max(probe) - min(probe) < 1e-3 * (1 + abs(probe[1])))
    return CollapseFit(p_mc, nu, float(best.fun), p_err, n_err, degenerate)
