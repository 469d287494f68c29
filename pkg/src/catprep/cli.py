"""Command-line front end: simulate | predict | validate | figure.

Experiments are described by a YAML config (grid of parameter points plus
run settings); command-line flags override file values.  Every output file
embeds the config hash and seed, and reruns of an identical config produce
byte-identical data files.

Exit codes: 0 ok, 1 validation or configuration error, 2 budget refusal.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__, analytics, validate
from .ensemble import PointConfig, run_ensemble
from .protocols import ProtocolParams

DEFAULT_BUDGET = 1e9

_CONFIG_DEFAULTS = {
    "protocol": {
        "lattice": "chain",
        "gate_set": "zz",
        "backend": "stabilizer",
        "theta": 1.0,
        "gamma_x": 0.0,
        "decoder": False,
        "halting": False,
        "halting_fidelity": 0.99,
    },
    "grid": {
        "L": [8],
        "p_u": [1.0],
        "p_m": [1.0],
    },
    "run": {
        "trajectories": 100,
        "t_max": 1000,
        "seed": None,
        "workers": 1,
        "target": "cat_x",
        "stop_at_target": True,
        "fixed_layers": None,
        "observables": [],
        "series_stride": 1,
        "series_start": 1,
        "equilibration_constant": 4.0,
    },
    "output": {
        "path": "results.csv",
        "format": "csv",
    },
    "budget": {
        "max_layer_site_ops": DEFAULT_BUDGET,
    },
}


class CliError(Exception):
    """Configuration or validation failure (exit code 1)."""


class BudgetError(Exception):
    """Refused by the layer-site budget guard (exit code 2)."""


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".10g")
    return str(v)


def _deep_merge(base: dict, override: dict) -> dict:
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in base.items()}
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(_CONFIG_DEFAULTS)
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise CliError(f"cannot read config: {exc}")
        except yaml.YAMLError as exc:
            raise CliError(f"config parse error in {path}: {exc}")
        if not isinstance(user, dict):
            raise CliError(f"{path}: top level must be a mapping")
        unknown = set(user) - set(cfg)
        if unknown:
            raise CliError(f"{path}: unknown config sections {sorted(unknown)}")
        cfg = _deep_merge(cfg, user)
    cfg = _deep_merge(cfg, overrides)
    if cfg["run"]["seed"] is None:
        raise CliError("a seed is mandatory (config run.seed or --seed)")
    return cfg


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()


def expand_points(cfg: dict) -> list[PointConfig]:
    proto = cfg["protocol"]
    run = cfg["run"]
    grid = cfg["grid"]

    def as_list(v):
        return list(v) if isinstance(v, (list, tuple)) else [v]

    points = []
    combos = itertools.product(
        as_list(grid["L"]), as_list(grid["p_u"]), as_list(grid["p_m"]),
        as_list(grid.get("theta", proto["theta"])),
        as_list(grid.get("gamma_x", proto["gamma_x"])))
    for pid, (L, p_u, p_m, theta, gamma_x) in enumerate(combos):
        params = ProtocolParams(
            p_u=float(p_u), p_m=float(p_m), theta=float(theta),
            gamma_x=float(gamma_x), gate_set=proto["gate_set"],
            decoder=bool(proto["decoder"]), halting=bool(proto["halting"]),
            halting_fidelity=float(proto["halting_fidelity"]),
            t_max=int(run["t_max"]), backend=proto["backend"])
        target = run["target"]
        points.append(PointConfig(
            lattice_kind=proto["lattice"], L=int(L), params=params,
            trajectories=int(run["trajectories"]), seed=int(run["seed"]),
            point_id=pid,
            target_kind=None if target in (None, "none") else target,
            stop_at_target=bool(run["stop_at_target"]),
            fixed_layers=run["fixed_layers"],
            series_observables=tuple(run["observables"]),
            series_stride=int(run["series_stride"]),
            series_start=int(run["series_start"]),
            equilibration_constant=float(run["equilibration_constant"]),
            workers=int(run["workers"])))
    return points


def budget_estimate(points: list[PointConfig]) -> float:
    total = 0.0
    for p in points:
        layers = p.fixed_layers if p.fixed_layers is not None else p.params.t_max
        total += float(p.trajectories) * layers * p.lattice().n_sites
    return total


def guard_budget(cfg: dict, points: list[PointConfig]) -> None:
    budget = float(cfg["budget"]["max_layer_site_ops"])
    est = budget_estimate(points)
    if est > budget:
        raise BudgetError(
            f"estimated {est:.3e} layer-site operations exceeds the budget "
            f"{budget:.3e}; lower t_max/trajectories or raise "
            f"budget.max_layer_site_ops")


# ----------------------------------------------------------------------
# simulate

_POINT_COLUMNS = [
    "config_hash", "seed", "point_id", "lattice", "L", "p_u", "p_m", "theta",
    "gamma_x", "gate_set", "decoder", "halting", "backend", "trajectories",
    "censored", "tau_mean", "tau_stderr", "tau_zz_mean", "tau_zz_stderr",
    "tau_z2_mean", "tau_z2_stderr",
]


def _point_row(chash: str, st) -> dict:
    cfg = st.config
    p = cfg.params
    row = {
        "config_hash": chash, "seed": cfg.seed, "point_id": cfg.point_id,
        "lattice": cfg.lattice_kind, "L": cfg.L, "p_u": p.p_u, "p_m": p.p_m,
        "theta": p.theta, "gamma_x": p.gamma_x, "gate_set": p.gate_set,
        "decoder": p.decoder, "halting": p.halting, "backend": p.backend,
        "trajectories": st.n_traj, "censored": st.tau_censored,
        "tau_mean": st.tau_mean, "tau_stderr": st.tau_stderr,
        "tau_zz_mean": st.tau_zz_mean, "tau_zz_stderr": st.tau_zz_stderr,
        "tau_z2_mean": st.tau_z2_mean, "tau_z2_stderr": st.tau_z2_stderr,
    }
    for k in sorted(st.steady_mean):
        row[f"steady_{k}"] = st.steady_mean[k]
        row[f"steady_{k}_stderr"] = st.steady_stderr[k]
    return row


def write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


def write_rows(path: Path, rows: list[dict], columns: list[str],
               fmt: str) -> None:
    if fmt == "csv":
        write_csv(path, rows, columns)
    else:
        payload = [{c: row.get(c) for c in columns} for row in rows]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, default=_fmt)
            fh.write("\n")


def write_manifest(path: Path, cfg: dict, chash: str, stats, wall: float,
                   outputs: list[str]) -> None:
    manifest = {
        "schema_version": 1,
        "config": cfg,
        "config_hash": chash,
        "seed": int(cfg["run"]["seed"]),
        "versions": {
            "catprep": __version__,
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
        "wall_time_s": wall,
        "points": [{
            "point_id": s.config.point_id,
            "lattice": s.config.lattice_kind,
            "L": s.config.L,
            "p_u": s.config.params.p_u,
            "p_m": s.config.params.p_m,
            "theta": s.config.params.theta,
            "gamma_x": s.config.params.gamma_x,
            "trajectories": s.n_traj,
            "censored": s.tau_censored,
        } for s in stats],
        "outputs": outputs,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")


def cmd_simulate(args) -> int:
    overrides: dict = {"run": {}, "output": {}}
    if args.seed is not None:
        overrides["run"]["seed"] = args.seed
    if args.workers is not None:
        overrides["run"]["workers"] = args.workers
    if args.t_max is not None:
        overrides["run"]["t_max"] = args.t_max
    if args.trajectories is not None:
        overrides["run"]["trajectories"] = args.trajectories
    if args.out is not None:
        overrides["output"]["path"] = args.out
    if args.format is not None:
        overrides["output"]["format"] = args.format
    cfg = load_config(args.config, overrides)
    points = expand_points(cfg)
    guard_budget(cfg, points)
    chash = config_hash(cfg)

    t0 = time.monotonic()
    stats = [run_ensemble(p) for p in points]
    wall = time.monotonic() - t0

    out = Path(cfg["output"]["path"])
    fmt = cfg["output"]["format"]
    if fmt not in ("csv", "json"):
        raise CliError(f"unknown output format {fmt!r}")
    columns = list(_POINT_COLUMNS)
    extra = sorted({k for s in stats for k in s.steady_mean})
    for k in extra:
        columns += [f"steady_{k}", f"steady_{k}_stderr"]
    rows = [_point_row(chash, s) for s in stats]
    write_rows(out, rows, columns, fmt)
    outputs = [str(out)]

    series_rows = []
    for s in stats:
        for k in s.config.series_observables:
            if k not in s.series_mean:
                continue
            for t, m, e in zip(s.sample_times, s.series_mean[k],
                               s.series_stderr[k]):
                series_rows.append({
                    "config_hash": chash, "seed": s.config.seed,
                    "point_id": s.config.point_id, "t": int(t),
                    "observable": k, "mean": float(m), "stderr": float(e)})
    if series_rows:
        spath = out.with_name(out.stem + "_series" + out.suffix)
        write_rows(spath, series_rows,
                   ["config_hash", "seed", "point_id", "t", "observable",
                    "mean", "stderr"], fmt)
        outputs.append(str(spath))

    write_manifest(out.with_name(out.stem + "_manifest.json"), cfg, chash,
                   stats, wall, outputs)
    print(f"wrote {', '.join(outputs)} ({len(points)} points, "
          f"wall {wall:.1f}s)")
    return 0


# ----------------------------------------------------------------------
# predict

def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",")]


def _parse_ints(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",")]


def cmd_predict(args) -> int:
    kind = args.kind
    rows: list[dict] = []
    try:
        if kind == "naive":
            for L in _parse_ints(args.L):
                for p in _parse_floats(args.p):
                    rows.append({"L": L, "p": p, "value": analytics.tau_naive(L, p)})
            cols = ["L", "p", "value"]
        elif kind == "pm1":
            for L in _parse_ints(args.L):
                for pu in _parse_floats(args.p_u):
                    rows.append({"L": L, "p_u": pu,
                                 "value": analytics.mean_time_pm1(L, pu)})
            cols = ["L", "p_u", "value"]
        elif kind == "pu1":
            for L in _parse_ints(args.L):
                for pm in _parse_floats(args.p_m):
                    rows.append({"L": L, "p_m": pm,
                                 "value": analytics.mean_time_pu1(L, pm)})
            cols = ["L", "p_m", "value"]
        elif kind == "fidelity":
            for L in _parse_ints(args.L):
                for p in _parse_floats(args.p):
                    rows.append({"L": L, "p": p, "phi": args.phi,
                                 "value": analytics.tau_fidelity(args.phi, p, L)})
            cols = ["L", "p", "phi", "value"]
        elif kind == "markov-cdf":
            for t in _parse_ints(args.t):
                for pu in _parse_floats(args.p_u):
                    for pm in _parse_floats(args.p_m):
                        rows.append({"t": t, "p_u": pu, "p_m": pm,
                                     "value": analytics.cdf_zz(t, pu, pm)})
            cols = ["t", "p_u", "p_m", "value"]
        elif kind == "pX":
            for pu in _parse_floats(args.p_u):
                for pm in _parse_floats(args.p_m):
                    rows.append({"p_u": pu, "p_m": pm,
                                 "value": analytics.p_x(pu, pm)})
            cols = ["p_u", "p_m", "value"]
        elif kind == "tauZ2":
            for L in _parse_ints(args.L):
                for pu in _parse_floats(args.p_u):
                    for pm in _parse_floats(args.p_m):
                        rows.append({"L": L, "p_u": pu, "p_m": pm,
                                     "value": analytics.tau_z2(L, pu, pm)})
            cols = ["L", "p_u", "p_m", "value"]
        elif kind == "lieb":
            for L in _parse_ints(args.L):
                for pm in _parse_floats(args.p_m):
                    rows.append({"L": L, "p_m": pm,
                                 "value": analytics.mean_time_lieb(L, pm)})
            cols = ["L", "p_m", "value"]
        elif kind == "coin-toss":
            rng = np.random.default_rng(args.seed or 0)
            for L in _parse_ints(args.L):
                for pm in _parse_floats(args.p_m):
                    rows.append({"L": L, "p_m": pm, "runs": args.runs,
                                 "value": analytics.coin_toss_square(
                                     L, pm, rng, args.runs)})
            cols = ["L", "p_m", "runs", "value"]
        elif kind == "table1":
            for pu in _parse_floats(args.p_u):
                for pm in _parse_floats(args.p_m):
                    for i, row in enumerate(
                            analytics.local_circuit_table(pu, pm), start=1):
                        rows.append({
                            "p_u": pu, "p_m": pm, "row": i,
                            "probability": row.probability,
                            "unitary_12": row.unitaries[0],
                            "unitary_23": row.unitaries[1],
                            "measured": row.measured,
                            "deterministic": row.deterministic})
            cols = ["p_u", "p_m", "row", "probability", "unitary_12",
                    "unitary_23", "measured", "deterministic"]
        else:
            raise CliError(f"unknown prediction kind {kind!r}")
    except ValueError as exc:
        raise CliError(str(exc))

    if args.out:
        write_rows(Path(args.out), rows, cols, args.format or "csv")
        print(f"wrote {args.out}")
    else:
        print("\t".join(cols))
        for row in rows:
            print("\t".join(_fmt(row.get(c, "")) for c in cols))
    return 0


# ----------------------------------------------------------------------
# validate

def cmd_validate(args) -> int:
    report = validate.run_suite(args.suite)
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    if not report["passed"]:
        failing = [c["name"] for c in report["checks"] if not c["passed"]]
        print(f"FAILED checks: {failing}", file=sys.stderr)
        return 1
    return 0


# ----------------------------------------------------------------------
# figure data

def _figure_config(figure_id: str, traj: int | None, seed: int,
                   workers: int) -> dict:
    """Config dict for each figure's data; trajectories scale with --trajectories."""
    specs = {
        "fig3": {
            "protocol": {"lattice": "chain"},
            "grid": {"L": [512], "p_u": [0.5], "p_m": [0.5]},
            "run": {"trajectories": traj or 100, "t_max": 200,
                    "fixed_layers": 160, "stop_at_target": False,
                    "observables": ["s_half", "zz"], "series_stride": 2},
        },
        "fig4a": {
            "protocol": {"lattice": "chain"},
            "grid": {"L": [8, 16, 32, 64, 128, 256],
                     "p_u": [0.4, 0.6, 0.8], "p_m": [1.0]},
            "run": {"trajectories": traj or 200, "t_max": 2000},
            "analytic": lambda L, pu, pm: analytics.mean_time_pm1(L, pu),
        },
        "fig4b": {
            "protocol": {"lattice": "chain"},
            "grid": {"L": [8, 16, 32, 64, 128, 256], "p_u": [1.0],
                     "p_m": [0.4, 0.6, 0.8]},
            "run": {"trajectories": traj or 200, "t_max": 2000},
            "analytic": lambda L, pu, pm: analytics.mean_time_pu1(L, pm),
        },
        "fig5": {
            "protocol": {"lattice": "chain"},
            "grid": {"L": [8, 12, 16, 20], "p_u": [0.6, 0.8],
                     "p_m": [0.6, 0.8]},
            "run": {"trajectories": traj or 500, "t_max": 100000},
            "analytic": lambda L, pu, pm: analytics.combined_mean_time(L, pu, pm),
        },
        "fig7": {
            "protocol": {"lattice": "chain", "decoder": True},
            "grid": {"L": [8, 12, 16, 20, 24],
                     "p_u": [0.3, 0.5, 0.7, 0.9], "p_m": [0.8, 0.9]},
            "run": {"trajectories": traj or 300, "t_max": 100000},
            "analytic": lambda L, pu, pm: analytics.combined_mean_time(L, pu, pm),
        },
        "fig8": {
            "protocol": {"lattice": "chain", "gate_set": "zz+xx"},
            "grid": {"L": [96], "p_u": [0.9],
                     "p_m": [0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9]},
            "run": {"trajectories": traj or 60, "stop_at_target": False,
                    "target": "none", "fixed_layers": 6 * 96, "t_max": 1000,
                    "observables": ["i3", "i2", "yy", "parity"],
                    "series_stride": 12, "series_start": 4 * 96 + 1},
        },
        "fig9": {
            "protocol": {"lattice": "chain", "backend": "dense"},
            "grid": {"L": [16], "p_u": [0.6, 1.0], "p_m": [1.0, 0.8],
                     "theta": [1.0, 1.5, 2.0]},
            "run": {"trajectories": traj or 10, "stop_at_target": False,
                    "target": "none", "fixed_layers": 60, "t_max": 100,
                    "observables": ["zz", "parity", "i2"], "series_stride": 2},
        },
        "fig10": {
            "protocol": {"lattice": "chain", "halting": True},
            "grid": {"L": [8, 16, 32, 48, 64, 96, 128],
                     "p_u": [0.6, 0.8], "p_m": [0.6, 0.8]},
            "run": {"trajectories": traj or 300, "t_max": 100000},
            "analytic": lambda L, pu, pm: analytics.combined_mean_time(L, pu, pm),
        },
        "fig12": {
            "protocol": {"lattice": "chain", "backend": "dense"},
            "grid": {"L": [14], "p_u": [1.0], "p_m": [0.8],
                     "gamma_x": [0.0, 0.5]},
            "run": {"trajectories": traj or 10, "stop_at_target": False,
                    "target": "none", "fixed_layers": 60, "t_max": 100,
                    "observables": ["zz", "parity", "i2"], "series_stride": 2},
        },
        "fig13a": {
            "protocol": {"lattice": "lieb"},
            "grid": {"L": [4, 6, 8], "p_u": [1.0], "p_m": [0.4, 0.6, 0.8]},
            "run": {"trajectories": traj or 300, "t_max": 10000,
                    "target": "toric_code"},
            "analytic": lambda L, pu, pm: analytics.mean_time_lieb(L, pm),
        },
        "fig14a": {
            "protocol": {"lattice": "square"},
            "grid": {"L": [4, 6, 8], "p_u": [1.0], "p_m": [0.6, 0.8, 0.95]},
            "run": {"trajectories": traj or 300, "t_max": 10000,
                    "target": "xu_moore"},
            "analytic": lambda L, pu, pm: analytics.coin_toss_square(
                L, pm, np.random.default_rng(seed), 2000),
        },
        "fig16": {
            "protocol": {"lattice": "lieb", "gate_set": "zz+xx"},
            "grid": {"L": [4, 8], "p_u": [0.9],
                     "p_m": [0.1, 0.2, 0.3, 0.5, 0.7, 0.9]},
            "run": {"trajectories": traj or 40, "stop_at_target": False,
                    "target": "none", "fixed_layers": None,
                    "t_max": 1000, "observables": ["s_half", "i3", "yy"],
                    "series_stride": 2, "series_start": 1},
            "per_L_layers": lambda L: 6 * L,
        },
        "transition1d": {
            "protocol": {"lattice": "chain", "gate_set": "zz+xx"},
            "grid": {"L": [16, 32, 64],
                     "p_m": [0.2, 0.24, 0.28, 0.32, 0.36], "p_u": [0.8]},
            "run": {"trajectories": traj or 100, "stop_at_target": False,
                    "target": "none", "fixed_layers": None, "t_max": 2000,
                    "observables": ["s_half", "i3"], "series_stride": 4,
                    "series_start": 1},
            "per_L_layers": lambda L: 6 * L,
        },
    }
    if figure_id not in specs:
        raise CliError(
            f"unknown figure id {figure_id!r}; available: {sorted(specs)}")
    spec = dict(specs[figure_id])
    spec.setdefault("run", {})
    spec["run"].setdefault("seed", seed)
    spec["run"]["seed"] = seed
    spec["run"]["workers"] = workers
    return spec


def cmd_figure(args) -> int:
    spec = _figure_config(args.figure_id, args.trajectories,
                          args.seed if args.seed is not None else 2718,
                          args.workers or 1)
    analytic = spec.pop("analytic", None)
    per_L_layers = spec.pop("per_L_layers", None)
    cfg = _deep_merge(_CONFIG_DEFAULTS, spec)
    points = expand_points(cfg)
    if per_L_layers is not None:
        for p in points:
            p.fixed_layers = int(per_L_layers(p.L))
            p.series_start = int(p.equilibration_layers()) + 1
    guard_budget(cfg, points)
    chash = config_hash(_deep_merge(cfg, {"figure": {"id": args.figure_id}}))

    stats = [run_ensemble(p) for p in points]
    out = Path(args.out or f"{args.figure_id}.csv")
    columns = ["config_hash", "seed", "figure", "point_id", "L", "p_u",
               "p_m", "theta", "gamma_x", "mean_tau", "stderr", "censored"]
    rows = []
    for s in stats:
        row = {
            "config_hash": chash, "seed": s.config.seed,
            "figure": args.figure_id, "point_id": s.config.point_id,
            "L": s.config.L, "p_u": s.config.params.p_u,
            "p_m": s.config.params.p_m, "theta": s.config.params.theta,
            "gamma_x": s.config.params.gamma_x,
            "mean_tau": s.tau_mean, "stderr": s.tau_stderr,
            "censored": s.tau_censored,
        }
        if analytic is not None:
            row["analytic"] = analytic(s.config.L, s.config.params.p_u,
                                       s.config.params.p_m)
        for k in sorted(s.steady_mean):
            row[f"steady_{k}"] = s.steady_mean[k]
            row[f"steady_{k}_stderr"] = s.steady_stderr[k]
        rows.append(row)
    extra = sorted({k for r in rows for k in r if k not in columns})
    write_rows(out, rows, columns + extra, "csv")
    outputs = [str(out)]

    series_rows = []
    for s in stats:
        for k in s.config.series_observables:
            if k not in s.series_mean:
                continue
            for t, m, e in zip(s.sample_times, s.series_mean[k],
                               s.series_stderr[k]):
                series_rows.append({
                    "config_hash": chash, "seed": s.config.seed,
                    "figure": args.figure_id,
                    "point_id": s.config.point_id,
                    "L": s.config.L, "p_u": s.config.params.p_u,
                    "p_m": s.config.params.p_m,
                    "theta": s.config.params.theta,
                    "gamma_x": s.config.params.gamma_x,
                    "t": int(t), "observable": k,
                    "mean": float(m), "stderr": float(e)})
    if series_rows:
        spath = out.with_name(out.stem + "_series" + out.suffix)
        write_rows(spath, series_rows,
                   ["config_hash", "seed", "figure", "point_id", "L", "p_u",
                    "p_m", "theta", "gamma_x", "t", "observable", "mean",
                    "stderr"], "csv")
        outputs.append(str(spath))
    print(f"wrote {', '.join(outputs)}")
    return 0


# ----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="catprep",
                     description="stochastic preparation of long-range "
                                 "entangled states: simulation and analytics")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an ensemble described by a config")
    sim.add_argument("--config", help="YAML experiment config")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--out")
    sim.add_argument("--format", choices=["csv", "json"])
    sim.add_argument("--t-max", type=int, dest="t_max")
    sim.add_argument("--trajectories", type=int)
    sim.set_defaults(func=cmd_simulate)

    pred = sub.add_parser("predict", help="evaluate analytic predictions")
    pred.add_argument("kind", choices=["naive", "pm1", "pu1", "fidelity",
                                       "markov-cdf", "pX", "tauZ2", "lieb",
                                       "coin-toss", "table1"])
    pred.add_argument("--L", default="8")
    pred.add_argument("--p", default="0.5")
    pred.add_argument("--p-u", dest="p_u", default="0.5")
    pred.add_argument("--p-m", dest="p_m", default="0.5")
    pred.add_argument("--phi", type=float, default=0.99)
    pred.add_argument("--t", default="1")
    pred.add_argument("--runs", type=int, default=10000)
    pred.add_argument("--seed", type=int)
    pred.add_argument("--out")
    pred.add_argument("--format", choices=["csv", "json"])
    pred.set_defaults(func=cmd_predict)

    val = sub.add_parser("validate", help="run a cross-validation suite")
    val.add_argument("suite", choices=sorted(validate.SUITES))
    val.add_argument("--out")
    val.set_defaults(func=cmd_validate)

    fig = sub.add_parser("figure", help="emit plot-ready data for a figure")
    fig.add_argument("figure_id")
    fig.add_argument("--out")
    fig.add_argument("--seed", type=int)
    fig.add_argument("--workers", type=int)
    fig.add_argument("--trajectories", type=int)
    fig.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except BudgetError as exc:
        print(f"budget refusal: {exc}", file=sys.stderr)
        return 2
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
