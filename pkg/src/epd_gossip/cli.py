"""Command-line front end emitting figure-ready CSV data and verdicts.

Modes mirror the experiments: 1-d profile overlays, 2-d shape grids, the
alpha sweep, sharp-rate series, the acceptance battery, and a PDE-oracle
dump.  Output is data only (CSV/JSON); no plotting.

Exit codes: 0 success, 1 check failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .acceptance import run_all
from .engine import (
    resolve_filter,
    resolve_schedule,
    run_second_order,
    run_simple,
)
from .errors import ConfigError, GossipError, InvalidScheduleParametersError
from .oracles import (
    EpdSolution,
    HeatSolution,
    epd_eval,
    epd_filtered_on_lattice,
    heat_eval,
)
from .schedules import jacobi_general_schedule, jacobi_schedule
from .verify import local_epd_quad_points, sharp_rate_estimate

PROFILE_DEFAULT_ROUNDS = (15, 50, 200)
SHAPE2D_DEFAULT_ROUND = 30
ALPHA_SWEEP_DEFAULTS = (0.25, 0.5, 0.75)
RATES_DEFAULT_MAX_ROUND = 200


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, (str, int)) else _fmt(c) for c in row])


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _resolve_filter_cfg(spec):
    try:
        return resolve_filter(spec)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot resolve filter {spec!r}: {exc}") from exc


def _resolve_schedule_cfg(spec, dim):
    try:
        return resolve_schedule(spec, dim)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot resolve schedule {spec!r}: {exc}") from exc


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _threads(args) -> int:
    n = int(getattr(args, "threads", 1) or 1)
    if n < 1:
        raise ConfigError("--threads must be >= 1")
    if n > 1:
        try:
            import numba

            numba.set_num_threads(n)
        except Exception:
            pass
    return n


def cmd_profile(args) -> int:
    """1-d overlays: iterates against their limiting densities per round."""
    cfg = _load_config(args)
    filt = _resolve_filter_cfg(cfg.get("filter", "lazy-1d"))
    if filt.dim != 1:
        raise ConfigError("profile experiment requires a 1-d filter")
    rounds = sorted(int(n) for n in cfg.get("rounds", PROFILE_DEFAULT_ROUNDS))
    if any(n < 1 for n in rounds):
        raise ConfigError("profile rounds must be >= 1")
    out = _out_dir(args)
    n_max = max(rounds)
    simple = run_simple(filt, n_max, snapshot_rounds=set(rounds))
    schedule = jacobi_schedule(1)
    jacobi = run_second_order(filt, schedule, n_max, snapshot_rounds=set(rounds))
    q = float(filt.covariance[0, 0])
    quad_override = cfg.get("quad_points")
    written = []
    for n in rounds:
        heat = HeatSolution(1, filt.covariance, float(n), verify_mass=False)
        epd = EpdSolution(0.5, 1, filt.covariance, float(n), verify_mass=False)
        m_quad = quad_override or local_epd_quad_points(1, float(n))
        filtered = epd_filtered_on_lattice(epd, n, m_quad)
        xs = simple.snapshot(n)
        xj = jacobi.snapshot(n)
        rows = []
        for v in range(-n, n + 1):
            rows.append(
                (
                    v,
                    xs.value_at((v,)),
                    heat_eval(heat, [float(v)]),
                    xj.value_at((v,)),
                    epd_eval(epd, [float(v)]),
                    filtered.value_at((v,)),
                )
            )
        path = out / f"profile_n{n}.csv"
        _write_csv(
            path,
            ["v", "x_n_simple", "heat_oracle", "x_n_jacobi", "epd_oracle", "epd_filtered"],
            rows,
        )
        written.append(str(path))
    print("\n".join(written))
    return 0


def cmd_shape2d(args) -> int:
    """Dense 2-d grids of the simple and accelerated iterates at one round."""
    cfg = _load_config(args)
    filt = _resolve_filter_cfg(cfg.get("filter", "triangular"))
    if filt.dim != 2:
        raise ConfigError("shape2d experiment requires a 2-d filter")
    n = int(cfg.get("rounds", SHAPE2D_DEFAULT_ROUND))
    if n < 1:
        raise ConfigError("shape2d round must be >= 1")
    out = _out_dir(args)
    simple = run_simple(filt, n, snapshot_rounds={n}).snapshot(n)
    jacobi = run_second_order(
        filt, jacobi_schedule(2), n, snapshot_rounds={n}
    ).snapshot(n)
    written = []
    for tag, snap in (("simple", simple), ("jacobi", jacobi)):
        rows = []
        m = snap.box_radius
        for v1 in range(-m, m + 1):
            for v2 in range(-m, m + 1):
                rows.append((v1, v2, snap.value_at((v1, v2))))
        path = out / f"shape2d_{tag}_n{n}.csv"
        _write_csv(path, ["v1", "v2", "value"], rows)
        written.append(str(path))
    params_path = out / "shape2d_params.json"
    with open(params_path, "w") as fh:
        json.dump(
            {
                "covariance": filt.covariance.tolist(),
                "t": n,
                "ellipse": "set of y with <y, Q^-1 y> <= t^2",
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    written.append(str(params_path))
    print("\n".join(written))
    return 0


def cmd_alpha_sweep(args) -> int:
    """Profiles of the (alpha, 0) iterations with their general-EPD oracles."""
    cfg = _load_config(args)
    filt = _resolve_filter_cfg(cfg.get("filter", "lazy-1d"))
    if filt.dim != 1:
        raise ConfigError("alpha-sweep experiment requires a 1-d filter")
    alphas = [float(a) for a in cfg.get("alphas", ALPHA_SWEEP_DEFAULTS)]
    n = int(cfg.get("rounds", 200))
    out = _out_dir(args)
    written = []
    for alpha in alphas:
        if alpha <= filt.dim / 2.0 - 0.5:
            print(
                f"warning: alpha={alpha:g} is outside the proven range "
                f"alpha > d/2 - 1/2; running anyway",
                file=sys.stderr,
            )
        try:
            sched = jacobi_general_schedule(alpha, 0.0)
        except InvalidScheduleParametersError as exc:
            raise ConfigError(str(exc)) from exc
        snap = run_second_order(filt, sched, n, snapshot_rounds={n}).snapshot(n)
        oracle = None
        if alpha > filt.dim / 2.0 - 1.0:
            oracle = EpdSolution(alpha, 1, filt.covariance, float(n), verify_mass=False)
        rows = []
        for v in range(-n, n + 1):
            u = epd_eval(oracle, [float(v)]) if oracle is not None else math.nan
            rows.append((v, snap.value_at((v,)), u))
        path = out / f"alpha_sweep_a{alpha:g}_n{n}.csv"
        _write_csv(path, ["v", "x_n", "epd_oracle"], rows)
        written.append(str(path))
    print("\n".join(written))
    return 0


def cmd_rates(args) -> int:
    """Sharp-rate series: empirical l2 decay against the predicted constant."""
    cfg = _load_config(args)
    filt = _resolve_filter_cfg(cfg.get("filter", "triangular"))
    n_max = int(cfg.get("rounds", RATES_DEFAULT_MAX_ROUND))
    schedule = _resolve_schedule_cfg(cfg.get("schedule", "jacobi"), filt.dim)
    if schedule is None:
        raise ConfigError("rates experiment needs a second-order schedule")
    out = _out_dir(args)
    series = sharp_rate_estimate(filt, schedule, range(1, n_max + 1))
    const = series.predicted_constant
    rows = [
        (row.n, row.l2_sq, const / row.n**filt.dim, row.ratio) for row in series.rows
    ]
    path = out / "rates.csv"
    _write_csv(path, ["n", "l2_sq", "predicted", "ratio"], rows)
    print(path)
    return 0 if series.verdict else 1


def cmd_oracle_dump(args) -> int:
    """Evaluate the damped-wave oracle and its band-limited samples on a box."""
    cfg = _load_config(args)
    try:
        alpha = float(cfg["alpha"])
        dim = int(cfg["dim"])
        t = float(cfg["t"])
        box = int(cfg["box_radius"])
    except KeyError as exc:
        raise ConfigError(f"oracle-dump config needs key {exc}") from exc
    covariance = np.asarray(cfg.get("covariance", np.eye(dim).tolist()), dtype=float)
    quad = cfg.get("quad_points") or local_epd_quad_points(dim, t)
    sol = EpdSolution(alpha, dim, covariance, t, verify_mass=dim <= 2)
    filtered = epd_filtered_on_lattice(sol, box, quad)
    out = _out_dir(args)
    rows = []
    for idx in np.ndindex(*filtered.values.shape):
        vertex = tuple(int(i) - box for i in idx)
        u = epd_eval(sol, np.asarray(vertex, dtype=float))
        rows.append((*vertex, u, float(filtered.values[idx])))
    header = [f"index_{i + 1}" for i in range(dim)] + ["u", "u_filtered"]
    path = out / "oracle_dump.csv"
    _write_csv(path, header, rows)
    print(path)
    return 0


def cmd_verify_all(args) -> int:
    """Run the named acceptance checks and write a JSON summary."""
    cfg = _load_config(args)
    overrides = {}
    if "local_clt_filter" in cfg:
        overrides["local_clt_filter"] = str(cfg["local_clt_filter"])
    only = cfg.get("checks")
    threads = _threads(args)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    t0 = time.perf_counter()
    try:
        results = run_all(
            overrides, max_workers=1 if threads == 1 else min(threads, 4), only=only
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    elapsed = time.perf_counter() - t0
    passed = all(r.passed for r in results)
    summary = {
        "metadata": {
            "started": started,
            "elapsed_s": round(elapsed, 3),
            "threads": threads,
            "check_runtimes_s": {r.name: round(r.runtime_s, 3) for r in results},
        },
        "passed": passed,
        "checks": [r.to_json() for r in results],
    }
    out = _out_dir(args)
    path = out / "verify_all.json"
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, default=str)
        fh.write("\n")
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  ({r.runtime_s:.1f}s)")
    print(path)
    return 0 if passed else 1


COMMANDS = {
    "profile": cmd_profile,
    "shape2d": cmd_shape2d,
    "alpha-sweep": cmd_alpha_sweep,
    "rates": cmd_rates,
    "verify-all": cmd_verify_all,
    "oracle-dump": cmd_oracle_dump,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epd-gossip",
        description="Gossip iterations on integer lattices and their PDE scaling limits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", help="JSON experiment configuration file")
        p.add_argument("--out", default="epd-gossip-out", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _threads(args)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GossipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
