"""Command-line front end: ``mmblockage {analyze,simulate,hex,plan}``.

Every command writes CSV (to stdout or ``--out``). Parameters come from an
optional TOML ``--config`` and repeated ``--set name=value`` overrides, both
in CLI units (densities per km^2, angles in degrees). Exit codes: 0 on
success, 2 for invalid input, 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable

import numpy as np

from . import hexgrid, los, nlos, planner
from .config import CLI_UNITS, SweepSpec, load_config, params_from_cli, parse_axis, to_cli
from .los import InfeasibleTargetError
from .mobility import SimConfig, run_open_park_sim
from .params import ParameterError, SystemParams, derive
from .quadrature import QuadratureError
from .results import LOS_FIELDS, NLOS_FIELDS, SCHEMA_VERSION

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def fmt(value) -> str:
    """Deterministic text for a CSV cell; floats keep full precision."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class CsvOut:
    def __init__(self, stream):
        self.stream = stream
        self.writer = csv.writer(stream, lineterminator="\n")

    def comment(self, text: str) -> None:
        self.stream.write(f"# {text}\n")

    def row(self, values: Iterable) -> None:
        self.writer.writerow([fmt(v) for v in values])


def _column(name: str) -> str:
    unit = CLI_UNITS.get(name)
    return f"{name}[{unit}]" if unit else name


# --- analyze ----------------------------------------------------------------

def _analyze_point(args):
    model, params = args
    consts = derive(params)
    if model == "nlos":
        return nlos.nlos_report(consts).row()
    return los.los_report(consts, open_park=(model == "open-park")).row()


def cmd_analyze(params: SystemParams, sweep: SweepSpec, model: str, out: CsvOut,
                threads: int = 1) -> None:
    points = list(sweep.points(params))
    jobs = [(model, p) for _, p in points]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_analyze_point, jobs))
    else:
        rows = [_analyze_point(j) for j in jobs]
    fields = NLOS_FIELDS if model == "nlos" else LOS_FIELDS
    axis_names = [a.name for a in sweep.axes]
    out.row(["schema_version", "model", *map(_column, axis_names), *fields])
    for (point, _), row in zip(points, rows):
        out.row([SCHEMA_VERSION, model, *(point[n] for n in axis_names), *(row[f] for f in fields)])


# --- simulate ---------------------------------------------------------------

RUN_COLUMNS = ("run_id", "seed", "num_bs", "num_active", "covered", "num_blockers",
               "blocked_fraction", "frequency_hz", "num_events", "mean_duration_s")
SUMMARY_COLUMNS = ("prob_std_error", "freq_std_error", "duration_std_error",
                   "analytic_prob", "analytic_freq_hz", "analytic_duration_s")


def cmd_simulate(params: SystemParams, sim: SimConfig, out: CsvOut, threads: int = 1,
                 trace_out: CsvOut | None = None) -> None:
    result = run_open_park_sim(params, sim, workers=threads, trace=trace_out is not None)
    out.row(["schema_version", "row_type", *RUN_COLUMNS, *SUMMARY_COLUMNS])
    for r in result.runs:
        out.row([SCHEMA_VERSION, "run", r.run_id, r.seed, r.num_bs, r.num_active, r.covered,
                 r.num_blockers, r.blocked_fraction, r.frequency, r.num_events,
                 "" if math.isnan(r.mean_duration) else r.mean_duration,
                 *[""] * len(SUMMARY_COLUMNS)])
    consts = derive(params)
    analytic = (los.blockage_prob_open_park(consts)[1], los.expected_frequency(consts),
                los.expected_duration_los(consts))
    est = result.estimates
    out.row([SCHEMA_VERSION, "summary", "", sim.rng_seed, "", "", est["coverage"].point_estimate,
             "", est["prob"].point_estimate, est["freq"].point_estimate, "",
             est["duration"].point_estimate, est["prob"].std_error, est["freq"].std_error,
             est["duration"].std_error, *analytic])
    if trace_out is not None:
        trace_out.row(["run_id", "time_s", "link", "event"])
        for r in result.runs:
            for t, link, event in r.trace or ():
                trace_out.row([r.run_id, t, link, event])


# --- hex --------------------------------------------------------------------

def cmd_hex(params: SystemParams, ds: list[float], mode: str, out: CsvOut,
            n_grid: int = hexgrid.GRID_POINTS, sweep: SweepSpec = SweepSpec()) -> None:
    out.comment("hex cell: flat-top hexagon of circumradius d; "
                "density[BS/km^2] = 1e6 / (1.5 * sqrt(3) * d^2) with d in metres")
    axis_names = [a.name for a in sweep.axes]
    shown = [n for n in ("self_block_angle_omega", "blocker_density_lambda_B") if n not in axis_names]
    out.row(["schema_version", "mode", *map(_column, axis_names + shown), "d_m",
             "density[BS/km^2]", "block_prob", "max_excluded", "min_usable", "ppp_block_prob_cond"])
    for point, base in sweep.points(params):
        for d in ds:
            layout = hexgrid.build_layout(d)
            consts = derive(base.with_(bs_density_lambda_T=layout.bs_density))
            prob, details = hexgrid.hex_blockage_prob(layout, consts, mode=mode, n_grid=n_grid,
                                                      return_details=True)
            ppp = los.blockage_prob_open_park(consts)[1]
            out.row([SCHEMA_VERSION, mode, *(point[n] for n in axis_names),
                     *(to_cli(n, getattr(base, n)) for n in shown), d, layout.bs_density * 1e6,
                     prob, details["max_excluded"], details["min_usable"], ppp])


# --- plan -------------------------------------------------------------------

PLAN_COLUMNS = ("schema_version", "application", "model", "reliability", "max_latency_ms",
                "caching_allowed", "status", "required_density[BS/km^2]", "binding_constraint",
                "achieved_block_prob", "achieved_duration_s")


def cmd_plan(params: SystemParams, targets: list[planner.QosTarget], model: str,
             out: CsvOut) -> None:
    out.row(PLAN_COLUMNS)
    for t in targets:
        head = [SCHEMA_VERSION, t.name, model, t.reliability, t.max_latency_ms, t.caching_allowed]
        try:
            res = planner.plan_density(params, t, model)
        except InfeasibleTargetError as exc:
            best = exc.infimum or ("", "")
            out.row([*head, "infeasible", "", "", *best])
            continue
        out.row([*head, "ok", res.required_density, res.binding_constraint,
                 res.achieved_block_prob, res.achieved_duration_s])


def cmd_tradeoff(params: SystemParams, target: float, heights: list[float], model: str,
                 out: CsvOut, sweep: SweepSpec = SweepSpec()) -> None:
    axis_names = [a.name for a in sweep.axes]
    out.row(["schema_version", "model", *map(_column, axis_names), "target_block_prob",
             "height_bs_hT", "required_density[BS/km^2]"])
    for point, base in sweep.points(params):
        for h, dens in planner.height_density_tradeoff(base, target, heights, model):
            out.row([SCHEMA_VERSION, model, *(point[n] for n in axis_names), target, h, dens])


# --- argument handling ------------------------------------------------------

def _overrides(pairs: list[str]) -> dict[str, str]:
    values = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep:
            raise ParameterError(f"--set {pair!r}: expected name=value")
        values[name.strip()] = value.strip()
    return values


def _sweep_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sweep", action="append", default=[], metavar="AXIS",
                        help="name=min:max:count[:log] or name=v1,v2; repeatable, Cartesian product")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file: parameters in CLI units, optional [sweep]/[sim]")
    common.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                        help="override one parameter (CLI units); repeatable")
    common.add_argument("--seed", type=int, help="master RNG seed for randomized commands")
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker processes")

    ap = argparse.ArgumentParser(prog="mmblockage", description=__doc__.splitlines()[0],
                                 parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="closed-form statistics over a sweep")
    a.add_argument("--model", choices=("los", "nlos", "open-park"), default="los")
    _sweep_flag(a)

    s = sub.add_parser("simulate", parents=[common], help="random-waypoint Monte-Carlo, open park")
    s.add_argument("--runs", type=int)
    s.add_argument("--duration", type=float, help="seconds per run after warm-up")
    s.add_argument("--mode", choices=("exponential-mark", "geometric-disc"))
    s.add_argument("--arena", type=float, help="arena side (m)")
    s.add_argument("--trace", metavar="PATH", help="write the per-event block/unblock log here")

    h = sub.add_parser("hex", parents=[common], help="hexagonal deployment blockage probability")
    g = h.add_mutually_exclusive_group(required=True)
    g.add_argument("--d", type=float, nargs="+", help="half inter-site distance(s), m")
    g.add_argument("--density", type=float, nargs="+", help="BS density(ies), BS/km^2")
    h.add_argument("--mode", choices=("no-self", "worst-case-self"), default="no-self")
    h.add_argument("--grid", type=int, default=hexgrid.GRID_POINTS, help="UE grid points per axis")
    _sweep_flag(h)

    p = sub.add_parser("plan", parents=[common], help="BS density for QoS targets")
    p.add_argument("--qos", help="CSV: application,reliability_pct,max_latency_ms,caching_allowed")
    p.add_argument("--model", choices=planner.MODELS, default="open-park")
    p.add_argument("--heights", type=float, nargs="+", help="BS heights (m) for the height-density curve")
    p.add_argument("--target", type=float, default=1e-5, help="blockage probability for --heights")
    _sweep_flag(p)
    return ap


def _sim_config(cfg_sim: dict, args, seed: int) -> SimConfig:
    fields = dict(cfg_sim)
    if "move_time_bounds" in fields:
        fields["move_time_bounds"] = tuple(fields["move_time_bounds"])
    for key, attr in (("num_runs", "runs"), ("run_duration", "duration"),
                      ("blockage_mode", "mode"), ("arena_side", "arena")):
        if getattr(args, attr) is not None:
            fields[key] = getattr(args, attr)
    try:
        return SimConfig(rng_seed=seed, **fields)
    except TypeError as exc:
        raise ParameterError(f"[sim]: {exc}") from None


def run(argv: list[str] | None, stdout) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)
    params = params_from_cli(_overrides(args.set), cfg.params) if args.set else cfg.params
    threads = max(1, args.threads)

    with contextlib.ExitStack() as stack:
        stream = stack.enter_context(open(args.out, "w", newline="")) if args.out else stdout
        out = CsvOut(stream)
        sweep = SweepSpec(tuple(cfg.sweep.axes) + tuple(parse_axis(s) for s in getattr(args, "sweep", [])))
        if args.command == "analyze":
            cmd_analyze(params, sweep, args.model, out, threads)
        elif args.command == "simulate":
            seed = args.seed if args.seed is not None else cfg.sim.get("rng_seed")
            if seed is None:
                seed = int(np.random.SeedSequence().entropy % 2**63)
                out.comment(f"seed={seed} (auto-generated)")
            sim = _sim_config({k: v for k, v in cfg.sim.items() if k != "rng_seed"}, args, seed)
            trace = None
            if args.trace:
                trace = CsvOut(stack.enter_context(open(args.trace, "w", newline="")))
            cmd_simulate(params, sim, out, threads, trace)
        elif args.command == "hex":
            ds = args.d if args.d else [hexgrid.d_for_density(x * 1e-6) for x in args.density]
            cmd_hex(params, ds, args.mode, out, args.grid, sweep)
        elif args.command == "plan":
            if args.heights:
                cmd_tradeoff(params, args.target, args.heights, args.model, out, sweep)
            elif args.qos:
                cmd_plan(params, planner.read_qos_table(args.qos), args.model, out)
            else:
                raise ParameterError("plan needs --qos FILE or --heights H ...")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv, sys.stdout)
    except (ParameterError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (QuadratureError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
