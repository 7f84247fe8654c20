"""Command line front end.

Every command reads a JSON config, writes its artifacts into --out, and drops
a manifest.json describing the run (no timestamps, so reruns are
byte-identical). Exit codes: 0 success, 1 input or config problem, 2 a
verification check failed, 3 an internal invariant broke.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .config import LoadedConfig, load_config
from .distributed import render_trace, run_distributed_greedy, trace_csv_rows
from .errors import DualschedError, InternalInvariantError
from .model import (
    ENUMERATION_GUARD,
    enumerate_maximal_independent_sets,
    interference_degree_link,
    interference_set,
)
from .plots import plot_dual_trajectory, plot_prices
from .scheduling import centralized_greedy, optimal_schedule, schedule_weight
from .solver import (
    MODE_DISTRIBUTED,
    MODE_GREEDY,
    MODE_OPTIMAL,
    MODES,
    bracket_dual_optimum,
    cesaro_report,
    run_solver,
)
from .verify import run_verification

FORMAT_CSV = "csv"
FORMAT_TABLE = "table"


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage, which this tool reserves
    for failed verification; route usage errors through the normal
    input-error path instead."""

    def error(self, message):
        raise DualschedError(message)


def _csv_text(rows) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _table_text(rows) -> str:
    rows = [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows
    )


def _emit(rows, fmt: str):
    if fmt == FORMAT_TABLE:
        print(_table_text(rows))
    else:
        print(_csv_text(rows), end="")


def _write_manifest(outdir: Path, command: str, cfg: LoadedConfig | None,
                    seed, outputs: list[str]):
    manifest = {
        "tool": "dualsched",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config_path": None if cfg is None else cfg.path,
        "config_sha256": None if cfg is None else cfg.sha256,
        "outputs": sorted(outputs),
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _solver_config(cfg: LoadedConfig, args):
    overrides = {}
    if getattr(args, "mode", None):
        overrides["mode"] = args.mode
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return dataclasses.replace(cfg.solver, **overrides) if overrides else cfg.solver


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    solver_cfg = _solver_config(cfg, args)
    out = _outdir(args)
    if cfg.display_capacity is not None:
        print(f"rates are fractions of the nominal link capacity C = {cfg.display_capacity!r}")
    traj = run_solver(cfg.net, cfg.k, solver_cfg)
    traj.write_csv(out / "trajectory.csv")
    outputs = ["trajectory.csv", "band_report.txt", "bracket_report.txt"]

    band = None
    if len(cfg.net.links) <= ENUMERATION_GUARD:
        bracket = bracket_dual_optimum(cfg.net, cfg.k, solver_cfg)
        band = cesaro_report(traj, bracket.lower, traj.epsilon_mean,
                             d_star_upper=bracket.upper)
        (out / "bracket_report.txt").write_text(bracket.text() + "\n")
        (out / "band_report.txt").write_text(band.text() + "\n")
        print(f"dual optimum bracket: [{bracket.lower!r}, {bracket.upper!r}]")
        print(f"running average (exact dual): {band.band_quantity!r}")
        print(f"band: [{band.band_low!r}, {band.band_high!r}]  inside: {band.inside}")
    else:
        note = (f"unavailable: {len(cfg.net.links)} links exceeds the enumeration "
                f"guard of {ENUMERATION_GUARD}\n")
        (out / "bracket_report.txt").write_text(note)
        (out / "band_report.txt").write_text(note)
        print(f"running average (as-run dual): {traj.final_cesaro!r}")
        print("bracket and band skipped: network exceeds the enumeration guard")

    if not args.no_figures:
        plot_dual_trajectory(traj, out / "dual_trajectory.png", band)
        plot_prices(traj, out / "prices.png")
        outputs += ["dual_trajectory.png", "prices.png"]
    _write_manifest(out, "solve", cfg, solver_cfg.seed, outputs)
    print(f"iterations: {traj.iterations}  mode: {solver_cfg.mode}  "
          f"step: {solver_cfg.delta!r}")
    print(f"artifacts in {out}")
    return 0


def _require_prices(cfg: LoadedConfig, command: str):
    if cfg.prices is None:
        raise DualschedError(
            f"the {command} command needs a prices field in the config "
            f"({len(cfg.net.links)} values, one per link)"
        )
    return cfg.prices


def cmd_schedule(args) -> int:
    cfg = load_config(args.config)
    prices = _require_prices(cfg, "schedule")
    out = _outdir(args)
    mode = args.mode or MODE_DISTRIBUTED
    if mode == MODE_DISTRIBUTED:
        sched, _ = run_distributed_greedy(cfg.net, cfg.k, prices)
    elif mode == MODE_GREEDY:
        sched = centralized_greedy(cfg.net, cfg.k, prices)
    else:
        sched = optimal_schedule(cfg.net, cfg.k, prices)
    rows = [["link_id", "link", "alpha", "price", "weight"]]
    for l in sched.links:
        link = cfg.net.links[l]
        rows.append([l, link.name, repr(link.alpha), repr(float(prices[l])),
                     repr(link.alpha * float(prices[l]))])
    (out / "schedule.csv").write_text(_csv_text(rows))
    _write_manifest(out, "schedule", cfg, args.seed, ["schedule.csv"])
    _emit(rows, args.format)
    print(f"mode {mode} schedule: {sched.names(cfg.net)}  weight: {sched.weight!r}")
    return 0


def cmd_trace(args) -> int:
    cfg = load_config(args.config)
    prices = _require_prices(cfg, "trace")
    out = _outdir(args)
    sched, trace = run_distributed_greedy(cfg.net, cfg.k, prices)
    rendered = render_trace(trace)
    (out / "trace.txt").write_text(rendered + "\n")
    (out / "trace.csv").write_text(_csv_text(trace_csv_rows(trace)))
    _write_manifest(out, "trace", cfg, args.seed, ["trace.txt", "trace.csv"])
    if args.format == FORMAT_TABLE:
        print(rendered)
    else:
        print(_csv_text(trace_csv_rows(trace)), end="")
    print(f"rounds: {trace.rounds}")
    print(f"schedule: {sched.names(cfg.net)}  weight: {sched.weight!r}")
    return 0


def cmd_enumerate(args) -> int:
    cfg = load_config(args.config)
    out = _outdir(args)
    collection = enumerate_maximal_independent_sets(cfg.net, cfg.k)
    rows = [["set_index", "size", "link_ids", "links", "weight"]]
    for i, s in enumerate(collection.sets):
        weight = "" if cfg.prices is None else repr(schedule_weight(cfg.net, s, cfg.prices))
        rows.append([
            i, len(s),
            " ".join(str(l) for l in s),
            " ".join(cfg.net.links[l].name for l in s),
            weight,
        ])
    (out / "maximal_sets.csv").write_text(_csv_text(rows))
    _write_manifest(out, "enumerate", cfg, args.seed, ["maximal_sets.csv"])
    _emit(rows, args.format)
    print(f"{collection.count} maximal valid K-matchings (K={cfg.k})")
    return 0


def cmd_degree(args) -> int:
    cfg = load_config(args.config)
    out = _outdir(args)
    rows = [["link_id", "link", "interference_set_size", "degree"]]
    degrees = []
    for link in cfg.net.links:
        members = interference_set(cfg.net, link.id, cfg.k)
        d = interference_degree_link(cfg.net, link.id, cfg.k)
        degrees.append(d)
        rows.append([link.id, link.name, len(members), d])
    (out / "degree.csv").write_text(_csv_text(rows))
    _write_manifest(out, "degree", cfg, args.seed, ["degree.csv"])
    _emit(rows, args.format)
    print(f"graph interference degree: {max(degrees)} (K={cfg.k})")
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args.config) if args.config else None
    out = _outdir(args)
    checks = run_verification(
        seed=args.seed if args.seed is not None else 0,
        trials=args.trials,
        network=None if cfg is None else cfg.net,
        k=None if cfg is None else cfg.k,
        corrupt_tiebreak=args.corrupt_tiebreak,
    )
    lines = [c.line() for c in checks]
    (out / "verification.txt").write_text("\n".join(lines) + "\n")
    _write_manifest(out, "verify", cfg,
                    args.seed if args.seed is not None else 0, ["verification.txt"])
    for line in lines:
        print(line)
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"{len(failed)} of {len(checks)} checks failed")
        return 2
    print(f"all {len(checks)} checks passed")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="dualsched",
        description="Joint scheduling, routing, and rate control by price iteration.",
    )
    parser.add_argument("--version", action="version", version=f"dualsched {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required,
                        help="path to a JSON problem config")
        sp.add_argument("--out", default="out", help="artifact directory (default: out)")
        sp.add_argument("--seed", type=int, default=None, help="seed recorded in the manifest")
        sp.add_argument("--format", choices=[FORMAT_CSV, FORMAT_TABLE], default=FORMAT_CSV,
                        help="stdout rendering of the main artifact")

    sp = sub.add_parser("solve", help="run the price iteration and report the dual trajectory")
    common(sp)
    sp.add_argument("--mode", choices=list(MODES), default=None,
                    help="scheduler: dgrd (distributed), grd (centralized greedy), opt")
    sp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("schedule", help="compute one schedule at the config prices")
    common(sp)
    sp.add_argument("--mode", choices=list(MODES), default=None,
                    help="scheduler (default dgrd)")
    sp.set_defaults(func=cmd_schedule)

    sp = sub.add_parser("trace", help="round-by-round state table of the distributed scheduler")
    common(sp)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("enumerate", help="list every maximal valid K-matching")
    common(sp)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("degree", help="per-link and graph interference degree")
    common(sp)
    sp.set_defaults(func=cmd_degree)

    sp = sub.add_parser("verify", help="run property checks on random or fixed instances")
    common(sp, config_required=False)
    sp.add_argument("--trials", type=int, default=50, help="instances per suite (default 50)")
    sp.add_argument("--corrupt-tiebreak", action="store_true",
                    help="deliberately break the comparison order; the equivalence "
                         "check must fail (negative control)")
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InternalInvariantError as e:
        print(f"internal invariant violated: {e}", file=sys.stderr)
        return 3
    except DualschedError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def run():
    sys.exit(main())
