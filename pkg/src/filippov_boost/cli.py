"""Command-line front end.

Subcommands::

    filippov-boost simulate --a 0.2 --k 1.5 --x0 3.3 --y0 4.05 --z0 0 --out traj.csv
    filippov-boost classify --a 0.2 --k 1.5
    filippov-boost bifset --omega 1 --yr 4 --out bifset.json
    filippov-boost diagram --a 0.2 --k-min 1.3 --k-max 1.7 --out diagram.csv

Exit codes: 0 success, 2 usage or invalid parameters, 3 numerical failure.
Every file written is accompanied by ``<stem>.manifest.json``.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .bifurcation import (
    BifurcationError,
    bifurcation_set,
    classify_region,
    diagram_sweep,
    write_diagram_csv,
)
from .integrator import IntegrationError, SimConfig, simulate, write_trajectory_csv
from .model import ParameterError, Params
from .singularities import DegenerateConfiguration, pseudo_equilibrium, two_fold_point

log = logging.getLogger("filippov_boost")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


def _configure_logging():
    level = os.environ.get("FB_LOG_LEVEL", "warn").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    if level not in LOG_LEVELS:
        log.warning("unknown FB_LOG_LEVEL %r, using warn", level)


def read_config(path) -> dict[str, str]:
    """Parse a ``key=value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _params_group(sp, need_a=True, need_k=True):
    if need_a:
        sp.add_argument("--a", type=float, help="dimensionless load")
    if need_k:
        sp.add_argument("--k", type=float, help="dimensionless control gain")
    sp.add_argument("--omega", type=float, default=1.0, help="washout cut-off (default 1)")
    sp.add_argument("--yr", type=float, default=4.0, help="reference ratio V_ref/V_in (default 4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="filippov-boost", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="key=value file providing defaults for the subcommand flags")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate the nonsmooth converter and write a trajectory CSV")
    _params_group(sp)
    sp.add_argument("--x0", type=float)
    sp.add_argument("--y0", type=float)
    sp.add_argument("--z0", type=float)
    sp.add_argument("--tmax", type=float, default=1000.0)
    sp.add_argument("--rtol", type=float, default=1e-9)
    sp.add_argument("--atol", type=float, default=1e-11)
    sp.add_argument("--event-tol", type=float, default=1e-10)
    sp.add_argument("--max-step", type=float, default=math.inf)
    sp.add_argument("--out", default="trajectory.csv")

    sp = sub.add_parser("classify", help="print the singularity and region classification as JSON")
    _params_group(sp)

    sp = sub.add_parser("bifset", help="bifurcation set of the (a, k) plane as JSON")
    _params_group(sp, need_a=False, need_k=False)
    sp.add_argument("--a-min", type=float)
    sp.add_argument("--a-max", type=float)
    sp.add_argument("--k-min", type=float)
    sp.add_argument("--k-max", type=float)
    sp.add_argument("--res", type=int, default=200, help="homoclinic continuation steps across (a-, a+)")
    sp.add_argument("--grid-res", type=int, default=50, help="region grid points per axis")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--out", default="bifset.json")

    sp = sub.add_parser("diagram", help="one-parameter bifurcation diagram in k as CSV")
    _params_group(sp, need_k=False)
    sp.add_argument("--k-min", type=float, default=1.3)
    sp.add_argument("--k-max", type=float, default=1.7)
    sp.add_argument("--res", type=int, default=101)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", default="diagram.csv")
    return parser


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _apply_config(parser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    cmd = next((a for a in rest if not a.startswith("-")), None)
    if cmd is None:
        return
    sp = _subparser(parser, cmd)
    types = {a.dest: a.type for a in sp._actions if a.dest != "help"}
    unknown = set(cfg) - set(types)
    if unknown:
        raise UsageError(f"unknown config keys for {cmd}: {sorted(unknown)}")
    sp.set_defaults(**{k: (types[k](v) if types[k] else v) for k, v in cfg.items()})


def _write_manifest(out: Path, command: str, params: dict, tolerances: dict, outputs: list[Path]) -> Path:
    manifest = {
        "command": command,
        "params": params,
        "tolerances": tolerances,
        "determinism": "deterministic: no random numbers are used; identical inputs give identical files",
        "version": __version__,
        "outputs": [str(p) for p in outputs],
    }
    path = out.with_name(out.stem + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _params(args) -> Params:
    return Params(args.a, args.k, args.omega, args.yr)


def cmd_simulate(args) -> int:
    _require(args, "a", "k", "x0", "y0", "z0")
    p = _params(args)
    cfg = SimConfig(t_max=args.tmax, rel_tol=args.rtol, abs_tol=args.atol,
                    event_tol=args.event_tol, max_step=args.max_step)
    segments = simulate((args.x0, args.y0, args.z0), p, cfg)
    out = write_trajectory_csv(segments, args.out)
    _write_manifest(
        out, "simulate",
        {**asdict(p), "x0": args.x0, "y0": args.y0, "z0": args.z0},
        {k: v for k, v in asdict(cfg).items() if k != "max_segments"} | {"max_step": str(cfg.max_step)},
        [out],
    )
    log.info("wrote %s (%d segments, final event %s)", out, len(segments), segments[-1].event.value)
    return EXIT_OK


def classify_payload(p: Params) -> dict:
    q = pseudo_equilibrium(p)
    payload = {
        "params": asdict(p),
        "q": list(q.location),
        "q_region": q.region.value,
        "q_kind": q.kind.value,
        "k_H": q.quantities.k_H,
        "k_minus": q.quantities.k_minus,
        "k_plus": q.quantities.k_plus,
        "a_minus": q.quantities.a_minus,
        "a_plus": q.quantities.a_plus,
    }
    try:
        tf = two_fold_point(p)
        payload.update(two_fold=tf.kind.value, two_fold_location=[tf.x_t, tf.y_t, 0.0],
                       two_fold_feasible=tf.feasible)
    except DegenerateConfiguration as exc:
        payload.update(two_fold=None, two_fold_location=None, two_fold_feasible=False,
                       two_fold_note=str(exc))
    payload["region"] = classify_region(p)
    return payload


def cmd_classify(args) -> int:
    _require(args, "a", "k")
    print(json.dumps(classify_payload(_params(args)), indent=2))
    return EXIT_OK


def cmd_bifset(args) -> int:
    a_range = None
    if args.a_min is not None or args.a_max is not None:
        _require(args, "a_min", "a_max")
        a_range = (args.a_min, args.a_max)
    k_range = None
    if args.k_min is not None or args.k_max is not None:
        _require(args, "k_min", "k_max")
        k_range = (args.k_min, args.k_max)
    Params(0.5, 1.0, args.omega, args.yr)  # validates omega and y_r
    if args.res < 2 or args.grid_res < 2:
        raise UsageError("--res and --grid-res must be >= 2")
    bset = bifurcation_set(args.omega, args.yr, a_range=a_range, resolution=args.res, tol=args.tol,
                           grid_resolution=args.grid_res, k_range=k_range)
    out = Path(args.out)
    out.write_text(json.dumps(bset.to_json(), indent=1) + "\n")
    _write_manifest(out, "bifset",
                    {"omega": args.omega, "y_r": args.yr, "a_range": a_range, "k_range": k_range,
                     "res": args.res, "grid_res": args.grid_res},
                    {"homoclinic_tol": args.tol}, [out])
    if bset.failures:
        for f in bset.failures:
            log.error("continuation failed at a=%.6g: %s", f["a"], f["reason"])
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_diagram(args) -> int:
    _require(args, "a")
    Params(args.a, 1.0, args.omega, args.yr)
    if args.res < 1 or args.jobs < 1 or args.k_min <= 0 or args.k_max < args.k_min:
        raise UsageError("need --res >= 1, --jobs >= 1 and 0 < --k-min <= --k-max")
    records = diagram_sweep(args.a, args.omega, args.yr, (args.k_min, args.k_max), args.res, jobs=args.jobs)
    out = write_diagram_csv(records, args.out)
    _write_manifest(out, "diagram",
                    {"a": args.a, "omega": args.omega, "y_r": args.yr, "k_min": args.k_min,
                     "k_max": args.k_max, "res": args.res},
                    {"cycle_rtol": 1e-11, "cycle_atol": 1e-12}, [out])
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "classify": cmd_classify, "bifset": cmd_bifset, "diagram": cmd_diagram}


def main(argv=None) -> int:
    _configure_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError, DegenerateConfiguration, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, BifurcationError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
