"""Command line front end: ``hetswarm run|sweep|plot|presets``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..core import ConfigError, SimConfig
from ..engine import run_simulation
from .config import SweepSpec, load_config
from .plots import FAMILIES, emit_plot_data
from .presets import PAPER_STEPS, PRESETS, get_preset
from .sweep import run_sweep

log = logging.getLogger("hetswarm")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return v


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hetswarm", description="Heterogeneous swarm search-and-track simulator.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML config or sweep file")
    common.add_argument("--seed", type=_u64, help="override the (base) seed")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--paper-scale", action="store_true", help=f"run {PAPER_STEPS} steps per run")

    r = sub.add_parser("run", parents=[common], help="single run; writes result.json")
    r.add_argument("--frames", action="store_true", help="also write frames.ndjson")
    r.add_argument("--frame-every", type=int, default=1)

    s = sub.add_parser("sweep", parents=[common], help="grid sweep; writes runs/summary/timing CSVs")
    s.add_argument("--preset", help="built-in sweep instead of --config")
    s.add_argument("--parallelism", type=int, default=1)
    s.add_argument("--replicates", type=int, help="override the replicate count")
    s.add_argument("--steps", type=int, help="override n_steps (e.g. for a quick look)")

    pl = sub.add_parser("plot", help="plot-ready tables from a summary.csv")
    pl.add_argument("summary", type=Path)
    pl.add_argument("--family", required=True, choices=sorted(FAMILIES))
    pl.add_argument("--out", type=Path, default=Path("plots"))
    pl.add_argument("--svg", action="store_true", help="also render an SVG chart")

    sub.add_parser("presets", help="list built-in experiment sweeps")
    return p


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else SimConfig()
    if isinstance(cfg, SweepSpec):
        raise ConfigError(f"{args.config} describes a sweep; use 'hetswarm sweep'")
    if args.seed is not None:
        cfg = cfg.with_updates(seed=args.seed)
    if args.paper_scale:
        cfg = cfg.with_updates(n_steps=PAPER_STEPS)
    args.out.mkdir(parents=True, exist_ok=True)
    if args.frames:
        with open(args.out / "frames.ndjson", "w") as fh:
            res = run_simulation(cfg, frames=fh, frame_every=args.frame_every)
    else:
        res = run_simulation(cfg)
    out = res.to_dict()
    out["wall_time_s"] = res.wall_time_s
    (args.out / "result.json").write_text(json.dumps(out, indent=2) + "\n")
    print(f"xi={res.xi:.4f} theta={res.theta:.4f} seed={res.seed} ({res.wall_time_s:.1f}s)")
    return 0


def _cmd_sweep(args) -> int:
    if (args.preset is None) == (args.config is None):
        raise ConfigError("sweep needs exactly one of --preset or --config")
    if args.preset:
        spec = get_preset(args.preset).spec()
    else:
        spec = load_config(args.config)
        if isinstance(spec, SimConfig):
            spec = SweepSpec(spec, (), 1, args.config.stem)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.paper_scale:
        changes["n_steps"] = PAPER_STEPS
    if args.steps is not None:
        changes["n_steps"] = args.steps
    if changes:
        spec = spec.with_base(**changes)
    if args.replicates is not None:
        spec = SweepSpec(spec.base, spec.axes, args.replicates, spec.name)
    result = run_sweep(spec, parallelism=args.parallelism, out_dir=args.out)
    print(f"{len(result.records)} runs, {result.n_errors} failed -> {args.out}")
    return 1 if result.n_errors else 0


def _cmd_plot(args) -> int:
    for path in emit_plot_data(args.summary, args.family, args.out, svg=args.svg):
        print(path)
    return 0


def _cmd_presets(args) -> int:
    width = max(map(len, PRESETS))
    for p in PRESETS.values():
        spec = p.spec()
        print(f"{p.name:<{width}}  {len(spec.points):>3} points  plot family {p.family:<20} {p.description}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "plot": _cmd_plot, "presets": _cmd_presets}[args.command]
    try:
        return handler(args)
    except (ConfigError, KeyError, ValueError, OSError, FloatingPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
