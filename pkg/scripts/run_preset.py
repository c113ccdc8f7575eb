"""Run one or more preset sweeps and write their CSV tables and plot data.

    python scripts/run_preset.py memory density --steps 50000 --parallelism 4 --out results

Each preset lands in ``<out>/<preset>/`` (runs.csv, summary.csv, timing.csv)
with its plot table and, when matplotlib is installed, an SVG chart under
``<out>/<preset>/plots/``.
"""

import argparse
import importlib.util
import logging
from pathlib import Path

from hetswarm.harness import PRESETS, emit_plot_data, get_preset, run_sweep
from hetswarm.harness.presets import DESK_STEPS, PAPER_STEPS


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("presets", nargs="*", help=f"default: all of {', '.join(PRESETS)}")
    p.add_argument("--steps", type=int, default=DESK_STEPS)
    p.add_argument("--paper-scale", action="store_true", help=f"use {PAPER_STEPS} steps")
    p.add_argument("--replicates", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("results"))
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    steps = PAPER_STEPS if args.paper_scale else args.steps
    svg = importlib.util.find_spec("matplotlib") is not None
    failed = 0
    for name in args.presets or list(PRESETS):
        preset = get_preset(name)
        spec = preset.spec(n_steps=steps, replicates=args.replicates, seed=args.seed)
        out = args.out / name
        result = run_sweep(spec, parallelism=args.parallelism, out_dir=out)
        failed += result.n_errors
        files = emit_plot_data(out / "summary.csv", preset.family, out / "plots", svg=svg)
        logging.info("%s: %d runs, %d failed, plots %s", name, len(result.records), result.n_errors,
                     ", ".join(f.name for f in files))
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
