"""Print the headline trends of a finished preset sweep from its summary.csv.

    python scripts/trend_report.py results/connectivity/summary.csv --family connectivity

For every series the script lists xi and theta against the family's x
column, marks the best x, and reports the Spearman correlation of each
metric with x.
"""

import argparse
from itertools import groupby
from pathlib import Path

from scipy.stats import spearmanr

from hetswarm.harness import FAMILIES
from hetswarm.harness.plots import project, read_summary


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("summary", type=Path)
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    args = p.parse_args()

    header, rows = project(read_summary(args.summary), args.family)
    x = header[1]
    for series, group in groupby(rows, key=lambda r: r["series"]):
        group = list(group)
        xs = [r[x] for r in group]
        xi = [r["xi_mean"] for r in group]
        th = [r["theta_mean"] for r in group]
        best = xs[xi.index(max(xi))]
        print(f"{series or '(single series)'}")
        for r in group:
            mark = "*" if r[x] == best else " "
            print(f"  {mark} {x}={r[x]!s:>8}  xi={r['xi_mean']:.4f}  theta={r['theta_mean']:.4f}")
        if len(group) > 2:
            print(f"    spearman(xi, {x})={spearmanr(xs, xi)[0]:+.3f}  spearman(theta, {x})={spearmanr(xs, th)[0]:+.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
