"""Replicated parameter sweeps and their CSV tables.

``runs.csv`` has one row per run and ``summary.csv`` one row per grid point.
Both are sorted by (grid point, replicate) and contain no timing, so their
bytes depend only on the sweep.  Wall-clock times go to ``timing.csv``.
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from ..core import SimConfig
from ..engine import run_simulation
from .config import SweepSpec, flatten

log = logging.getLogger(__name__)

STAT_COLUMNS = ("runs", "failed", "xi_mean", "xi_sd", "theta_mean", "theta_sd")


@dataclass(frozen=True)
class RunRecord:
    point: int
    replicate: int
    config: SimConfig
    xi: Optional[float]
    theta: Optional[float]
    per_target_xi: tuple[float, ...]
    wall_time_s: float
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


def _execute(job: tuple[int, int, SimConfig]) -> RunRecord:
    point, rep, cfg = job
    try:
        res = run_simulation(cfg)
    except Exception as e:  # recorded per run; the sweep carries on
        return RunRecord(point, rep, cfg, None, None, (), 0.0, f"{type(e).__name__}: {e}")
    return RunRecord(point, rep, cfg, res.xi, res.theta, res.per_target_xi, res.wall_time_s)


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _sd(xs: list[float]) -> float:
    return statistics.stdev(xs) if len(xs) > 1 else math.nan


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    records: tuple[RunRecord, ...]

    @property
    def n_errors(self) -> int:
        return sum(not r.ok for r in self.records)

    def by_point(self) -> list[list[RunRecord]]:
        out: list[list[RunRecord]] = [[] for _ in self.spec.points]
        for r in self.records:
            out[r.point].append(r)
        return out

    def values(self, point: int, metric: str = "xi") -> list[float]:
        return [getattr(r, metric) for r in self.by_point()[point] if r.ok]

    # -- tables ------------------------------------------------------------

    def param_columns(self) -> list[str]:
        return [c for c in flatten(self.spec.base) if c != "seed"]

    def run_rows(self) -> list[dict[str, Any]]:
        rows = []
        for r in self.records:
            row = {"point": r.point, "replicate": r.replicate, "seed": r.config.seed}
            row.update({k: v for k, v in flatten(r.config).items() if k != "seed"})
            row["xi"] = r.xi
            row["theta"] = r.theta
            row["per_target_xi"] = ";".join(repr(x) for x in r.per_target_xi)
            row["errors"] = r.error
            rows.append(row)
        return rows

    def summary_rows(self) -> list[dict[str, Any]]:
        rows = []
        for i, (cfg, recs) in enumerate(zip(self.spec.points, self.by_point())):
            xi = [r.xi for r in recs if r.ok]
            th = [r.theta for r in recs if r.ok]
            row = {"point": i}
            row.update({k: v for k, v in flatten(cfg).items() if k != "seed"})
            row.update(
                runs=len(recs),
                failed=len(recs) - len(xi),
                xi_mean=statistics.fmean(xi) if xi else math.nan,
                xi_sd=_sd(xi),
                theta_mean=statistics.fmean(th) if th else math.nan,
                theta_sd=_sd(th),
            )
            rows.append(row)
        return rows

    def write(self, out_dir) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        params = self.param_columns()
        files = {
            "runs": (out / "runs.csv", ["point", "replicate", "seed", *params, "xi", "theta", "per_target_xi", "errors"],
                     self.run_rows()),
            "summary": (out / "summary.csv", ["point", *params, *STAT_COLUMNS], self.summary_rows()),
            "timing": (out / "timing.csv", ["point", "replicate", "seed", "wall_time_s"],
                       [{"point": r.point, "replicate": r.replicate, "seed": r.config.seed,
                         "wall_time_s": r.wall_time_s} for r in self.records]),
        }
        for path, header, rows in files.values():
            write_csv(path, header, rows)
        return {k: v[0] for k, v in files.items()}


def write_csv(path, header: list[str], rows: list[dict[str, Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row.get(h)) for h in header])


def run_sweep(spec: SweepSpec, parallelism: int = 1, out_dir=None) -> SweepResult:
    """Execute every (grid point, replicate) run; failures land in ``errors``.

    Runs are independent, so ``parallelism`` worker processes change only the
    wall time, never the tables.
    """
    jobs = list(spec.runs())
    log.info("sweep %s: %d runs on %d worker(s)", spec.name, len(jobs), parallelism)
    if parallelism <= 1 or len(jobs) <= 1:
        records = [_execute(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(_execute, jobs, chunksize=1))
    records.sort(key=lambda r: (r.point, r.replicate))
    result = SweepResult(spec, tuple(records))
    if out_dir is not None:
        result.write(out_dir)
    for r in records:
        if not r.ok:
            log.warning("point %d replicate %d failed: %s", r.point, r.replicate, r.error)
    return result
