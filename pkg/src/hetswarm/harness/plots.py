"""Plot-ready projections of a sweep summary.

Each family picks its x column(s) from the summary and groups the remaining
varying parameters into a ``series`` label such as ``classes.fast.count=45``.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Any, Callable, Iterable, Union

from .sweep import write_csv

STATS = ["xi_mean", "xi_sd", "theta_mean", "theta_sd"]


def _num(v: Any) -> Any:
    if not isinstance(v, str):
        return v
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def _classes(row: dict) -> list[str]:
    names = []
    for key in row:
        if key.startswith("classes.") and key.endswith(".count"):
            names.append(key.split(".")[1])
    return names


def _first_active(field: str) -> Callable[[dict], Any]:
    def get(row):
        for name in _classes(row):
            if row[f"classes.{name}.count"] > 0:
                return row[f"classes.{name}.{field}"]
        return math.nan
    return get


def _class_field(name: str, field: str) -> Callable[[dict], Any]:
    return lambda row: row.get(f"classes.{name}.{field}", 0 if field == "count" else math.nan)


# family -> (derived x columns, parameter columns absorbed by them, extra columns)
FAMILIES: dict[str, tuple[dict[str, Callable[[dict], Any]], tuple[str, ...], list[str]]] = {
    "connectivity": ({"k": _first_active("k")}, ("classes.*.k",), STATS),
    "memory": ({"t_mem": _first_active("t_mem")}, ("classes.*.t_mem",), STATS),
    "composition": (
        {"fast_count": _class_field("fast", "count")},
        ("classes.*.count", "N", "density"),
        STATS,
    ),
    "density": (
        {"N": lambda r: r["N"], "side_length": lambda r: r["arena.side_length"], "density": lambda r: r["density"]},
        ("arena.side_length", "density"),
        STATS,
    ),
    "differentiated_k": (
        {"k_f": _class_field("fast", "k"), "k_s": _class_field("slow", "k")},
        ("classes.*.k",),
        STATS,
    ),
    "engagement-tracking": ({"k": _first_active("k")}, ("classes.*.k",), ["theta_mean", "xi_mean"]),
    "memory-speed": ({"t_mem": _first_active("t_mem")}, ("classes.*.t_mem",), STATS),
}


def _absorbed(col: str, patterns: tuple[str, ...]) -> bool:
    for p in patterns:
        if p.startswith("classes.*."):
            if col.startswith("classes.") and col.endswith("." + p.split(".")[-1]):
                return True
        elif col == p:
            return True
    return False


def read_summary(path) -> list[dict[str, Any]]:
    with open(path, newline="") as fh:
        return [{k: _num(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def project(rows: Iterable[dict[str, Any]], family: str) -> tuple[list[str], list[dict[str, Any]]]:
    """Header and rows of one family's plot table."""
    if family not in FAMILIES:
        raise ValueError(f"unknown plot family {family!r}; choose from {', '.join(FAMILIES)}")
    xs, absorbed, extra = FAMILIES[family]
    rows = [{k: _num(v) for k, v in r.items()} for r in rows]
    ignore = {"point", "runs", "failed", *STATS}
    varying = []
    if rows:
        for col in rows[0]:
            if col in ignore or _absorbed(col, absorbed):
                continue
            if len({repr(r.get(col)) for r in rows}) > 1:
                varying.append(col)
    if family == "engagement-tracking":
        header = ["series", *extra, *xs]
    else:
        header = ["series", *xs, *extra]
    out = []
    for r in rows:
        rec = {"series": ";".join(f"{c}={r[c]}" for c in varying)}
        rec.update({name: get(r) for name, get in xs.items()})
        rec.update({c: r.get(c) for c in extra})
        out.append(rec)
    out.sort(key=lambda d: (d["series"], *[d[x] for x in xs]))
    return header, out


def _render(path: Path, family: str, header: list[str], rows: list[dict[str, Any]]) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series: dict[str, list[dict]] = {}
    for r in rows:
        series.setdefault(r["series"], []).append(r)
    if family == "engagement-tracking":
        fig, ax = plt.subplots(figsize=(5, 4))
        for name, rs in series.items():
            sc = ax.scatter([r["theta_mean"] for r in rs], [r["xi_mean"] for r in rs],
                            c=[r["k"] for r in rs], cmap="Greys", edgecolors="k", label=name or None)
        if rows:
            fig.colorbar(sc, ax=ax, label="k")
        ax.set_xlabel("engagement ratio")
        ax.set_ylabel("tracking performance")
    else:
        x = header[1 + (2 if family == "density" else 0)]
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
        for name, rs in series.items():
            for ax, m in zip(axes, ("xi", "theta")):
                ax.errorbar([r[x] for r in rs], [r[f"{m}_mean"] for r in rs],
                            yerr=[0 if math.isnan(r[f"{m}_sd"]) else r[f"{m}_sd"] for r in rs],
                            marker="o", capsize=2, label=name or None)
        for ax, label in zip(axes, ("tracking performance", "engagement ratio")):
            ax.set_xlabel(x)
            ax.set_ylabel(label)
            if family == "density":
                ax.set_xscale("log")
        if any(series):
            axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def emit_plot_data(
    summary: Union[str, Path, Iterable[dict[str, Any]]],
    family: str,
    out_dir,
    svg: bool = False,
) -> list[Path]:
    """Write ``<family>.csv`` (and ``<family>.svg``) for a summary table or file."""
    rows = read_summary(summary) if isinstance(summary, (str, Path)) else list(summary)
    header, table = project(rows, family)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / f"{family}.csv"]
    write_csv(written[0], header, table)
    if svg:
        written.append(out / f"{family}.svg")
        _render(written[1], family, header, table)
    return written
