"""Render hammerlab CSVs as SVG/PNG figures.

Three figure kinds, matching the CSV schemas the hammerlab CLI emits:

* ``area``     -- area_um2 vs rh_th, one series per tracker configuration
                  (log-log by default)
* ``capacity`` -- total_bits vs rh_th, same series (log-log by default)
* ``failprob`` -- failure probability vs ACTs per tREFI, one series per
                  (sampler, rh_th); the analytic column draws the line and
                  the Monte Carlo column the markers (log y by default)

This is a presentation layer only: no numbers are derived here beyond
axis transforms, and rendering is a pure function of (CSV, spec) -- the
same inputs produce byte-identical SVG output.

Invocation:
    render --csv <path> --kind <area|capacity|failprob> --out <path>
           [--logx] [--logy] [--filter col=value] ...
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "hammerfigs"

import matplotlib.pyplot as plt

KINDS = ("area", "capacity", "failprob")

REQUIRED_COLUMNS = {
    "area": ["algorithm", "storage", "technology", "rh_th", "entries", "total_bits", "area_um2"],
    "capacity": ["algorithm", "storage", "technology", "rh_th", "entries", "total_bits"],
    "failprob": ["sampler", "rh_th", "acts_per_trefi", "analytic", "mc_rate"],
}

DEFAULT_LOG = {"area": (True, True), "capacity": (True, True), "failprob": (False, True)}


class RenderError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str
    out_path: str
    logx: bool | None = None  # None: use the kind's default
    logy: bool | None = None
    filters: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}", 2)
        if not self.out_path.endswith((".svg", ".png")):
            raise RenderError("output must be .svg or .png", 2)

    def scales(self) -> tuple[bool, bool]:
        dx, dy = DEFAULT_LOG[self.kind]
        return (dx if self.logx is None else self.logx,
                dy if self.logy is None else self.logy)


def load_rows(spec: PlotSpec) -> list[dict]:
    try:
        with open(spec.csv_path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in REQUIRED_COLUMNS[spec.kind] if c not in header]
            if missing:
                raise RenderError(f"CSV is missing columns {missing} for kind {spec.kind}", 2)
            rows = list(reader)
    except OSError as e:
        raise RenderError(f"cannot read {spec.csv_path}: {e}", 2) from e
    for col, value in spec.filters:
        if col not in header:
            raise RenderError(f"filter column {col!r} not in CSV", 2)
        rows = [r for r in rows if r[col] == value]
    return rows


def _series_label_area(row: dict, dup_keys: set) -> str:
    base = f"{row['algorithm']}/{row['storage']}/{row['technology']}"
    if (row["algorithm"], row["storage"], row["technology"]) in dup_keys:
        return f"{row['algorithm']}[{row['entries']}]/{row['storage']}/{row['technology']}"
    return base


def build_series(spec: PlotSpec, rows: list[dict]) -> dict[str, dict]:
    """Labeled series: {label: {"x": [...], "y": [...], ...}}.

    Area/capacity rows with an empty value cell (warning records for
    unsupported combinations) are skipped.
    """
    series: dict[str, dict] = {}
    if spec.kind in ("area", "capacity"):
        ycol = "area_um2" if spec.kind == "area" else "total_bits"
        live = [r for r in rows if r[ycol] != ""]
        # two sketch shapes share (algorithm, storage, technology); split
        # such series by their entry count
        seen, dup_keys = set(), set()
        for r in live:
            key = (r["algorithm"], r["storage"], r["technology"], r["rh_th"])
            flat = key[:3]
            if key in seen:
                dup_keys.add(flat)
            seen.add(key)
        for r in live:
            label = _series_label_area(r, dup_keys)
            s = series.setdefault(label, {"x": [], "y": []})
            s["x"].append(float(r["rh_th"]))
            s["y"].append(float(r[ycol]))
    else:
        for r in rows:
            label = f"{r['sampler']} @ rh_th={r['rh_th']}"
            s = series.setdefault(label, {"x": [], "y": [], "mc": []})
            s["x"].append(float(r["acts_per_trefi"]))
            s["y"].append(float(r["analytic"]))
            s["mc"].append(float(r["mc_rate"]))
    for s in series.values():
        order = sorted(range(len(s["x"])), key=s["x"].__getitem__)
        for key in s:
            s[key] = [s[key][i] for i in order]
    if not series:
        raise RenderError("no data: no series left after filtering", 1)
    return series


AXIS_LABELS = {
    "area": ("RowHammer threshold", "per-bank area (um^2)"),
    "capacity": ("RowHammer threshold", "per-bank capacity (bits)"),
    "failprob": ("ACTs per tREFI", "failure probability"),
}


def render(spec: PlotSpec) -> dict[str, dict]:
    """Write the figure and return the plotted series."""
    rows = load_rows(spec)
    series = build_series(spec, rows)
    logx, logy = spec.scales()

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for label in sorted(series):
        s = series[label]
        (line,) = ax.plot(s["x"], s["y"], marker="o", markersize=3.5, label=label)
        if "mc" in s:
            ax.plot(s["x"], s["mc"], linestyle="none", marker="x",
                    color=line.get_color())
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    xlabel, ylabel = AXIS_LABELS[spec.kind]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7, ncols=2)
    fig.tight_layout()
    fig.savefig(spec.out_path, metadata={"Date": None} if spec.out_path.endswith(".svg") else None)
    plt.close(fig)
    return series


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render hammerlab CSV output as a figure"
    )
    parser.add_argument("--csv", required=True)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True)
    parser.add_argument("--logx", action="store_true", default=None)
    parser.add_argument("--logy", action="store_true", default=None)
    parser.add_argument("--filter", action="append", default=[],
                        metavar="COL=VALUE", help="keep rows where COL equals VALUE")
    args = parser.parse_args(argv)

    filters = []
    for expr in args.filter:
        if "=" not in expr:
            print(f"config error: bad filter {expr!r}, expected COL=VALUE", file=sys.stderr)
            return 2
        col, value = expr.split("=", 1)
        filters.append((col.strip(), value.strip()))

    try:
        spec = PlotSpec(csv_path=args.csv, kind=args.kind, out_path=args.out,
                        logx=args.logx, logy=args.logy, filters=tuple(filters))
        series = render(spec)
    except RenderError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    print(f"wrote {args.out} with {len(series)} series")
    return 0


if __name__ == "__main__":
    sys.exit(main())
