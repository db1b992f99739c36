#!/usr/bin/env python3
"""Batch figure renderer for districting ensemble outputs.

Consumes the aggregate CSVs written by `districting analyze` (never raw
JSONL) and renders one figure per invocation:

  histogram    value,count                     -> bar chart
  boxplot      rank,p1,p25,p50,p75,p99         -> ranked-share box plots
  scatter-mean x,mean_y,count                  -> mean trace with count-sized dots
  side-by-side two value,count files           -> paired comparison bars

The enacted plan, when given, is drawn as a distinct cross marker tagged with
gid "enacted" so its presence is checkable in SVG output.
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

# Pin the bits of state that would otherwise make SVG output run-dependent.
plt.rcParams["svg.hashsalt"] = "districting-plots"

KINDS = ("histogram", "boxplot", "scatter-mean", "side-by-side")


class SchemaError(ValueError):
    """Input CSV does not match the declared schema for the figure kind."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    out: str
    enacted: tuple[float, ...] = ()
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind '{self.kind}'")
        expected_inputs = 2 if self.kind == "side-by-side" else 1
        if len(self.inputs) != expected_inputs:
            raise SchemaError(
                f"kind '{self.kind}' needs {expected_inputs} input file(s), got {len(self.inputs)}"
            )


def read_csv_columns(path, required: tuple[str, ...]) -> dict[str, list[float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = tuple(reader.fieldnames or ())
        missing = [c for c in required if c not in names]
        if missing:
            raise SchemaError(f"'{path}': missing column(s) {missing}, found {list(names)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"'{path}': no data rows")
    out: dict[str, list[float]] = {c: [] for c in required}
    for i, row in enumerate(rows):
        for c in required:
            try:
                out[c].append(float(row[c]))
            except (TypeError, ValueError):
                raise SchemaError(f"'{path}' row {i + 2}: column '{c}' is not numeric")
    return out


def _enacted_cross(ax, x, y):
    ax.plot(
        x, y, marker="x", markersize=12, markeredgewidth=2.5,
        color="crimson", linestyle="none", zorder=5, label="enacted",
    )[0].set_gid("enacted")


def _draw_histogram(ax, spec: FigureSpec):
    data = read_csv_columns(spec.inputs[0], ("value", "count"))
    values, counts = data["value"], data["count"]
    width = 0.8 * min(
        (b - a for a, b in zip(values, values[1:])), default=1.0
    )
    ax.bar(values, counts, width=width, color="#5b8bd0", edgecolor="white")
    if spec.enacted:
        _enacted_cross(ax, spec.enacted[0], max(counts) * 0.5)
        ax.axvline(spec.enacted[0], color="crimson", linewidth=1, linestyle="--", zorder=4)


def _draw_boxplot(ax, spec: FigureSpec):
    cols = ("rank", "p1", "p25", "p50", "p75", "p99")
    data = read_csv_columns(spec.inputs[0], cols)
    stats = []
    for i in range(len(data["rank"])):
        p1, p25, p50, p75, p99 = (data[c][i] for c in cols[1:])
        if not p1 <= p25 <= p50 <= p75 <= p99:
            raise SchemaError(
                f"rank {data['rank'][i]:g}: percentile columns out of order "
                f"({p1}, {p25}, {p50}, {p75}, {p99})"
            )
        # Whiskers span exactly the p1-p99 columns; nothing is recomputed.
        stats.append(
            {
                "label": f"{data['rank'][i]:g}",
                "whislo": p1,
                "q1": p25,
                "med": p50,
                "q3": p75,
                "whishi": p99,
                "fliers": [],
            }
        )
    ax.bxp(stats, showfliers=False, patch_artist=True,
           boxprops={"facecolor": "#aac4e8"}, medianprops={"color": "#1f3b66"})
    if spec.enacted:
        if len(spec.enacted) != len(stats):
            raise SchemaError(
                f"enacted overlay has {len(spec.enacted)} values for {len(stats)} ranks"
            )
        _enacted_cross(ax, range(1, len(stats) + 1), spec.enacted)


def _draw_scatter_mean(ax, spec: FigureSpec):
    data = read_csv_columns(spec.inputs[0], ("x", "mean_y", "count"))
    order = sorted(range(len(data["x"])), key=lambda i: data["x"][i])
    xs = [data["x"][i] for i in order]
    ys = [data["mean_y"][i] for i in order]
    counts = [data["count"][i] for i in order]
    peak = max(counts)
    sizes = [20 + 180 * c / peak for c in counts]
    ax.scatter(xs, ys, s=sizes, color="#9db9dd", alpha=0.8, label="count-weighted mean")
    ax.plot(xs, ys, color="#1f4f9c", linewidth=2, label="mean trace")
    if spec.enacted:
        if len(spec.enacted) != 2:
            raise SchemaError("scatter-mean enacted overlay needs exactly x,y")
        _enacted_cross(ax, spec.enacted[0], spec.enacted[1])


def _draw_side_by_side(ax, spec: FigureSpec):
    first = read_csv_columns(spec.inputs[0], ("value", "count"))
    second = read_csv_columns(spec.inputs[1], ("value", "count"))
    labels = spec.labels or (Path(spec.inputs[0]).stem, Path(spec.inputs[1]).stem)
    values = sorted(set(first["value"]) | set(second["value"]))
    lookup1 = dict(zip(first["value"], first["count"]))
    lookup2 = dict(zip(second["value"], second["count"]))
    width = 0.4 * min((b - a for a, b in zip(values, values[1:])), default=1.0)
    ax.bar([v - width / 2 for v in values], [lookup1.get(v, 0) for v in values],
           width=width, color="#5b8bd0", label=labels[0])
    ax.bar([v + width / 2 for v in values], [lookup2.get(v, 0) for v in values],
           width=width, color="#d08a5b", label=labels[1])
    ax.legend()
    if spec.enacted:
        top = max(max(first["count"]), max(second["count"]))
        _enacted_cross(ax, spec.enacted[0], top * 0.5)


_DRAWERS = {
    "histogram": _draw_histogram,
    "boxplot": _draw_boxplot,
    "scatter-mean": _draw_scatter_mean,
    "side-by-side": _draw_side_by_side,
}


def build_figure(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    _DRAWERS[spec.kind](ax, spec)
    if spec.title:
        ax.set_title(spec.title)
    if spec.xlabel:
        ax.set_xlabel(spec.xlabel)
    if spec.ylabel:
        ax.set_ylabel(spec.ylabel)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> None:
    fig = build_figure(spec)
    try:
        suffix = Path(spec.out).suffix.lower()
        metadata = {"Date": None} if suffix == ".svg" else None
        fig.savefig(spec.out, dpi=120, metadata=metadata)
    finally:
        plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="Render one ensemble figure from aggregate CSVs")
    ap.add_argument("--kind", required=True, choices=KINDS)
    ap.add_argument("--in", dest="inputs", nargs="+", required=True)
    ap.add_argument("--out", required=True, help="output image path (.png or .svg)")
    ap.add_argument("--enacted", default=None,
                    help="comma-separated enacted overlay values (kind-specific)")
    ap.add_argument("--title", default="")
    ap.add_argument("--xlabel", default="")
    ap.add_argument("--ylabel", default="")
    ap.add_argument("--labels", default=None, help="comma-separated series labels")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec = FigureSpec(
            kind=args.kind,
            inputs=tuple(args.inputs),
            out=args.out,
            enacted=tuple(float(v) for v in args.enacted.split(",")) if args.enacted else (),
            title=args.title,
            xlabel=args.xlabel,
            ylabel=args.ylabel,
            labels=tuple(args.labels.split(",")) if args.labels else (),
        )
        render(spec)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}")
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
