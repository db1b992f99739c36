"""Command-line workflows: validate, seed, run, analyze, diagnose.

Every command is deterministic given its flags; multiple chains are meant to
be launched as separate `run` invocations with distinct --rng-seed values.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from . import metrics as metrics_mod
from .chain import ChainConfig, make_rng, run_chain
from .graph import load_graph, validate_graph_file
from .metrics import MetricRecord
from .partition import (
    BalanceSpec,
    InfeasibleSeedError,
    max_deviation,
    plan_from_csv,
    read_plan_assignment,
    seed_plan,
    write_plan_csv,
)

SUMMARY_FORMAT_VERSION = 1
DEFAULT_SNAPSHOT_INTERVAL = 100_000


@dataclass(frozen=True)
class RunManifest:
    """Resolved inputs for one chain run."""

    graph_path: Path
    plan_path: Path
    config: ChainConfig
    elections: tuple[str, ...] | None
    out_path: Path
    snapshot_every: int
    snapshot_dir: Path | None

    @classmethod
    def from_args(cls, args) -> "RunManifest":
        graph_path = Path(args.graph)
        plan_path = Path(args.plan)
        for p in (graph_path, plan_path):
            if not p.exists():
                raise FileNotFoundError(f"input path does not exist: {p}")
        assignment = read_plan_assignment(plan_path)
        if not assignment:
            raise ValueError(f"plan file '{plan_path}' is empty")
        cfg = ChainConfig(
            weight=args.weight,
            tolerance=args.tol,
            steps=args.steps,
            rng_seed=args.rng_seed,
            k=max(assignment.values()) + 1,
        )
        elections = tuple(args.elections.split(",")) if args.elections else None
        return cls(
            graph_path=graph_path,
            plan_path=plan_path,
            config=cfg,
            elections=elections,
            out_path=Path(args.out),
            snapshot_every=args.snapshot_every,
            snapshot_dir=Path(args.snapshot_dir) if args.snapshot_dir else None,
        )


def cmd_validate(args) -> int:
    violations = validate_graph_file(args.graph)
    json.dump({"valid": not violations, "violations": violations}, sys.stderr)
    sys.stderr.write("\n")
    if violations:
        print(f"INVALID: {len(violations)} violation(s); first: {violations[0]}")
        return 1
    print("OK")
    return 0


def cmd_seed(args) -> int:
    g = load_graph(args.graph)
    spec = BalanceSpec.for_graph(g, args.districts, args.tol)
    rng = make_rng(args.rng_seed)
    try:
        plan = seed_plan(g, args.districts, spec, rng)
    except InfeasibleSeedError as exc:
        print(f"infeasible seed: {exc}", file=sys.stderr)
        return 1
    write_plan_csv(plan, args.out)
    print(f"max_deviation: {max_deviation(plan, spec):.6f}")
    print(f"district_populations: {list(plan.district_populations)}")
    return 0


def cmd_run(args) -> int:
    manifest = RunManifest.from_args(args)
    g = load_graph(manifest.graph_path)
    cfg = manifest.config
    plan = plan_from_csv(g, manifest.plan_path, k=cfg.k)
    snapshot_dir = manifest.snapshot_dir
    if snapshot_dir is not None:
        snapshot_dir.mkdir(parents=True, exist_ok=True)

    def snapshot(step, current):
        if snapshot_dir is not None and step % manifest.snapshot_every == 0:
            write_plan_csv(current, snapshot_dir / f"plan_step{step:09d}.csv")

    with open(manifest.out_path, "w", encoding="utf-8", newline="\n") as fh:
        for record in run_chain(
            g, plan, cfg, elections=manifest.elections, plan_hook=snapshot
        ):
            fh.write(record.to_json())
            fh.write("\n")
    print(f"wrote {cfg.steps} records to {manifest.out_path}")
    return 0


def read_metric_records(path) -> list[MetricRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(MetricRecord.from_json(line))
    return records


def _write_hist_csv(path: Path, counter: Counter) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["value", "count"])
        for value in sorted(counter):
            writer.writerow([value, counter[value]])


def _binned_hist(values: list[float], bins: int = 50) -> Counter:
    arr = np.asarray(values, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        return Counter({lo: arr.size})
    counts, edges = np.histogram(arr, bins=bins, range=(lo, hi))
    centers = (edges[:-1] + edges[1:]) / 2
    return Counter({float(c): int(n) for c, n in zip(centers, counts) if n})


def _write_condmean_csv(path: Path, acc: dict[int, list[float]]) -> None:
    """acc maps x -> [sum_y, count]; one row per distinct x."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "mean_y", "count"])
        for x in sorted(acc):
            total, count = acc[x]
            writer.writerow([x, total / count, int(count)])


def _percentile_below(values, target) -> float:
    arr = np.sort(np.asarray(values, dtype=np.float64))
    return float(np.searchsorted(arr, target, side="left") / arr.size)


def _load_enacted(args, g, elections):
    """Enacted per-election outcome from either a plan CSV or a shares fixture."""
    if args.enacted_plan:
        if g is None:
            raise ValueError("--enacted-plan requires --graph")
        plan = plan_from_csv(g, args.enacted_plan)
        record = metrics_mod.compute_record(g, plan)
        out = {}
        for e in g.elections:
            shares = metrics_mod.district_shares(g, plan, e)
            swing = metrics_mod.SwingSpec.from_statewide(metrics_mod.statewide_share(g, e))
            out[e] = _enacted_entry(shares, swing)
        return out, record
    if args.enacted_shares:
        with open(args.enacted_shares, encoding="utf-8") as fh:
            fixture = json.load(fh)
        out = {}
        for e, entry in fixture.items():
            shares = [float(s) for s in entry["district_shares"]]
            statewide = entry.get("statewide")
            if statewide is not None:
                share = metrics_mod.two_party_share(int(statewide["dem"]), int(statewide["rep"]))
            else:
                share = float(entry["statewide_share"])
            out[e] = _enacted_entry(shares, metrics_mod.SwingSpec.from_statewide(share))
        return out, None
    return None, None


def _enacted_entry(shares, swing):
    shifted = metrics_mod.uniform_swing(shares, swing)
    return {
        "district_shares": list(shares),
        "sorted_shares": metrics_mod.sorted_shares(shares),
        "seats": metrics_mod.seats(shares),
        "competitive": metrics_mod.competitive_count(shares),
        "competitive_shifted": metrics_mod.competitive_count(shifted),
        "statewide_share": swing.statewide_share,
    }


def cmd_analyze(args) -> int:
    per_file_records = []
    for path in args.metrics:
        records = read_metric_records(path)
        if not records:
            print(f"no metric records in '{path}'", file=sys.stderr)
            return 1
        per_file_records.append(records)
    all_records = [r for records in per_file_records for r in records]
    elections = sorted(all_records[0].per_election)

    g = load_graph(args.graph) if args.graph else None
    enacted, enacted_record = _load_enacted(args, g, elections)

    csv_dir = Path(args.csv_dir)
    csv_dir.mkdir(parents=True, exist_ok=True)

    counters: dict[str, Counter] = defaultdict(Counter)
    cond: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(lambda: [0.0, 0]))
    share_matrix: dict[str, list] = {e: [] for e in elections}
    perimeters: list[float] = []
    for r in all_records:
        counters["counties_split"][r.counties_split] += 1
        counters["total_splits"][r.total_splits] += 1
        perimeters.append(r.perimeter)
        for e in elections:
            m = r.per_election[e]
            counters[f"seats_{e}"][m.seats] += 1
            counters[f"competitive_{e}"][m.competitive] += 1
            if args.swing:
                counters[f"competitive_shifted_{e}"][m.competitive_shifted] += 1
            share_matrix[e].append(m.sorted_shares)
            for key, x, y in (
                (f"seats_by_counties_split_{e}", r.counties_split, m.seats),
                (f"counties_split_by_seats_{e}", m.seats, r.counties_split),
                (f"competitive_by_seats_{e}", m.seats, m.competitive),
                (f"seats_by_competitive_{e}", m.competitive, m.seats),
            ):
                slot = cond[key][x]
                slot[0] += y
                slot[1] += 1

    _write_hist_csv(csv_dir / "hist_counties_split.csv", counters["counties_split"])
    _write_hist_csv(csv_dir / "hist_total_splits.csv", counters["total_splits"])
    _write_hist_csv(csv_dir / "hist_perimeter.csv", _binned_hist(perimeters))
    for e in elections:
        _write_hist_csv(csv_dir / f"hist_seats_{e}.csv", counters[f"seats_{e}"])
        _write_hist_csv(csv_dir / f"hist_competitive_{e}.csv", counters[f"competitive_{e}"])
        if args.swing:
            _write_hist_csv(
                csv_dir / f"hist_competitive_shifted_{e}.csv",
                counters[f"competitive_shifted_{e}"],
            )
        for key in (
            f"seats_by_counties_split_{e}",
            f"counties_split_by_seats_{e}",
            f"competitive_by_seats_{e}",
            f"seats_by_competitive_{e}",
        ):
            _write_condmean_csv(csv_dir / f"condmean_{key}.csv", cond[key])

    summary = {
        "format_version": SUMMARY_FORMAT_VERSION,
        "n_records": len(all_records),
        "n_chains": len(per_file_records),
        "metrics_files": [str(p) for p in args.metrics],
        "elections": elections,
        "per_election": {},
        "mean_counties_split": float(np.mean([r.counties_split for r in all_records])),
        "mean_total_splits": float(np.mean([r.total_splits for r in all_records])),
        "mean_perimeter": float(np.mean(perimeters)),
    }
    if enacted:
        summary["enacted"] = enacted

    for e in elections:
        matrix = np.asarray(share_matrix[e], dtype=np.float64)
        k = matrix.shape[1]
        boxplot_path = csv_dir / f"boxplot_{e}.csv"
        with open(boxplot_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rank", "p1", "p25", "p50", "p75", "p99"])
            for rank in range(k):
                stats = diag.rank_percentiles(matrix, rank)
                writer.writerow(
                    [rank + 1]
                    + [stats[key] for key in ("p1", "p25", "p50", "p75", "p99")]
                )
        entry = {
            "mean_seats": float(np.mean([r.per_election[e].seats for r in all_records])),
            "mean_competitive": float(
                np.mean([r.per_election[e].competitive for r in all_records])
            ),
            "mean_competitive_shifted": float(
                np.mean([r.per_election[e].competitive_shifted for r in all_records])
            ),
        }
        if len(per_file_records) >= 2:
            chains_seats = [[r.per_election[e].seats for r in recs] for recs in per_file_records]
            chains_comp = [
                [r.per_election[e].competitive for r in recs] for recs in per_file_records
            ]
            chains_shift = [
                [r.per_election[e].competitive_shifted for r in recs]
                for recs in per_file_records
            ]
            for name, chains in (
                ("seats", chains_seats),
                ("competitive", chains_comp),
                ("competitive_shifted", chains_shift),
            ):
                mean, se = diag.cross_chain_mean_se(chains)
                entry[f"cross_chain_{name}"] = {"mean": mean, "se": se}
        if enacted and e in enacted:
            overlay = dict(enacted[e])
            overlay["percentile_seats"] = _percentile_below(
                [r.per_election[e].seats for r in all_records], overlay["seats"]
            )
            overlay["percentile_competitive"] = _percentile_below(
                [r.per_election[e].competitive for r in all_records], overlay["competitive"]
            )
            extreme = diag.extreme_rank_stats(matrix, overlay["sorted_shares"])
            overlay["rank_percentile_below"] = list(extreme.per_rank_below)
            overlay["extreme_tail_q"] = extreme.tail_q
            overlay["joint_extreme_probability"] = extreme.joint_probability
            entry["enacted"] = overlay
        summary["per_election"][e] = entry

    if len(per_file_records) >= 2:
        for name, getter in (
            ("counties_split", lambda r: r.counties_split),
            ("total_splits", lambda r: r.total_splits),
            ("perimeter", lambda r: r.perimeter),
        ):
            mean, se = diag.cross_chain_mean_se(
                [[getter(r) for r in recs] for recs in per_file_records]
            )
            summary[f"cross_chain_{name}"] = {"mean": mean, "se": se}

    if enacted_record is not None:
        summary["enacted_plan"] = {
            "counties_split": enacted_record.counties_split,
            "total_splits": enacted_record.total_splits,
            "perimeter": enacted_record.perimeter,
            "percentile_counties_split": _percentile_below(
                [r.counties_split for r in all_records], enacted_record.counties_split
            ),
            "percentile_perimeter": _percentile_below(
                perimeters, enacted_record.perimeter
            ),
        }

    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"analyzed {len(all_records)} records into {args.out} and {csv_dir}/")
    return 0


def _measure_series(records: list[MetricRecord], spec: str) -> list[float]:
    if spec in ("counties_split", "total_splits", "perimeter"):
        return [getattr(r, spec) for r in records]
    if ":" not in spec:
        raise ValueError(f"bad measure spec '{spec}'")
    election, field = spec.split(":", 1)
    if election not in records[0].per_election:
        raise ValueError(f"records have no election '{election}'")
    if field in ("seats", "competitive", "competitive_shifted"):
        return [getattr(r.per_election[election], field) for r in records]
    if field.startswith("rank"):
        rank = int(field[4:])
        k = len(records[0].per_election[election].sorted_shares)
        if not 1 <= rank <= k:
            raise ValueError(f"rank must lie in 1..{k}, got {rank}")
        return [r.per_election[election].sorted_shares[rank - 1] for r in records]
    raise ValueError(f"bad measure spec '{spec}'")


def default_measures(record: MetricRecord) -> list[str]:
    measures = []
    for e in sorted(record.per_election):
        k = len(record.per_election[e].sorted_shares)
        measures.extend(f"{e}:rank{r}" for r in range(1, k + 1))
        measures.append(f"{e}:seats")
    return measures


def cmd_diagnose(args) -> int:
    if len(args.metrics) < 2:
        print("diagnose requires at least 2 metrics files (chains)", file=sys.stderr)
        return 2
    chains = [read_metric_records(p) for p in args.metrics]
    for path, records in zip(args.metrics, chains):
        if not records:
            print(f"no metric records in '{path}'", file=sys.stderr)
            return 1
    measures = args.measures.split(",") if args.measures else default_measures(chains[0][0])
    series_by_measure = {
        spec: [_measure_series(records, spec) for records in chains] for spec in measures
    }
    grid = [int(x) for x in args.grid.split(",")] if args.grid else None
    report = diag.sample_size_report(series_by_measure, grid=grid, target=args.target)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    if args.points_csv:
        with open(args.points_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["measure", "n", "d"])
            for name, m in report.per_measure.items():
                for n, ds in sorted(m.d_values.items()):
                    for d in ds:
                        writer.writerow([name, n, d])
    print(f"recommended_n: {report.recommended_n}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="districting", description="Districting ensemble analysis"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a graph file against all invariants")
    p.add_argument("graph")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("seed", help="generate a balanced contiguous seed plan")
    p.add_argument("graph")
    p.add_argument("--districts", type=int, required=True)
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_seed)

    p = sub.add_parser("run", help="run a ReCom chain and stream metric records")
    p.add_argument("graph")
    p.add_argument("plan")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--elections", default=None, help="comma-separated election ids")
    p.add_argument("--out", required=True, help="output metrics JSONL path")
    p.add_argument("--snapshot-every", type=int, default=DEFAULT_SNAPSHOT_INTERVAL)
    p.add_argument("--snapshot-dir", default=None, help="write plan CSV snapshots here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="aggregate metric streams into histograms and tables")
    p.add_argument("--metrics", nargs="+", required=True)
    p.add_argument("--graph", default=None)
    p.add_argument("--enacted", "--enacted-plan", dest="enacted_plan", default=None,
                   help="enacted plan CSV (needs --graph)")
    p.add_argument("--enacted-shares", default=None, help="enacted share fixture JSON")
    p.add_argument("--swing", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", required=True, help="summary JSON path")
    p.add_argument("--csv-dir", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("diagnose", help="KS/autocorrelation sample-size report")
    p.add_argument("--metrics", nargs="+", required=True, help=">=2 chain JSONL files")
    p.add_argument("--measures", "--measure", dest="measures", default=None,
                   help="comma-separated measure specs")
    p.add_argument("--grid", default=None, help="comma-separated n values")
    p.add_argument("--target", type=float, default=0.01)
    p.add_argument("--out", required=True, help="diagnostics report JSON path")
    p.add_argument("--points-csv", default=None, help="dump (measure,n,D) points here")
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
