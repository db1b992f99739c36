"""Per-plan measures: two-party shares, seats, ranked shares, county splits,
perimeter, and vote-band competitiveness with uniform-swing variants.

All operations are pure functions of (graph, plan); minor-party votes are
never counted anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import DualGraph
from .partition import Plan, assignment_vector

FORMAT_VERSION = 1
COMPETITIVE_BAND = (0.45, 0.55)


class UndefinedShareError(ValueError):
    """Two-party share requested where no major-party votes were cast."""


def two_party_share(dem: int, rep: int) -> float:
    """Democratic share of the two-party vote."""
    total = dem + rep
    if total <= 0:
        raise UndefinedShareError("two-party share undefined: no major-party votes")
    return dem / total


def statewide_share(g: DualGraph, election: str) -> float:
    """Two-party share over the whole graph's vote totals."""
    if election not in g.elections:
        raise ValueError(f"graph has no election '{election}'")
    return two_party_share(int(g.votes_dem[election].sum()), int(g.votes_rep[election].sum()))


@dataclass(frozen=True)
class SwingSpec:
    """Uniform-swing parameters; delta is exactly statewide_share - 0.5."""

    statewide_share: float
    delta: float

    def __post_init__(self):
        if not 0 < self.statewide_share < 1:
            raise ValueError("statewide_share must lie in (0, 1)")
        if self.delta != self.statewide_share - 0.5:
            raise ValueError("delta must equal statewide_share - 0.5 exactly")

    @classmethod
    def from_statewide(cls, share: float) -> "SwingSpec":
        return cls(statewide_share=share, delta=share - 0.5)


def _shares_from_vector(g: DualGraph, assign: np.ndarray, k: int, election: str) -> np.ndarray:
    dem = np.bincount(assign, weights=g.votes_dem[election], minlength=k)
    rep = np.bincount(assign, weights=g.votes_rep[election], minlength=k)
    totals = dem + rep
    empty = np.flatnonzero(totals == 0)
    if empty.size:
        raise UndefinedShareError(
            f"district {int(empty[0])} has no major-party votes in '{election}'"
        )
    return dem / totals


def district_shares(g: DualGraph, plan: Plan, election: str) -> list[float]:
    """Two-party share per district, indexed by district number."""
    if election not in g.elections:
        raise ValueError(f"graph has no election '{election}'")
    return _shares_from_vector(g, assignment_vector(g, plan), plan.k, election).tolist()


def seats(shares: Sequence[float]) -> int:
    """Districts with a strict Democratic majority; exact ties count as non-Democratic."""
    return sum(1 for s in shares if s > 0.5)


def sorted_shares(shares: Sequence[float]) -> list[float]:
    return sorted(shares)


def competitive_count(
    shares: Sequence[float], band: tuple[float, float] = COMPETITIVE_BAND
) -> int:
    """Districts whose share lies in the closed vote band (default [0.45, 0.55])."""
    lo, hi = band
    return sum(1 for s in shares if lo <= s <= hi)


def uniform_swing(shares: Sequence[float], swing: SwingSpec) -> list[float]:
    """Shift every district share by -delta (toward a 50-50 statewide result), clamped to [0, 1]."""
    return [min(1.0, max(0.0, s - swing.delta)) for s in shares]


def _county_splits_from_vector(g: DualGraph, assign: np.ndarray, k: int) -> tuple[int, int]:
    seen = np.unique(g.county_codes * k + assign)
    per_county = np.bincount(seen // k, minlength=len(g.counties))
    counties_split = int(np.count_nonzero(per_county >= 2))
    total_splits = int(np.sum(per_county - 1))
    return counties_split, total_splits


def county_splits(g: DualGraph, plan: Plan) -> tuple[int, int]:
    """(counties touching >= 2 districts, sum over counties of districts touched - 1)."""
    return _county_splits_from_vector(g, assignment_vector(g, plan), plan.k)


def _perimeter_from_vector(g: DualGraph, assign: np.ndarray, k: int) -> float:
    per_district = np.bincount(assign, weights=g.exterior, minlength=k)
    cut = assign[g.edge_a] != assign[g.edge_b]
    if np.any(cut):
        np.add.at(per_district, assign[g.edge_a[cut]], g.edge_shared[cut])
        np.add.at(per_district, assign[g.edge_b[cut]], g.edge_shared[cut])
    return float(per_district.sum())


def plan_perimeter(g: DualGraph, plan: Plan) -> float:
    """Total boundary length summed over districts.

    Each node contributes its exterior perimeter to its own district and each
    cut edge contributes its shared perimeter to both incident districts.
    """
    return _perimeter_from_vector(g, assignment_vector(g, plan), plan.k)


@dataclass(frozen=True)
class ElectionMetrics:
    sorted_shares: tuple[float, ...]
    seats: int
    competitive: int
    competitive_shifted: int


@dataclass(frozen=True)
class MetricRecord:
    """Per-step vector of all plan measures; the unit of ensemble storage."""

    step: int
    per_election: Mapping[str, ElectionMetrics]
    counties_split: int
    total_splits: int
    perimeter: float

    def to_json(self) -> str:
        payload = {
            "format_version": FORMAT_VERSION,
            "step": self.step,
            "per_election": {
                e: {
                    "sorted_shares": list(m.sorted_shares),
                    "seats": m.seats,
                    "competitive": m.competitive,
                    "competitive_shifted": m.competitive_shifted,
                }
                for e, m in self.per_election.items()
            },
            "counties_split": self.counties_split,
            "total_splits": self.total_splits,
            "perimeter": self.perimeter,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "MetricRecord":
        payload = json.loads(line)
        if payload.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"unsupported metric record format_version {payload.get('format_version')!r}"
            )
        per_election = {
            e: ElectionMetrics(
                sorted_shares=tuple(m["sorted_shares"]),
                seats=int(m["seats"]),
                competitive=int(m["competitive"]),
                competitive_shifted=int(m["competitive_shifted"]),
            )
            for e, m in payload["per_election"].items()
        }
        return cls(
            step=int(payload["step"]),
            per_election=per_election,
            counties_split=int(payload["counties_split"]),
            total_splits=int(payload["total_splits"]),
            perimeter=float(payload["perimeter"]),
        )


def compute_record(
    g: DualGraph,
    plan: Plan,
    elections: Sequence[str] | None = None,
    swings: Mapping[str, SwingSpec] | None = None,
    step: int = 0,
) -> MetricRecord:
    """Assemble every measure for one plan into a MetricRecord.

    competitive_shifted applies each election's uniform swing (computed from
    the graph's statewide totals unless explicit swings are given).
    """
    if elections is None:
        elections = g.elections
    assign = assignment_vector(g, plan)
    per: dict[str, ElectionMetrics] = {}
    for e in elections:
        if swings is not None and e in swings:
            swing = swings[e]
        else:
            swing = SwingSpec.from_statewide(statewide_share(g, e))
        shares = _shares_from_vector(g, assign, plan.k, e)
        shifted = uniform_swing(shares, swing)
        per[e] = ElectionMetrics(
            sorted_shares=tuple(float(s) for s in np.sort(shares)),
            seats=seats(shares),
            competitive=competitive_count(shares),
            competitive_shifted=competitive_count(shifted),
        )
    counties_split, total_splits = _county_splits_from_vector(g, assign, plan.k)
    assert 0 <= counties_split <= total_splits
    return MetricRecord(
        step=step,
        per_election=per,
        counties_split=counties_split,
        total_splits=total_splits,
        perimeter=_perimeter_from_vector(g, assign, plan.k),
    )
