"""Districting plans: balance math, contiguity checks, and spanning-tree seeds."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .graph import DualGraph
from .trees import max_weight_spanning_edges, rooted_subtree_sums

SEED_RETRY_CAP = 1000


class InfeasibleSeedError(RuntimeError):
    """Seed generation exhausted its tree-draw budget without a balanced cut."""


@dataclass(frozen=True)
class BalanceSpec:
    """Population-balance target: per-district ideal and relative tolerance."""

    ideal: float
    tolerance: float

    def __post_init__(self):
        if not 0 < self.tolerance < 1:
            raise ValueError("tolerance must lie in (0, 1)")

    @classmethod
    def for_graph(cls, g: DualGraph, k: int, tolerance: float = 0.01) -> "BalanceSpec":
        return cls(ideal=ideal_population(g, k), tolerance=tolerance)


@dataclass(frozen=True)
class Plan:
    """Assignment of every node to one of k districts, with cached district populations."""

    assignment: Mapping[str, int]
    k: int
    district_populations: tuple[int, ...]

    @classmethod
    def from_assignment(cls, g: DualGraph, assignment: Mapping[str, int], k: int) -> "Plan":
        if k < 1:
            raise ValueError("k must be >= 1")
        pops = np.zeros(k, dtype=np.int64)
        for nid in g.node_ids:
            if nid not in assignment:
                raise ValueError(f"node '{nid}' is unassigned")
            d = assignment[nid]
            if not 0 <= d < k:
                raise ValueError(f"node '{nid}' assigned to district {d}, outside [0, {k})")
            pops[d] += g.node(nid).population
        return cls(assignment=dict(assignment), k=k, district_populations=tuple(int(p) for p in pops))


def assignment_vector(g: DualGraph, plan: Plan) -> np.ndarray:
    """District index of every node, in graph node order."""
    try:
        return np.fromiter(
            (plan.assignment[nid] for nid in g.node_ids), dtype=np.int64, count=len(g)
        )
    except KeyError as exc:
        raise ValueError(f"node {exc.args[0]!r} is unassigned") from exc


def ideal_population(g: DualGraph, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    return g.total_population / k


def max_deviation(plan: Plan, spec: BalanceSpec) -> float:
    """Largest relative deviation of any district population from the ideal."""
    pops = np.asarray(plan.district_populations, dtype=np.float64)
    if spec.ideal == 0:
        return 0.0 if np.all(pops == 0) else float("inf")
    return float(np.max(np.abs(pops - spec.ideal)) / spec.ideal)


def is_contiguous(g: DualGraph, plan: Plan) -> bool:
    """True iff every district's induced subgraph is connected and nonempty."""
    assign = assignment_vector(g, plan)
    for d in range(plan.k):
        members = np.flatnonzero(assign == d)
        if members.size == 0:
            return False
        start = int(members[0])
        reached = {start}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for nbr, _ in g.adjacency[cur]:
                if assign[nbr] == d and nbr not in reached:
                    reached.add(nbr)
                    queue.append(nbr)
        if len(reached) != members.size:
            return False
    return True


def seed_plan(g: DualGraph, k: int, spec: BalanceSpec, rng: np.random.Generator) -> Plan:
    """Generate a contiguous, balanced k-district plan by recursive tree bipartition.

    Each region is split by drawing a random spanning tree (uniform edge
    weights, maximal-weight Kruskal) and cutting an edge that leaves one side
    holding j districts' worth of population, preferring j=1 and falling back
    to any feasible j; the recursion then handles (j, remaining-j). Failed
    trees are redrawn up to SEED_RETRY_CAP per split level, with a global
    budget so pathological inputs fail loudly instead of hanging.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(g)
    assign = np.full(n, -1, dtype=np.int64)
    if k == 1:
        assign[:] = 0
        return _emit_seed(g, assign, k, spec)

    ideal = spec.ideal
    eps = spec.tolerance
    budget = [SEED_RETRY_CAP * (k - 1)]

    def split(region: np.ndarray, labels: list[int]) -> None:
        parts = len(labels)
        if parts == 1:
            assign[region] = labels[0]
            return
        member = np.zeros(n, dtype=bool)
        member[region] = True
        local = np.full(n, -1, dtype=np.int64)
        local[region] = np.arange(region.size)
        edge_slots = np.flatnonzero(member[g.edge_a] & member[g.edge_b])
        pairs = [(int(local[g.edge_a[s]]), int(local[g.edge_b[s]])) for s in edge_slots]
        pops = g.populations[region].astype(np.float64)
        region_pop = float(pops.sum())

        for _ in range(SEED_RETRY_CAP):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            tree = max_weight_spanning_edges(region.size, pairs, rng.random(len(pairs)))
            if tree is None:
                raise InfeasibleSeedError(
                    f"region of {region.size} nodes is not connected"
                )
            tree_pairs = [pairs[t] for t in tree]
            order, position, _, sums, sizes = rooted_subtree_sums(region.size, tree_pairs, pops)

            by_j: dict[int, list[int]] = {}
            for node in range(region.size):
                if node == int(order[0]):
                    continue
                side = sums[node]
                rest = region_pop - side
                for j in range(1, parts):
                    if (
                        abs(side - j * ideal) <= eps * j * ideal
                        and abs(rest - (parts - j) * ideal) <= eps * (parts - j) * ideal
                    ):
                        by_j.setdefault(j, []).append(node)
                        break
            if not by_j:
                continue
            j = min(by_j)
            candidates = by_j[j]
            cut = candidates[int(rng.integers(len(candidates)))]
            lo = int(position[cut])
            side_local = order[lo : lo + int(sizes[cut])]
            side_mask = np.zeros(region.size, dtype=bool)
            side_mask[side_local] = True
            try:
                split(region[side_mask], labels[:j])
                split(region[~side_mask], labels[j:])
                return
            except InfeasibleSeedError:
                continue  # a sub-split failed; redraw this level's tree
        raise InfeasibleSeedError(
            f"no balanced cut found for region of {region.size} nodes "
            f"(population {region_pop:g}) into {parts} districts "
            f"(ideal {ideal:g}, tolerance {eps:g}) within the retry cap"
        )

    split(np.arange(n), list(range(k)))
    return _emit_seed(g, assign, k, spec)


def _emit_seed(g: DualGraph, assign: np.ndarray, k: int, spec: BalanceSpec) -> Plan:
    plan = Plan.from_assignment(g, {g.node_ids[i]: int(assign[i]) for i in range(len(g))}, k)
    assert is_contiguous(g, plan), "seed plan violates contiguity"
    assert max_deviation(plan, spec) <= spec.tolerance, "seed plan violates balance tolerance"
    return plan


def write_plan_csv(plan: Plan, path) -> None:
    """Write a plan as `node_id,district` rows, sorted by node id."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "district"])
        for nid in sorted(plan.assignment):
            writer.writerow([nid, plan.assignment[nid]])


def read_plan_assignment(path) -> dict[str, int]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"node_id", "district"}:
            raise ValueError(f"'{path}' is not a plan CSV (expected header node_id,district)")
        return {row["node_id"]: int(row["district"]) for row in reader}


def plan_from_csv(g: DualGraph, path, k: int | None = None) -> Plan:
    assignment = read_plan_assignment(path)
    if k is None:
        k = max(assignment.values()) + 1 if assignment else 1
    return Plan.from_assignment(g, assignment, k)
