"""County-weighted ReCom proposal and the sequential chain driver.

One chain is strictly sequential. Multiple chains should be launched with
distinct chain indices (or seeds); the only state they share is the immutable
graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from . import metrics as metrics_mod
from .graph import DualGraph, Edge
from .partition import BalanceSpec, Plan, assignment_vector, is_contiguous, max_deviation
from .trees import max_weight_spanning_edges, rooted_subtree_sums

TREE_REDRAW_CAP = 100
PAIR_RESAMPLE_CAP = 100


class StepFailureError(RuntimeError):
    """A chain step exhausted its redraw and pair-resample caps."""


@dataclass(frozen=True)
class ChainConfig:
    """Chain parameters: intra-county upweight, balance tolerance, length, seed, districts."""

    weight: float
    tolerance: float
    steps: int
    rng_seed: int
    k: int

    def __post_init__(self):
        if self.weight < 1:
            raise ValueError("weight must be >= 1")
        if not 0 < self.tolerance < 1:
            raise ValueError("tolerance must lie in (0, 1)")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class StepOutcome:
    plan: Plan
    merged_pair: tuple[int, int]
    tree_redraws: int


def make_rng(seed: int, chain_index: int = 0) -> np.random.Generator:
    """Seedable, splittable PCG64 stream; distinct chain indices give independent streams."""
    entropy = seed & (2**64 - 1)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy, spawn_key=(chain_index,))))


def adjacent_district_pairs(g: DualGraph, plan: Plan) -> set[tuple[int, int]]:
    """All unordered district pairs joined by at least one graph edge."""
    assign = assignment_vector(g, plan)
    da = assign[g.edge_a]
    db = assign[g.edge_b]
    mask = da != db
    lo = np.minimum(da[mask], db[mask])
    hi = np.maximum(da[mask], db[mask])
    return {(int(a), int(b)) for a, b in zip(lo, hi)}


def draw_edge_weights(
    g: DualGraph, edges: Sequence[Edge], w: float, rng: np.random.Generator
) -> dict[Edge, float]:
    """Independent weights: U[0,w] for intra-county edges, U[0,1] for inter-county.

    Draw order is the input edge order, so a fixed rng state reproduces the map.
    """
    base = rng.random(len(edges))
    out: dict[Edge, float] = {}
    for i, e in enumerate(edges):
        intra = g.node(e.a).county == g.node(e.b).county
        out[e] = float(base[i] * (w if intra else 1.0))
    return out


def max_weight_spanning_tree(
    nodes: Sequence[str], edges: Sequence[Edge], weights: Mapping[Edge, float]
) -> list[Edge]:
    """Maximal-weight spanning tree by Kruskal; ties break by edge input order."""
    index = {nid: i for i, nid in enumerate(nodes)}
    pairs = [(index[e.a], index[e.b]) for e in edges]
    wvec = np.array([weights[e] for e in edges], dtype=np.float64)
    chosen = max_weight_spanning_edges(len(nodes), pairs, wvec)
    if chosen is None:
        raise ValueError("subgraph is not connected; no spanning tree exists")
    return [edges[i] for i in chosen]


def balanced_cut(
    tree: Sequence[Edge],
    populations: Mapping[str, float],
    ideal: float,
    tolerance: float,
    rng: np.random.Generator,
) -> Edge | None:
    """A uniformly random tree edge whose removal leaves both sides within
    tolerance of the ideal population, or None if no such edge exists."""
    if not tree:
        return None
    nodes: list[str] = []
    index: dict[str, int] = {}
    for e in tree:
        for x in (e.a, e.b):
            if x not in index:
                index[x] = len(nodes)
                nodes.append(x)
    pairs = [(index[e.a], index[e.b]) for e in tree]
    pops = np.array([populations[x] for x in nodes], dtype=np.float64)
    total = float(pops.sum())
    order, _, parent, sums, _ = rooted_subtree_sums(len(nodes), pairs, pops)
    root = int(order[0])
    slot_of = {(a, b): i for i, (a, b) in enumerate(pairs)}
    slot_of.update({(b, a): i for i, (a, b) in enumerate(pairs)})
    feasible = []
    for node in range(len(nodes)):
        if node == root:
            continue
        side = sums[node]
        rest = total - side
        if abs(side - ideal) <= tolerance * ideal and abs(rest - ideal) <= tolerance * ideal:
            feasible.append(slot_of[(node, int(parent[node]))])
    if not feasible:
        return None
    return tree[feasible[int(rng.integers(len(feasible)))]]


def recom_step(
    g: DualGraph, plan: Plan, cfg: ChainConfig, rng: np.random.Generator
) -> StepOutcome:
    """One ReCom move: merge a random adjacent district pair and re-split it.

    Spanning trees are drawn with fresh county-weighted edge weights until one
    admits a balanced cut (up to TREE_REDRAW_CAP per pair); if a pair is
    exhausted, another is sampled (up to PAIR_RESAMPLE_CAP). The component
    containing the lexicographically smallest merged node id keeps the smaller
    of the two district labels; all other districts are untouched.
    """
    pairs = sorted(adjacent_district_pairs(g, plan))
    if not pairs:
        raise StepFailureError("no adjacent district pairs to merge")
    assign = assignment_vector(g, plan)
    ideal = g.total_population / cfg.k
    eps = cfg.tolerance
    discarded = 0

    for _ in range(PAIR_RESAMPLE_CAP):
        d1, d2 = pairs[int(rng.integers(len(pairs)))]
        member = (assign == d1) | (assign == d2)
        merged = np.flatnonzero(member)
        local = np.full(len(g), -1, dtype=np.int64)
        local[merged] = np.arange(merged.size)
        edge_slots = np.flatnonzero(member[g.edge_a] & member[g.edge_b])
        sub_pairs = [(int(local[g.edge_a[s]]), int(local[g.edge_b[s]])) for s in edge_slots]
        factors = np.where(g.edge_intra_county[edge_slots], cfg.weight, 1.0)
        pops = g.populations[merged].astype(np.float64)
        region_pop = float(pops.sum())
        smallest = min(g.node_ids[i] for i in merged)

        for _ in range(TREE_REDRAW_CAP):
            wvec = rng.random(len(sub_pairs)) * factors
            tree = max_weight_spanning_edges(merged.size, sub_pairs, wvec)
            if tree is None:
                raise StepFailureError(
                    f"merged districts {d1} and {d2} are not connected"
                )
            tree_pairs = [sub_pairs[t] for t in tree]
            order, position, _, sums, sizes = rooted_subtree_sums(merged.size, tree_pairs, pops)
            root = int(order[0])
            feasible = [
                node
                for node in range(merged.size)
                if node != root
                and abs(sums[node] - ideal) <= eps * ideal
                and abs(region_pop - sums[node] - ideal) <= eps * ideal
            ]
            if not feasible:
                discarded += 1
                continue
            cut = feasible[int(rng.integers(len(feasible)))]
            lo = int(position[cut])
            side_local = order[lo : lo + int(sizes[cut])]
            in_side = np.zeros(merged.size, dtype=bool)
            in_side[side_local] = True

            low, high = (d1, d2) if d1 < d2 else (d2, d1)
            smallest_in_side = in_side[int(local[g.node_index(smallest)])]
            side_label = low if smallest_in_side else high
            rest_label = high if smallest_in_side else low

            new_assignment = dict(plan.assignment)
            for pos_local, node_idx in enumerate(merged):
                new_assignment[g.node_ids[node_idx]] = (
                    side_label if in_side[pos_local] else rest_label
                )
            side_pop = int(round(sums[cut]))
            pops_out = list(plan.district_populations)
            pops_out[side_label] = side_pop
            pops_out[rest_label] = int(round(region_pop)) - side_pop
            new_plan = Plan(
                assignment=new_assignment, k=plan.k, district_populations=tuple(pops_out)
            )
            return StepOutcome(plan=new_plan, merged_pair=(low, high), tree_redraws=discarded)

    raise StepFailureError(
        f"step failed: {PAIR_RESAMPLE_CAP} district pairs each exhausted "
        f"{TREE_REDRAW_CAP} spanning-tree redraws"
    )


def run_chain(
    g: DualGraph,
    seed: Plan,
    cfg: ChainConfig,
    elections: Sequence[str] | None = None,
    chain_index: int = 0,
    validate: bool = True,
    plan_hook: Callable[[int, Plan], None] | None = None,
) -> Iterator[metrics_mod.MetricRecord]:
    """Stream one MetricRecord per accepted step; deterministic given
    (graph, seed plan, cfg.rng_seed, chain_index).

    With validate=True every emitted plan is re-checked for contiguity and
    balance. plan_hook, when given, sees each accepted (step, plan) and is
    used by the CLI for periodic plan snapshots.
    """
    if seed.k != cfg.k:
        raise ValueError(f"seed plan has k={seed.k} but config expects k={cfg.k}")
    if elections is None:
        elections = g.elections
    missing = [e for e in elections if e not in g.elections]
    if missing:
        raise ValueError(f"graph has no election '{missing[0]}'")
    rng = make_rng(cfg.rng_seed, chain_index)
    swings = {
        e: metrics_mod.SwingSpec.from_statewide(metrics_mod.statewide_share(g, e))
        for e in elections
    }
    spec = BalanceSpec(ideal=g.total_population / cfg.k, tolerance=cfg.tolerance)
    plan = seed
    for step in range(1, cfg.steps + 1):
        outcome = recom_step(g, plan, cfg, rng)
        plan = outcome.plan
        if validate:
            if not is_contiguous(g, plan):
                raise StepFailureError(f"step {step} produced a discontiguous plan")
            deviation = max_deviation(plan, spec)
            if deviation > cfg.tolerance:
                raise StepFailureError(
                    f"step {step} exceeded tolerance: deviation {deviation:.6f}"
                )
        if plan_hook is not None:
            plan_hook(step, plan)
        yield metrics_mod.compute_record(g, plan, elections=elections, swings=swings, step=step)
