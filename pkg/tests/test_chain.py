import numpy as np
import pytest

from districting.chain import (
    ChainConfig,
    StepFailureError,
    adjacent_district_pairs,
    balanced_cut,
    draw_edge_weights,
    make_rng,
    max_weight_spanning_tree,
    recom_step,
    run_chain,
)
from districting.diagnostics import ks_two_sample
from districting.graph import Edge
from districting.partition import BalanceSpec, Plan, is_contiguous, max_deviation, seed_plan
from districting.synthetic import grid_graph, path_graph

from helpers import make_graph


def quadrant_plan(g, rows, cols):
    assign = {}
    for nid in g.node_ids:
        r, c = int(nid[1 : nid.index("c")]), int(nid[nid.index("c") + 1 :])
        assign[nid] = (r * 2 // rows) * 2 + (c * 2 // cols)
    return Plan.from_assignment(g, assign, 4)


def test_adjacent_pairs_two_districts():
    g = path_graph([1, 1, 1, 1])
    p = Plan.from_assignment(g, {"p0": 0, "p1": 0, "p2": 1, "p3": 1}, 2)
    assert adjacent_district_pairs(g, p) == {(0, 1)}


def test_adjacent_pairs_quadrants_of_4x4_grid():
    g = grid_graph(4, 4)
    p = quadrant_plan(g, 4, 4)
    # Rook adjacency: no edge crosses between diagonal quadrants.
    assert adjacent_district_pairs(g, p) == {(0, 1), (0, 2), (1, 3), (2, 3)}


def test_adjacent_pairs_single_district_empty():
    g = path_graph([1, 1])
    p = Plan.from_assignment(g, {"p0": 0, "p1": 0}, 1)
    assert adjacent_district_pairs(g, p) == set()


def test_draw_edge_weights_independent_of_w_without_intra_edges():
    # Every cell its own county: no intra-county edges anywhere.
    g = grid_graph(3, 3, county_blocks=(3, 3))
    w1 = draw_edge_weights(g, g.edges, 1.0, make_rng(5))
    w20 = draw_edge_weights(g, g.edges, 20.0, make_rng(5))
    assert w1 == w20
    assert all(0 <= v <= 1 for v in w1.values())


def test_draw_edge_weights_intra_mean_scales_with_w():
    g = grid_graph(10, 10)  # single county: all 180 edges intra
    rng = make_rng(11)
    draws = []
    while len(draws) < 10_000:
        draws.extend(draw_edge_weights(g, g.edges, 20.0, rng).values())
    mean = np.mean(draws)
    assert 10 * 0.95 <= mean <= 10 * 1.05  # U[0,20] has mean 10


def test_draw_edge_weights_w1_classes_indistinguishable():
    # At w=1 intra- and inter-county draws share U[0,1]; exact two-sample KS
    # over ~1e5 draws must sit below the 1% critical value.
    g = grid_graph(10, 10, county_blocks=(1, 2))
    rng = make_rng(23)
    intra, inter = [], []
    while len(intra) + len(inter) < 100_000:
        for e, w in draw_edge_weights(g, g.edges, 1.0, rng).items():
            if g.node(e.a).county == g.node(e.b).county:
                intra.append(w)
            else:
                inter.append(w)
    d = ks_two_sample(intra, inter)
    m, n = len(intra), len(inter)
    critical = 1.628 * np.sqrt((m + n) / (m * n))
    assert d < critical


def test_max_weight_tree_triangle():
    edges = [Edge("a", "b", 1.0), Edge("b", "c", 1.0), Edge("a", "c", 1.0)]
    weights = {edges[0]: 3.0, edges[1]: 2.0, edges[2]: 1.0}
    tree = max_weight_spanning_tree(["a", "b", "c"], edges, weights)
    assert set(tree) == {edges[0], edges[1]}


def test_max_weight_tree_of_tree_is_identity():
    edges = [Edge("a", "b", 1.0), Edge("b", "c", 1.0), Edge("c", "d", 1.0)]
    weights = {e: 0.5 for e in edges}
    tree = max_weight_spanning_tree(["a", "b", "c", "d"], edges, weights)
    assert set(tree) == set(edges)


def test_max_weight_tree_four_cycle_drops_lightest():
    edges = [
        Edge("a", "b", 1.0),
        Edge("b", "c", 1.0),
        Edge("c", "d", 1.0),
        Edge("d", "a", 1.0),
    ]
    weights = {edges[0]: 1.0, edges[1]: 2.0, edges[2]: 3.0, edges[3]: 4.0}
    tree = max_weight_spanning_tree(["a", "b", "c", "d"], edges, weights)
    assert set(tree) == {edges[1], edges[2], edges[3]}


def test_max_weight_tree_disconnected_errors():
    edges = [Edge("a", "b", 1.0), Edge("c", "d", 1.0)]
    with pytest.raises(ValueError, match="connected"):
        max_weight_spanning_tree(["a", "b", "c", "d"], edges, {e: 1.0 for e in edges})


def test_balanced_cut_unique_middle_edge():
    tree = [Edge("p0", "p1", 1.0), Edge("p1", "p2", 1.0), Edge("p2", "p3", 1.0)]
    pops = {f"p{i}": 1 for i in range(4)}
    cut = balanced_cut(tree, pops, ideal=2.0, tolerance=0.01, rng=make_rng(0))
    assert cut == tree[1]


def test_balanced_cut_none_when_infeasible():
    tree = [Edge("p0", "p1", 1.0), Edge("p1", "p2", 1.0)]
    pops = {f"p{i}": 1 for i in range(3)}
    assert balanced_cut(tree, pops, ideal=1.5, tolerance=0.01, rng=make_rng(0)) is None


def test_balanced_cut_star_none():
    # Every cut isolates at most one unit of population.
    tree = [Edge("hub", f"leaf{i}", 1.0) for i in range(5)]
    pops = {"hub": 0, **{f"leaf{i}": 1 for i in range(5)}}
    assert balanced_cut(tree, pops, ideal=2.5, tolerance=0.25, rng=make_rng(0)) is None


def test_recom_step_four_path_recovers_unique_split():
    g = path_graph([1, 1, 1, 1])
    p = Plan.from_assignment(g, {"p0": 0, "p1": 0, "p2": 1, "p3": 1}, 2)
    cfg = ChainConfig(weight=1.0, tolerance=0.01, steps=1, rng_seed=0, k=2)
    out = recom_step(g, p, cfg, make_rng(9))
    # Only one balanced split exists; the component holding p0 keeps label 0.
    assert out.plan.assignment == p.assignment
    assert out.merged_pair == (0, 1)


def test_recom_step_postconditions_and_label_stability():
    g = grid_graph(6, 6, county_blocks=(2, 2))
    spec = BalanceSpec.for_graph(g, 4, 0.1)
    plan = seed_plan(g, 4, spec, make_rng(1))
    cfg = ChainConfig(weight=20.0, tolerance=0.1, steps=1, rng_seed=0, k=4)
    rng = make_rng(42)
    for _ in range(60):
        out = recom_step(g, plan, cfg, rng)
        new = out.plan
        assert is_contiguous(g, new)
        assert max_deviation(new, spec) <= cfg.tolerance
        d1, d2 = out.merged_pair
        for nid, old_d in plan.assignment.items():
            if old_d not in (d1, d2):
                assert new.assignment[nid] == old_d
        assert out.tree_redraws >= 0
        plan = new


def test_recom_step_fails_without_adjacent_pairs():
    g = path_graph([1, 1])
    p = Plan.from_assignment(g, {"p0": 0, "p1": 0}, 1)
    cfg = ChainConfig(weight=1.0, tolerance=0.5, steps=1, rng_seed=0, k=1)
    with pytest.raises(StepFailureError, match="no adjacent"):
        recom_step(g, p, cfg, make_rng(0))


def test_run_chain_single_step():
    g = grid_graph(4, 2)
    spec = BalanceSpec.for_graph(g, 2, 0.01)
    plan = seed_plan(g, 2, spec, make_rng(0))
    cfg = ChainConfig(weight=1.0, tolerance=0.01, steps=1, rng_seed=1, k=2)
    records = list(run_chain(g, plan, cfg))
    assert len(records) == 1
    assert records[0].step == 1


def test_run_chain_deterministic_replay():
    g = grid_graph(6, 6, county_blocks=(2, 3))
    spec = BalanceSpec.for_graph(g, 3, 0.1)
    plan = seed_plan(g, 3, spec, make_rng(4))
    cfg = ChainConfig(weight=5.0, tolerance=0.1, steps=40, rng_seed=77, k=3)
    first = [r.to_json() for r in run_chain(g, plan, cfg)]
    second = [r.to_json() for r in run_chain(g, plan, cfg)]
    assert first == second


def test_run_chain_distinct_chain_indices_diverge():
    g = grid_graph(6, 6)
    spec = BalanceSpec.for_graph(g, 3, 0.1)
    plan = seed_plan(g, 3, spec, make_rng(4))
    cfg = ChainConfig(weight=1.0, tolerance=0.1, steps=20, rng_seed=77, k=3)
    a = [r.to_json() for r in run_chain(g, plan, cfg, chain_index=0)]
    b = [r.to_json() for r in run_chain(g, plan, cfg, chain_index=1)]
    assert a != b


def test_run_chain_rejects_mismatched_k():
    g = grid_graph(4, 2)
    spec = BalanceSpec.for_graph(g, 2, 0.01)
    plan = seed_plan(g, 2, spec, make_rng(0))
    cfg = ChainConfig(weight=1.0, tolerance=0.01, steps=1, rng_seed=1, k=3)
    with pytest.raises(ValueError, match="k="):
        list(run_chain(g, plan, cfg))
