"""Dual-graph data model: loading, validation, and county contractions.

The graph has one node per precinct and one undirected edge per shared
precinct boundary. Adjacency and boundary lengths arrive precomputed in the
JSON format described in the README; no geometry is done here.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


class GraphValidationError(ValueError):
    """A graph file or structure violates the format invariants."""


@dataclass(frozen=True)
class VoteCount:
    dem: int
    rep: int


@dataclass(frozen=True)
class Node:
    id: str
    population: int
    county: str
    exterior_perimeter: float
    votes: Mapping[str, VoteCount]


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    shared_perimeter: float


class DualGraph:
    """Validated precinct adjacency graph.

    Immutable after construction; safe for concurrent reads by any number of
    chain workers. Construction precomputes the index arrays (populations,
    county codes, vote tallies, edge endpoints) that the partition, chain,
    and metrics layers operate on.
    """

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]):
        self.nodes: tuple[Node, ...] = tuple(nodes)
        self.edges: tuple[Edge, ...] = tuple(edges)
        problems = structural_problems(self.nodes, self.edges)
        if problems:
            raise GraphValidationError(problems[0])
        self._build_index()

    def _build_index(self) -> None:
        self.node_ids: tuple[str, ...] = tuple(n.id for n in self.nodes)
        self._index = {nid: i for i, nid in enumerate(self.node_ids)}
        self.elections: tuple[str, ...] = tuple(sorted(self.nodes[0].votes)) if self.nodes else ()
        self.populations = np.array([n.population for n in self.nodes], dtype=np.int64)
        self.exterior = np.array([n.exterior_perimeter for n in self.nodes], dtype=np.float64)
        self.counties: tuple[str, ...] = tuple(sorted({n.county for n in self.nodes}))
        code = {c: i for i, c in enumerate(self.counties)}
        self.county_codes = np.array([code[n.county] for n in self.nodes], dtype=np.int64)
        self.votes_dem = {
            e: np.array([n.votes[e].dem for n in self.nodes], dtype=np.int64) for e in self.elections
        }
        self.votes_rep = {
            e: np.array([n.votes[e].rep for n in self.nodes], dtype=np.int64) for e in self.elections
        }
        self.edge_a = np.array([self._index[e.a] for e in self.edges], dtype=np.int64)
        self.edge_b = np.array([self._index[e.b] for e in self.edges], dtype=np.int64)
        self.edge_shared = np.array([e.shared_perimeter for e in self.edges], dtype=np.float64)
        self.edge_intra_county = self.county_codes[self.edge_a] == self.county_codes[self.edge_b]
        adjacency: list[list[tuple[int, int]]] = [[] for _ in self.nodes]
        for ei in range(len(self.edges)):
            ia, ib = int(self.edge_a[ei]), int(self.edge_b[ei])
            adjacency[ia].append((ib, ei))
            adjacency[ib].append((ia, ei))
        self.adjacency: tuple[tuple[tuple[int, int], ...], ...] = tuple(tuple(x) for x in adjacency)
        self.total_population = int(self.populations.sum())
        self.total_exterior = float(self.exterior.sum())

    def __len__(self) -> int:
        return len(self.nodes)

    def node_index(self, node_id: str) -> int:
        return self._index[node_id]

    def node(self, node_id: str) -> Node:
        return self.nodes[self._index[node_id]]


def structural_problems(nodes: Sequence[Node], edges: Sequence[Edge]) -> list[str]:
    """All invariant violations in the given structure, each naming the offending entity."""
    problems: list[str] = []
    if not nodes:
        return ["graph has no nodes"]

    seen: set[str] = set()
    for n in nodes:
        if n.id in seen:
            problems.append(f"duplicate node id '{n.id}'")
        seen.add(n.id)
        if n.population < 0:
            problems.append(f"node '{n.id}': negative population {n.population}")
        if n.exterior_perimeter < 0:
            problems.append(f"node '{n.id}': negative exterior_perimeter {n.exterior_perimeter}")
        for election, vc in n.votes.items():
            if vc.dem < 0 or vc.rep < 0:
                problems.append(f"node '{n.id}': negative vote count in '{election}'")

    expected_elections = set(nodes[0].votes)
    for n in nodes[1:]:
        have = set(n.votes)
        if have != expected_elections:
            missing = sorted(expected_elections - have)
            extra = sorted(have - expected_elections)
            detail = []
            if missing:
                detail.append(f"missing {missing}")
            if extra:
                detail.append(f"unexpected {extra}")
            problems.append(f"node '{n.id}': election set mismatch ({', '.join(detail)})")

    ids = {n.id for n in nodes}
    seen_pairs: set[tuple[str, str]] = set()
    edges_ok = True
    for e in edges:
        if e.a == e.b:
            problems.append(f"edge ('{e.a}','{e.b}'): self-loop")
            edges_ok = False
            continue
        dangling = [x for x in (e.a, e.b) if x not in ids]
        if dangling:
            for x in dangling:
                problems.append(f"edge ('{e.a}','{e.b}'): endpoint '{x}' is not a node")
            edges_ok = False
            continue
        if e.shared_perimeter <= 0:
            problems.append(f"edge ('{e.a}','{e.b}'): shared_perimeter must be positive")
        pair = (e.a, e.b) if e.a < e.b else (e.b, e.a)
        if pair in seen_pairs:
            problems.append(f"duplicate edge ('{pair[0]}','{pair[1]}')")
        seen_pairs.add(pair)

    # Connectivity is only meaningful once the edge list is structurally sound.
    if edges_ok and len(ids) == len(nodes):
        neighbors: dict[str, list[str]] = defaultdict(list)
        for e in edges:
            neighbors[e.a].append(e.b)
            neighbors[e.b].append(e.a)
        start = nodes[0].id
        reached = {start}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for nxt in neighbors[cur]:
                if nxt not in reached:
                    reached.add(nxt)
                    queue.append(nxt)
        if len(reached) < len(nodes):
            outside = next(n.id for n in nodes if n.id not in reached)
            problems.append(
                f"graph is disconnected: node '{outside}' is not reachable from '{start}'"
            )
    return problems


def _parse_payload(data: object) -> tuple[list[Node], list[Edge], list[str]]:
    problems: list[str] = []
    nodes: list[Node] = []
    edges: list[Edge] = []
    if not isinstance(data, dict) or "nodes" not in data or "edges" not in data:
        return [], [], ["top-level object must contain 'nodes' and 'edges'"]
    for i, raw in enumerate(data["nodes"]):
        label = raw.get("id", f"<node #{i}>") if isinstance(raw, dict) else f"<node #{i}>"
        try:
            votes = {
                election: VoteCount(dem=int(vc["dem"]), rep=int(vc["rep"]))
                for election, vc in raw.get("votes", {}).items()
            }
            nodes.append(
                Node(
                    id=str(raw["id"]),
                    population=int(raw["population"]),
                    county=str(raw["county"]),
                    exterior_perimeter=float(raw["exterior_perimeter"]),
                    votes=votes,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"node '{label}': malformed ({exc!r})")
    for i, raw in enumerate(data["edges"]):
        try:
            edges.append(
                Edge(a=str(raw["a"]), b=str(raw["b"]), shared_perimeter=float(raw["shared_perimeter"]))
            )
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"edge #{i}: malformed ({exc!r})")
    return nodes, edges, problems


def validate_graph_file(path) -> list[str]:
    """Every violation found in the file; empty list means the graph is valid."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return [f"cannot parse '{path}': {exc}"]
    nodes, edges, problems = _parse_payload(data)
    if problems:
        return problems
    return structural_problems(nodes, edges)


def load_graph(path) -> DualGraph:
    """Load and validate a graph JSON file, raising on the first violation."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GraphValidationError(f"cannot parse '{path}': {exc}") from exc
    nodes, edges, problems = _parse_payload(data)
    if problems:
        raise GraphValidationError(problems[0])
    return DualGraph(nodes, edges)


def save_graph(g: DualGraph, path) -> None:
    """Write the graph back out in the load format. Attribute values round-trip exactly."""
    payload = {
        "nodes": [
            {
                "id": n.id,
                "population": n.population,
                "county": n.county,
                "exterior_perimeter": n.exterior_perimeter,
                "votes": {e: {"dem": vc.dem, "rep": vc.rep} for e, vc in sorted(n.votes.items())},
            }
            for n in g.nodes
        ],
        "edges": [
            {"a": e.a, "b": e.b, "shared_perimeter": e.shared_perimeter} for e in g.edges
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def _contract(g: DualGraph, merge_sets: Sequence[Sequence[str]]) -> DualGraph:
    """Contract each id set to a single node keeping the lexicographically smallest id.

    Populations, votes, and exterior perimeters are summed; internal edges
    disappear; parallel edges to a common neighbor collapse with their
    shared_perimeter values summed.
    """
    leader: dict[str, str] = {}
    for ids in merge_sets:
        rep = min(ids)
        for nid in ids:
            leader[nid] = rep
    if not leader:
        return g

    members: dict[str, list[Node]] = defaultdict(list)
    for n in g.nodes:
        members[leader.get(n.id, n.id)].append(n)

    new_nodes: list[Node] = []
    for n in g.nodes:
        rep = leader.get(n.id, n.id)
        if rep != n.id:
            continue
        group = members[rep]
        if len(group) == 1:
            new_nodes.append(n)
            continue
        votes = {
            e: VoteCount(
                dem=sum(m.votes[e].dem for m in group),
                rep=sum(m.votes[e].rep for m in group),
            )
            for e in g.elections
        }
        new_nodes.append(
            Node(
                id=rep,
                population=sum(m.population for m in group),
                county=n.county,
                exterior_perimeter=sum(m.exterior_perimeter for m in group),
                votes=votes,
            )
        )

    merged_shared: dict[tuple[str, str], float] = {}
    for e in g.edges:
        ra = leader.get(e.a, e.a)
        rb = leader.get(e.b, e.b)
        if ra == rb:
            continue
        key = (ra, rb) if ra < rb else (rb, ra)
        merged_shared[key] = merged_shared.get(key, 0.0) + e.shared_perimeter
    new_edges = [Edge(a=a, b=b, shared_perimeter=w) for (a, b), w in merged_shared.items()]
    return DualGraph(new_nodes, new_edges)


def merge_small_counties(g: DualGraph, threshold: int) -> DualGraph:
    """Contract every county with total population below the threshold to one node.

    Counties at or above the threshold are untouched; threshold 0 is the identity.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    county_pop: dict[str, int] = defaultdict(int)
    for n in g.nodes:
        county_pop[n.county] += n.population
    groups: dict[str, list[str]] = defaultdict(list)
    for n in g.nodes:
        if county_pop[n.county] < threshold:
            groups[n.county].append(n.id)
    merge_sets = [ids for ids in groups.values() if len(ids) > 1]
    if not merge_sets:
        return g
    return _contract(g, merge_sets)


def merge_nodes(g: DualGraph, ids: Iterable[str]) -> DualGraph:
    """Contract an explicit node set; the ids must share a county and induce a connected subgraph."""
    id_set = set(ids)
    if not id_set:
        raise ValueError("no node ids given")
    unknown = sorted(x for x in id_set if x not in g._index)
    if unknown:
        raise ValueError(f"unknown node id '{unknown[0]}'")
    counties = {g.node(x).county for x in id_set}
    if len(counties) > 1:
        raise ValueError(f"nodes span multiple counties: {sorted(counties)}")
    if len(id_set) == 1:
        return g

    # Connectivity within the induced subgraph.
    start = next(iter(id_set))
    reached = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nbr_idx, _ in g.adjacency[g.node_index(cur)]:
            nbr = g.node_ids[nbr_idx]
            if nbr in id_set and nbr not in reached:
                reached.add(nbr)
                queue.append(nbr)
    if reached != id_set:
        missing = sorted(id_set - reached)
        raise ValueError(f"nodes do not induce a connected subgraph (e.g. '{missing[0]}' detached)")
    return _contract(g, [sorted(id_set)])
