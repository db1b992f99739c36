"""Synthetic dual graphs for tests and experiments.

Grid graphs use rook adjacency with unit boundary lengths, so a single
district covering an r x c grid has perimeter 2(r + c).
"""

from __future__ import annotations

from typing import Callable

from .graph import DualGraph, Edge, Node, VoteCount

VoteFn = Callable[[int, int], tuple[int, int]]


def _default_votes(row: int, col: int) -> tuple[int, int]:
    # Deterministic positive counts with spatial variety.
    return 3 + (row * 7 + col * 3) % 5, 3 + (row + 2 * col) % 5


def grid_graph(
    rows: int,
    cols: int,
    county_blocks: tuple[int, int] = (1, 1),
    elections: dict[str, VoteFn] | None = None,
    population: int | Callable[[int, int], int] = 1,
) -> DualGraph:
    """Rook-adjacency grid with counties laid out as a block grid.

    county_blocks=(2, 2) carves the grid into four quadrant counties;
    population and per-election vote counts may vary by cell.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid must be at least 1x1")
    br, bc = county_blocks
    if not 1 <= br <= rows or not 1 <= bc <= cols:
        raise ValueError("county blocks must fit inside the grid")
    if elections is None:
        elections = {"poll": _default_votes}
    pop_fn = population if callable(population) else (lambda r, c: population)

    wr, wc = len(str(rows - 1)), len(str(cols - 1))
    node_id = lambda r, c: f"r{r:0{wr}d}c{c:0{wc}d}"

    nodes = []
    for r in range(rows):
        for c in range(cols):
            county = f"county{(r * br) // rows}{(c * bc) // cols}"
            exterior = float((r == 0) + (r == rows - 1) + (c == 0) + (c == cols - 1))
            votes = {name: VoteCount(*fn(r, c)) for name, fn in elections.items()}
            nodes.append(
                Node(
                    id=node_id(r, c),
                    population=int(pop_fn(r, c)),
                    county=county,
                    exterior_perimeter=exterior,
                    votes=votes,
                )
            )

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append(Edge(a=node_id(r, c), b=node_id(r, c + 1), shared_perimeter=1.0))
            if r + 1 < rows:
                edges.append(Edge(a=node_id(r, c), b=node_id(r + 1, c), shared_perimeter=1.0))
    return DualGraph(nodes, edges)


def path_graph(
    populations: list[int],
    county: str = "county0",
    votes: list[tuple[int, int]] | None = None,
) -> DualGraph:
    """Path p0 - p1 - ... with unit shared boundaries and unit exteriors."""
    n = len(populations)
    if n < 1:
        raise ValueError("path needs at least one node")
    if votes is None:
        votes = [(1, 1)] * n
    width = len(str(n - 1))
    ids = [f"p{i:0{width}d}" for i in range(n)]
    nodes = [
        Node(
            id=ids[i],
            population=populations[i],
            county=county,
            exterior_perimeter=1.0,
            votes={"poll": VoteCount(*votes[i])},
        )
        for i in range(n)
    ]
    edges = [Edge(a=ids[i], b=ids[i + 1], shared_perimeter=1.0) for i in range(n - 1)]
    return DualGraph(nodes, edges)
