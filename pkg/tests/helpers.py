import json
from pathlib import Path

from districting.graph import DualGraph, Edge, Node, VoteCount

DATA_DIR = Path(__file__).parent / "data"


def make_graph(node_specs, edge_specs):
    """Build a DualGraph from terse tuples.

    node_specs: (id, population[, county[, exterior[, votes dict]]])
    edge_specs: (a, b[, shared_perimeter])
    """
    nodes = []
    for spec in node_specs:
        nid, pop = spec[0], spec[1]
        county = spec[2] if len(spec) > 2 else "county0"
        exterior = spec[3] if len(spec) > 3 else 1.0
        votes = spec[4] if len(spec) > 4 else {"poll": (1, 1)}
        nodes.append(
            Node(
                id=nid,
                population=pop,
                county=county,
                exterior_perimeter=exterior,
                votes={e: VoteCount(*v) for e, v in votes.items()},
            )
        )
    edges = [
        Edge(a=e[0], b=e[1], shared_perimeter=e[2] if len(e) > 2 else 1.0)
        for e in edge_specs
    ]
    return DualGraph(nodes, edges)
