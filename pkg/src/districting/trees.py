"""Spanning-tree internals shared by the seed generator and the ReCom proposal.

Everything here works on local integer node indices; callers translate to and
from node ids.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def max_weight_spanning_edges(
    num_nodes: int, pairs: Sequence[tuple[int, int]], weights: np.ndarray
) -> list[int] | None:
    """Kruskal's algorithm on descending weight; ties break by input position.

    Returns positions into `pairs`, or None if the edges do not connect all
    nodes.
    """
    order = np.argsort(-np.asarray(weights, dtype=np.float64), kind="stable")
    parent = list(range(num_nodes))
    size = [1] * num_nodes

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    chosen: list[int] = []
    for pos in order:
        a, b = pairs[pos]
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
        chosen.append(int(pos))
        if len(chosen) == num_nodes - 1:
            return chosen
    return chosen if num_nodes <= 1 else None


def rooted_subtree_sums(
    num_nodes: int, tree_pairs: Sequence[tuple[int, int]], values: np.ndarray, root: int = 0
):
    """Orient a tree away from `root` and accumulate per-subtree value sums.

    Returns (preorder, position-of-node-in-preorder, parent node, subtree sums,
    subtree sizes). Removing the edge (node, parent[node]) leaves a component
    whose total is sums[node] and whose members are the preorder slice
    [position[node], position[node] + sizes[node]).
    """
    adjacency: list[list[int]] = [[] for _ in range(num_nodes)]
    for a, b in tree_pairs:
        adjacency[a].append(b)
        adjacency[b].append(a)

    order = np.empty(num_nodes, dtype=np.int64)
    position = np.empty(num_nodes, dtype=np.int64)
    parent = np.full(num_nodes, -1, dtype=np.int64)
    stack = [root]
    filled = 0
    while stack:
        node = stack.pop()
        order[filled] = node
        position[node] = filled
        filled += 1
        for nbr in adjacency[node]:
            if nbr != parent[node]:
                parent[nbr] = node
                stack.append(nbr)

    sums = np.asarray(values, dtype=np.float64).copy()
    sizes = np.ones(num_nodes, dtype=np.int64)
    for i in range(num_nodes - 1, 0, -1):
        node = order[i]
        sums[parent[node]] += sums[node]
        sizes[parent[node]] += sizes[node]
    return order, position, parent, sums, sizes
