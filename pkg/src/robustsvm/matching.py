"""Maximum-cardinality bipartite matching (Hopcroft-Karp).

The left part indexes training samples and the right part testing
samples; adjacency is a list of right-neighbor lists.  BFS builds layers
of shortest augmenting paths and an iterative DFS augments along them, so
deep graphs cannot hit the recursion limit.
"""
from __future__ import annotations

from collections import deque
from typing import Sequence

__all__ = ["hopcroft_karp"]

_INF = -1  # sentinel distance


def hopcroft_karp(n_left: int, n_right: int, adjacency: Sequence[Sequence[int]]):
    """Return (matching size, pair_left) where pair_left[u] is the right
    vertex matched to u or -1."""
    if len(adjacency) != n_left:
        raise ValueError("adjacency must have one neighbor list per left vertex")
    pair_left = [-1] * n_left
    pair_right = [-1] * n_right
    dist = [0] * n_left

    def bfs() -> bool:
        queue = deque()
        found_free = False
        for u in range(n_left):
            if pair_left[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                w = pair_right[v]
                if w == -1:
                    found_free = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found_free

    def dfs(root: int) -> bool:
        # Iterative DFS over the layered graph; stack entries carry the
        # iterator position into each vertex's neighbor list.
        stack = [(root, 0)]
        path = []  # (u, v) edges tentatively on the augmenting path
        while stack:
            u, start = stack.pop()
            advanced = False
            for idx in range(start, len(adjacency[u])):
                v = adjacency[u][idx]
                w = pair_right[v]
                if w == -1:
                    path.append((u, v))
                    for uu, vv in path:
                        pair_left[uu] = vv
                        pair_right[vv] = uu
                    return True
                if dist[w] == dist[u] + 1:
                    stack.append((u, idx + 1))
                    stack.append((w, 0))
                    path.append((u, v))
                    advanced = True
                    break
            if not advanced:
                dist[u] = _INF
                if path:
                    path.pop()
        return False

    size = 0
    while bfs():
        for u in range(n_left):
            if pair_left[u] == -1 and dfs(u):
                size += 1
    return size, pair_left
