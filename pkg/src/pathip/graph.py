"""Undirected graph with the neighborhood/path machinery shared by all problem layers."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

UNREACHABLE = -1


class GraphError(ValueError):
    """Raised for malformed graphs (self-loops, bad vertex ids, disconnection)."""


@dataclass(frozen=True)
class Graph:
    """Connected undirected graph over vertices 0..n-1.

    Edges are stored once as (u, v) with u < v; adjacency lists are sorted.
    Instances are immutable and safe to share across solver runs.
    """

    vertex_count: int
    edges: frozenset[tuple[int, int]]
    adjacency: tuple[tuple[int, ...], ...] = field(compare=False)

    @staticmethod
    def from_edges(vertex_count: int, edges: Iterable[tuple[int, int]],
                   require_connected: bool = True) -> "Graph":
        canon = set()
        for u, v in edges:
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise GraphError(f"edge ({u},{v}) out of range for {vertex_count} vertices")
            if u == v:
                raise GraphError(f"self-loop edge at vertex {u}")
            canon.add((min(u, v), max(u, v)))
        adj: list[list[int]] = [[] for _ in range(vertex_count)]
        for u, v in canon:
            adj[u].append(v)
            adj[v].append(u)
        g = Graph(vertex_count, frozenset(canon), tuple(tuple(sorted(a)) for a in adj))
        if require_connected and not g.is_connected():
            raise GraphError("graph disconnected")
        return g

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return False
        return UNREACHABLE not in self.bfs_distances([0])

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def bfs_distances(self, sources: Iterable[int],
                      blocked: frozenset[int] | set[int] = frozenset()) -> list[int]:
        """Hop distance from the source set to every vertex; UNREACHABLE where cut off.

        Vertices in `blocked` are not expanded and keep distance UNREACHABLE
        (a blocked source is unreachable too).
        """
        dist = [UNREACHABLE] * self.vertex_count
        queue: deque[int] = deque()
        for s in sources:
            if s not in blocked and dist[s] == UNREACHABLE:
                dist[s] = 0
                queue.append(s)
        while queue:
            v = queue.popleft()
            for w in self.adjacency[v]:
                if w not in blocked and dist[w] == UNREACHABLE:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    def shortest_path(self, start: int, goal: int,
                      blocked: frozenset[int] | set[int] = frozenset()) -> list[int] | None:
        """Lexicographically smallest shortest path, or None if unreachable.

        Determinism matters: the reference paths drive the pruning heuristics,
        so ties are broken by preferring the smallest predecessor id.
        """
        if start in blocked or goal in blocked:
            return None
        dist = self.bfs_distances([start], blocked)
        if dist[goal] == UNREACHABLE:
            return None
        path = [goal]
        v = goal
        while v != start:
            v = min(w for w in self.adjacency[v]
                    if w not in blocked and dist[w] == dist[v] - 1)
            path.append(v)
        path.reverse()
        return path

    def diameter(self) -> int:
        return max(max(self.bfs_distances([v])) for v in range(self.vertex_count))


def is_valid_path(graph: Graph, vertices: Sequence[int]) -> bool:
    """True when consecutive entries are equal or adjacent (wait or move steps)."""
    if not vertices:
        return False
    if any(not 0 <= v < graph.vertex_count for v in vertices):
        return False
    return all(a == b or graph.has_edge(a, b) for a, b in zip(vertices, vertices[1:]))


def grid_graph(rows: int, cols: int, removed: Iterable[int] = ()) -> tuple[Graph, list[int]]:
    """4-connected rows x cols grid with some cells removed.

    Cell (r, c) is numbered r*cols + c before removal; the returned graph is
    re-indexed over the surviving cells. Returns (graph, kept_cell_ids) where
    kept_cell_ids[i] is the original cell id of vertex i.
    """
    removed_set = set(removed)
    kept = [i for i in range(rows * cols) if i not in removed_set]
    index = {cell: i for i, cell in enumerate(kept)}
    edges = []
    for r in range(rows):
        for c in range(cols):
            cell = r * cols + c
            if cell in removed_set:
                continue
            if c + 1 < cols and cell + 1 not in removed_set:
                edges.append((index[cell], index[cell + 1]))
            if r + 1 < rows and cell + cols not in removed_set:
                edges.append((index[cell], index[cell + cols]))
    return Graph.from_edges(len(kept), edges), kept
