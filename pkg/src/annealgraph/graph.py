"""Undirected simple graphs on dense integer labels 0..n-1."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np


class Graph:
    """Immutable undirected simple graph.

    Vertices are ``0..n-1``. Edges are stored once as ``(u, v)`` with
    ``u < v``; ``adj[v]`` is the neighbor set of ``v``.
    """

    __slots__ = ("n", "edges", "adj", "_bits")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        adj = [set() for _ in range(n)]
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u > v:
                u, v = v, u
            norm.add((u, v))
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self.edges = frozenset(norm)
        self.adj = tuple(frozenset(a) for a in adj)
        self._bits = None

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adj]

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def bitsets(self) -> list[int]:
        """Adjacency as Python-int bitmasks, cached (used by clique search)."""
        if self._bits is None:
            bits = [0] * self.n
            for v, nbrs in enumerate(self.adj):
                b = 0
                for w in nbrs:
                    b |= 1 << w
                bits[v] = b
            self._bits = bits
        return self._bits

    def induced_subgraph(self, vertices: Sequence[int]) -> tuple[Graph, list[int]]:
        """Subgraph on ``vertices``; returns it with the new->old label map."""
        labels = sorted(set(vertices))
        index = {v: i for i, v in enumerate(labels)}
        sub_edges = [
            (index[u], index[w])
            for u in labels
            for w in self.adj[u]
            if w in index and u < w
        ]
        return Graph(len(labels), sub_edges), labels

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return all(self.has_edge(a, b) for i, a in enumerate(vs) for b in vs[i + 1:])

    def is_independent(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return not any(self.has_edge(a, b) for i, a in enumerate(vs) for b in vs[i + 1:])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.num_edges})"


def random_graph(n: int, p: float, seed=None) -> Graph:
    """Erdos-Renyi G(n, p): one coin flip per vertex pair, pairs in lexicographic order."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def complete_graph(n: int) -> Graph:
    return Graph(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def empty_graph(n: int) -> Graph:
    return Graph(n)


def path_graph(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, ((i, (i + 1) % n) for i in range(n)))


def star_graph(leaves: int) -> Graph:
    """Center 0 joined to ``leaves`` leaves."""
    return Graph(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, ((u, a + v) for u in range(a) for v in range(b)))


def complement(g: Graph) -> Graph:
    n = g.n
    return Graph(n, ((u, v) for u in range(n) for v in range(u + 1, n) if v not in g.adj[u]))


def contract_edge(g: Graph, u: int, v: int) -> tuple[Graph, list[int]]:
    """Contract edge (u, v).

    The merged vertex takes label ``min(u, v)``; labels above ``max(u, v)``
    shift down by one. Returns the contracted graph and ``merge_map`` with
    ``merge_map[old] = new`` for every old vertex.
    """
    if not (0 <= u < g.n and 0 <= v < g.n) or not g.has_edge(u, v):
        raise ValueError(f"cannot contract ({u}, {v}): not an edge")
    keep, gone = min(u, v), max(u, v)
    merge_map = [x if x < gone else x - 1 for x in range(g.n)]
    merge_map[gone] = keep
    new_edges = set()
    for a, b in g.edges:
        a2, b2 = merge_map[a], merge_map[b]
        if a2 != b2:
            new_edges.add((a2, b2) if a2 < b2 else (b2, a2))
    return Graph(g.n - 1, new_edges), merge_map


def is_bipartite(g: Graph) -> bool:
    color = [-1] * g.n
    for s in range(g.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in g.adj[x]:
                if color[y] < 0:
                    color[y] = 1 - color[x]
                    queue.append(y)
                elif color[y] == color[x]:
                    return False
    return True


def is_connected(g: Graph, vertices: Iterable[int] | None = None) -> bool:
    """Whether ``vertices`` (default: all) induce a connected subgraph."""
    vs = set(range(g.n)) if vertices is None else set(vertices)
    if not vs:
        return True
    start = next(iter(vs))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in g.adj[x]:
            if y in vs and y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(vs)


def max_degree(g: Graph) -> int:
    return max((len(a) for a in g.adj), default=0)
