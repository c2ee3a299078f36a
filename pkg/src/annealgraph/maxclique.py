"""Maximum clique: exact branch and bound, greedy, SA over fixed-size subsets, and size-limited splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .graph import Graph
from .solvers import _rng


@dataclass(frozen=True)
class CliqueResult:
    vertices: tuple[int, ...]
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def size(self) -> int:
        return len(self.vertices)

    @classmethod
    def verified(cls, g: Graph, vertices, **stats) -> CliqueResult:
        vs = tuple(sorted(int(v) for v in vertices))
        if len(set(vs)) != len(vs) or not g.is_clique(vs):
            raise ValueError(f"{vs} is not a clique")
        return cls(vs, stats)


# ---------------------------------------------------------------------------
# bitset branch and bound
# ---------------------------------------------------------------------------

def _color_classes(adj: list[int], P: int) -> tuple[list[int], list[int]]:
    """Greedy sequential coloring of the vertex set P; vertices listed by color."""
    order, colors = [], []
    k = 0
    U = P
    while U:
        k += 1
        Q = U
        while Q:
            low = Q & -Q
            v = low.bit_length() - 1
            Q &= ~adj[v] & ~low
            U &= ~low
            order.append(v)
            colors.append(k)
    return order, colors


def _bits_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _max_clique_bits(adj: list[int], P: int, floor: int = 0) -> tuple[list[int] | None, int]:
    """Largest clique inside P strictly bigger than ``floor``.

    Returns (vertices or None if nothing beats ``floor``, branch nodes visited).
    Greedy coloring gives the bound: a branch whose depth plus its color
    number cannot exceed the incumbent is cut.
    """
    best_size = floor
    best: list[int] | None = None
    nodes = 0
    stack: list[int] = []

    def expand(P):
        nonlocal best_size, best, nodes
        nodes += 1
        order, colors = _color_classes(adj, P)
        for i in range(len(order) - 1, -1, -1):
            if len(stack) + colors[i] <= best_size:
                return
            v = order[i]
            stack.append(v)
            NP = P & adj[v]
            if NP:
                expand(NP)
            elif len(stack) > best_size:
                best_size, best = len(stack), list(stack)
            stack.pop()
            P &= ~(1 << v)

    if P:
        expand(P)
    return best, nodes


def coloring_bound(g: Graph) -> int:
    """Number of colors used by greedy sequential coloring (an upper bound on clique size)."""
    return max(_color_classes(g.bitsets(), (1 << g.n) - 1)[1], default=0)


def exact_clique(g: Graph, *, max_vertices: int = 200) -> CliqueResult:
    if g.n > max_vertices:
        raise ValueError(f"exact_clique guard: {g.n} vertices exceeds {max_vertices}")
    if g.n == 0:
        return CliqueResult((), {"branch_nodes": 0})
    verts, nodes = _max_clique_bits(g.bitsets(), (1 << g.n) - 1, 0)
    return CliqueResult.verified(g, verts, branch_nodes=nodes)


def greedy_clique(g: Graph, seed=None) -> CliqueResult:
    """Repeatedly add the candidate with most neighbors among the remaining candidates."""
    if g.n == 0:
        raise ValueError("greedy_clique needs at least one vertex")
    rng = _rng(seed)
    adj = g.bitsets()
    cand = (1 << g.n) - 1
    clique = []
    while cand:
        scored = [((adj[v] & cand).bit_count(), rng.random(), v) for v in _bits_of(cand)]
        _, _, v = max(scored)
        clique.append(v)
        cand &= adj[v]
    return CliqueResult.verified(g, clique, seed=seed)


# ---------------------------------------------------------------------------
# simulated annealing over m-subsets
# ---------------------------------------------------------------------------

def _sa_probe(g: Graph, m: int, alpha: float, rng, start: list[int], t_min: float):
    """Search for an m-clique; returns (vertices or None, steps used)."""
    n = g.n
    adj = g.adj
    member = [False] * n
    members = []
    for v in start[:m]:
        if not member[v]:
            member[v] = True
            members.append(v)
    rest = [v for v in range(n) if not member[v]]
    rng.shuffle(rest)
    while len(members) < m:
        v = rest.pop()
        member[v] = True
        members.append(v)
    outside = [v for v in range(n) if not member[v]]
    d = [0] * n
    for v in members:
        for x in adj[v]:
            d[x] += 1
    missing = m * (m - 1) // 2 - sum(d[v] for v in members) // 2
    if missing == 0:
        return sorted(members), 0
    if not outside:
        return None, 0

    temp = float(m)
    # the cooling schedule alone sets the effort, so alpha trades time for quality
    budget = max(math.ceil(math.log(t_min / temp) / math.log(alpha)), 1) if temp > t_min else 1
    rand = rng.random
    n_in, n_out = len(members), len(outside)
    for step in range(1, budget + 1):
        i = int(rand() * n_in)
        j = int(rand() * n_out)
        u, w = members[i], outside[j]
        delta = d[u] - d[w] + (1 if w in adj[u] else 0)
        if delta <= 0 or rand() < math.exp(-delta / temp):
            members[i], outside[j] = w, u
            for x in adj[u]:
                d[x] -= 1
            for x in adj[w]:
                d[x] += 1
            missing += delta
            if missing == 0:
                return sorted(members), step
        temp = max(temp * alpha, 1e-300)
    return None, budget


def sa_clique(g: Graph, alpha: float = 0.9996, seed=None, *, lower: CliqueResult | None = None,
              upper: int | None = None, t_min: float = 1e-3) -> CliqueResult:
    """Binary search on clique size m with an annealing probe per m.

    Each probe anneals over m-vertex subsets (swap one member for one
    non-member; energy = number of missing edges) with ``T0 = m`` and
    ``T <- alpha * T``, until it hits energy 0 or the temperature drops
    below ``t_min``. The search runs between the greedy clique size and a
    coloring bound.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    rng = _rng(seed)
    base = lower if lower is not None else greedy_clique(g, rng)
    lo = base.size
    witness = list(base.vertices)
    hi = upper if upper is not None else coloring_bound(g)
    hi = min(hi, max(g.degrees(), default=0) + 1)
    probes = steps = 0
    while lo < hi:
        m = (lo + hi + 1) // 2
        found, used = _sa_probe(g, m, alpha, rng, witness, t_min)
        probes += 1
        steps += used
        if found is not None:
            lo, witness = m, found
        else:
            hi = m - 1
    return CliqueResult.verified(g, witness, probes=probes, steps=steps, alpha=alpha, seed=seed)


# ---------------------------------------------------------------------------
# size-limited divide and conquer
# ---------------------------------------------------------------------------

def split_solve(g: Graph, size_limit: int = 45, subsolver: Callable[[Graph], CliqueResult] | None = None
                ) -> CliqueResult:
    """Maximum clique via pivot splitting into subgraphs of at most ``size_limit`` vertices.

    maxclique(G) = max(1 + maxclique(G[N(v)]), maxclique(G - v)) with v the
    highest-degree vertex of the current subgraph. A branch is dropped when
    its depth plus its vertex count cannot beat the incumbent. Subgraphs
    within the limit go to ``subsolver`` (default: exact branch and bound);
    ``stats["solver_calls"]`` counts those leaf calls.
    """
    if size_limit < 2:
        raise ValueError("size_limit must be >= 2")
    adj = g.bitsets()
    best: list[int] = []
    calls = 0
    internal = 0
    prefix: list[int] = []

    def leaf(P):
        nonlocal calls, best
        calls += 1
        need = len(best) - len(prefix)
        if subsolver is None:
            found, _ = _max_clique_bits(adj, P, max(need, 0))
            found = found or []
        else:
            sub, labels = g.induced_subgraph(_bits_of(P))
            res = subsolver(sub)
            if not sub.is_clique(res.vertices):
                raise ValueError("subsolver returned a non-clique")
            found = [labels[v] for v in res.vertices]
        if len(prefix) + len(found) > len(best):
            best = prefix + found

    def solve(P):
        nonlocal internal
        while True:
            size = P.bit_count()
            if len(prefix) + size <= len(best):
                return
            if size <= size_limit:
                leaf(P)
                return
            internal += 1
            pivot, top = -1, -1
            for v in _bits_of(P):
                dv = (adj[v] & P).bit_count()
                if dv > top:
                    pivot, top = v, dv
            prefix.append(pivot)
            solve(P & adj[pivot])
            prefix.pop()
            P &= ~(1 << pivot)

    if g.n:
        solve((1 << g.n) - 1)
    return CliqueResult.verified(g, best, solver_calls=calls, branch_nodes=internal, size_limit=size_limit)


def size_limit_for_qubits(qubits: int, rounding: str = "nearest") -> int:
    """Largest complete graph K_{4M+1} for a square C(M, M, 4) chimera of about ``qubits`` qubits.

    M = sqrt(qubits / 8), rounded to the nearest integer (or down with
    ``rounding="floor"``).
    """
    if qubits < 8:
        raise ValueError("need at least one chimera cell (8 qubits)")
    root = math.sqrt(qubits / 8)
    if rounding == "nearest":
        M = int(math.floor(root + 0.5))
    elif rounding == "floor":
        M = int(math.floor(root + 1e-12))
    else:
        raise ValueError(f"unknown rounding {rounding!r}")
    return 4 * max(M, 1) + 1
