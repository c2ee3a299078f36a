"""Problem Hamiltonians for independent set / clique and edge-cut / core-halo partitioning.

Each builder returns a flat model (linear, couplers, offset) with all
penalty terms already expanded, plus the variable index where the encoding
needs one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, max_degree
from .model import IsingModel, QuboModel


class InfeasibleAssignment(ValueError):
    """Raised by a decoder when the assignment violates the encoding."""

    def __init__(self, message, vertices=()):
        super().__init__(message)
        self.vertices = list(vertices)


@dataclass(frozen=True)
class Partition:
    """Vertex-to-part assignment, parts numbered ``0..K-1``."""

    assignment: tuple[int, ...]
    K: int

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))
        if self.K < 1:
            raise ValueError("K must be >= 1")
        bad = [v for v, a in enumerate(self.assignment) if not 0 <= a < self.K]
        if bad:
            raise ValueError(f"vertices {bad} assigned outside 0..{self.K - 1}")

    @property
    def n(self) -> int:
        return len(self.assignment)

    def sizes(self) -> list[int]:
        out = [0] * self.K
        for a in self.assignment:
            out[a] += 1
        return out

    def parts(self) -> list[set[int]]:
        out = [set() for _ in range(self.K)]
        for v, a in enumerate(self.assignment):
            out[a].add(v)
        return out

    def is_balanced(self) -> bool:
        lo, hi = self.n // self.K, -(-self.n // self.K)
        return all(lo <= s <= hi for s in self.sizes())


@dataclass(frozen=True)
class KwayVarIndex:
    n: int
    K: int

    def var(self, v: int, k: int) -> int:
        return v * self.K + k

    @property
    def num_vars(self) -> int:
        return self.n * self.K


@dataclass
class ChVarIndex:
    """Variable layout for the core-halo model.

    Cores ``c[v,k]`` first, then halos ``h[v,k]``, then one auxiliary
    ``z[(v,w),k]`` per ordered pair with ``w`` in the closed neighborhood of ``v``.
    """

    n: int
    K: int
    pairs: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        self._pair_index = {p: i for i, p in enumerate(self.pairs)}

    def core(self, v: int, k: int) -> int:
        return v * self.K + k

    def halo(self, v: int, k: int) -> int:
        return (self.n + v) * self.K + k

    def aux(self, v: int, w: int, k: int) -> int:
        return (2 * self.n + self._pair_index[(v, w)]) * self.K + k

    @property
    def num_vars(self) -> int:
        return self.K * (2 * self.n + len(self.pairs))

    @classmethod
    def for_graph(cls, g: Graph, K: int) -> ChVarIndex:
        pairs = [(v, w) for v in range(g.n) for w in sorted(g.adj[v] | {v})]
        return cls(g.n, K, pairs)


# ---------------------------------------------------------------------------
# independent set and clique
# ---------------------------------------------------------------------------

def build_mis_qubo(g: Graph, L: float = -1.0, M: float = 2.0) -> QuboModel:
    """``L * sum x_i + M * sum_{(i,j) in E} x_i x_j``; optimum is -(independence number) for defaults."""
    if not (M > -L > 0):
        raise ValueError(f"need M > -L > 0 so a violating edge never pays; got L={L}, M={M}")
    q = QuboModel(g.n, np.full(g.n, float(L)))
    for u, v in g.sorted_edges():
        q.add_quadratic(u, v, M)
    return q


def build_clique_kfixed_qubo(g: Graph, K: int, A: float | None = None, B: float = 1.0) -> QuboModel:
    """``A (K - sum x)^2 + B (K(K-1)/2 - sum_E x_u x_v)``, zero iff a K-clique is selected.

    ``A`` defaults to ``B * (K + 1)``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if A is None:
        A = B * (K + 1)
    if A <= 0 or B <= 0:
        raise ValueError("A and B must be positive")
    n = g.n
    # (K - sum x)^2 = K^2 - 2K sum x + sum x + 2 sum_{u<v} x_u x_v
    q = QuboModel(n, np.full(n, A * (1 - 2 * K)), offset=A * K * K + B * K * (K - 1) / 2)
    for u in range(n):
        for v in range(u + 1, n):
            q.add_quadratic(u, v, 2 * A)
    for u, v in g.sorted_edges():
        q.add_quadratic(u, v, -B)
    return q


def decode_mis(g: Graph, x) -> tuple[set[int], bool]:
    x = np.asarray(x)
    if x.shape != (g.n,):
        raise ValueError(f"assignment must have length {g.n}")
    chosen = {i for i in range(g.n) if x[i] == 1}
    return chosen, g.is_independent(sorted(chosen))


# ---------------------------------------------------------------------------
# edge-cut partitioning
# ---------------------------------------------------------------------------

def bisection_weights(g: Graph) -> tuple[float, float]:
    """(A, B) with B = 1 and A = max_degree/4 + 1."""
    return max_degree(g) / 4 + 1, 1.0


def build_bisection_ising(g: Graph) -> IsingModel:
    """``A (sum s)^2 + B sum_E (1 - s_u s_v)/2`` in expanded form.

    (sum s)^2 = n + 2 sum_{i<j} s_i s_j, so every pair carries 2A, edges
    additionally -B/2, and the constant is A n + B |E| / 2.
    """
    n = g.n
    if n < 2:
        raise ValueError("bisection needs at least 2 vertices")
    A, B = bisection_weights(g)
    m = IsingModel(n, offset=A * n + B * g.num_edges / 2)
    for u in range(n):
        for v in range(u + 1, n):
            m.add_quadratic(u, v, 2 * A)
    for u, v in g.sorted_edges():
        m.add_quadratic(u, v, -B / 2)
    return m


def spins_to_partition(s) -> Partition:
    """Spin +1 -> part 0, spin -1 -> part 1."""
    return Partition(tuple(0 if v == 1 else 1 for v in np.asarray(s)), 2)


def partition_to_spins(p: Partition) -> np.ndarray:
    return np.array([1 if a == 0 else -1 for a in p.assignment], dtype=np.int64)


def kway_weights(g: Graph) -> tuple[float, float, float]:
    """(A, B, C) = (n/2 + 1, n/2 + 1, 1)."""
    a = g.n / 2 + 1
    return a, a, 1.0


def build_kway_qubo(g: Graph, K: int) -> tuple[QuboModel, KwayVarIndex]:
    """One-hot K-way edge-cut model ``A H_A + B H_B + C H_C``.

    H_A = sum_v (sum_k s_vk - 1)^2, H_B = sum_k (sum_v s_vk - n/K)^2,
    H_C = sum_E sum_k (1 - s_uk s_vk).
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    n = g.n
    A, B, C = kway_weights(g)
    idx = KwayVarIndex(n, K)
    target = n / K
    q = QuboModel(idx.num_vars)
    # H_A: per vertex, -sum_k s + 2 sum_{k<l} s s + 1
    for v in range(n):
        for k in range(K):
            q.add_linear(idx.var(v, k), -A)
            for l in range(k + 1, K):
                q.add_quadratic(idx.var(v, k), idx.var(v, l), 2 * A)
    q.add_offset(A * n)
    # H_B: per part, (1 - 2n/K) sum_v s + 2 sum_{v<w} s s + (n/K)^2
    for k in range(K):
        for v in range(n):
            q.add_linear(idx.var(v, k), B * (1 - 2 * target))
            for w in range(v + 1, n):
                q.add_quadratic(idx.var(v, k), idx.var(w, k), 2 * B)
    q.add_offset(B * K * target * target)
    # H_C
    for u, v in g.sorted_edges():
        for k in range(K):
            q.add_quadratic(idx.var(u, k), idx.var(v, k), -C)
    q.add_offset(C * K * g.num_edges)
    return q, idx


def encode_kway(idx: KwayVarIndex, p: Partition) -> np.ndarray:
    x = np.zeros(idx.num_vars, dtype=np.int64)
    for v, a in enumerate(p.assignment):
        x[idx.var(v, a)] = 1
    return x


def decode_kway(idx: KwayVarIndex, x) -> Partition:
    """One-hot rows to a Partition; raises :class:`InfeasibleAssignment` otherwise."""
    x = np.asarray(x)
    if x.shape != (idx.num_vars,):
        raise ValueError(f"assignment must have length {idx.num_vars}")
    rows = x.reshape(idx.n, idx.K)
    counts = rows.sum(axis=1)
    bad = [int(v) for v in np.flatnonzero(counts != 1)]
    if bad:
        raise InfeasibleAssignment(f"vertices {bad} are not assigned to exactly one part", bad)
    return Partition(tuple(int(a) for a in rows.argmax(axis=1)), idx.K)


# ---------------------------------------------------------------------------
# core-halo partitioning
# ---------------------------------------------------------------------------

def ch_weights(g: Graph) -> tuple[float, float, float]:
    """(A, B, C) = (n^2 + 1, 2n + 1, 1)."""
    n = g.n
    return n * n + 1.0, 2.0 * n + 1, 1.0


def build_ch_qubo(g: Graph, K: int) -> tuple[QuboModel, ChVarIndex]:
    """Core-halo model ``A H_A + B H_B + C H_C``.

    H_A = sum_v (sum_k c_vk - 1)^2
    H_B = sum_v sum_k sum_{w in N[v]} (h_vk - c_wk - z_(v,w),k)^2
    H_C = sum_k (sum_v h_vk)^2
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    n = g.n
    A, B, C = ch_weights(g)
    idx = ChVarIndex.for_graph(g, K)
    q = QuboModel(idx.num_vars)
    for v in range(n):
        for k in range(K):
            q.add_linear(idx.core(v, k), -A)
            for l in range(k + 1, K):
                q.add_quadratic(idx.core(v, k), idx.core(v, l), 2 * A)
    q.add_offset(A * n)
    # (a - b - c)^2 over binaries = a + b + c - 2ab - 2ac + 2bc
    for v, w in idx.pairs:
        for k in range(K):
            a, b, c = idx.halo(v, k), idx.core(w, k), idx.aux(v, w, k)
            q.add_linear(a, B)
            q.add_linear(b, B)
            q.add_linear(c, B)
            q.add_quadratic(a, b, -2 * B)
            q.add_quadratic(a, c, -2 * B)
            q.add_quadratic(b, c, 2 * B)
    for k in range(K):
        for v in range(n):
            q.add_linear(idx.halo(v, k), C)
            for w in range(v + 1, n):
                q.add_quadratic(idx.halo(v, k), idx.halo(w, k), 2 * C)
    return q, idx


def encode_ch(idx: ChVarIndex, g: Graph, p: Partition) -> np.ndarray:
    """Zero-penalty encoding of core assignment ``p``."""
    x = np.zeros(idx.num_vars, dtype=np.int64)
    for v, a in enumerate(p.assignment):
        x[idx.core(v, a)] = 1
    for v in range(g.n):
        closed = g.adj[v] | {v}
        for k in range(idx.K):
            if any(p.assignment[w] == k for w in closed):
                x[idx.halo(v, k)] = 1
                for w in closed:
                    if p.assignment[w] != k:
                        x[idx.aux(v, w, k)] = 1
    return x


@dataclass
class ChDecoding:
    partition: Partition | None
    halos: list[set[int]]
    feasible: bool
    diagnostics: list[str]


def decode_ch(idx: ChVarIndex, x, g: Graph) -> ChDecoding:
    """Read cores and halos; feasible iff both penalty terms vanish."""
    x = np.asarray(x)
    if x.shape != (idx.num_vars,):
        raise ValueError(f"assignment must have length {idx.num_vars}")
    diags = []
    cores = np.array([[x[idx.core(v, k)] for k in range(idx.K)] for v in range(idx.n)]).reshape(idx.n, idx.K)
    bad = [int(v) for v in np.flatnonzero(cores.sum(axis=1) != 1)]
    if bad:
        diags.append(f"core rows not one-hot for vertices {bad}")
    halos = [{v for v in range(idx.n) if x[idx.halo(v, k)] == 1} for k in range(idx.K)]
    for v, w in idx.pairs:
        for k in range(idx.K):
            r = x[idx.halo(v, k)] - x[idx.core(w, k)] - x[idx.aux(v, w, k)]
            if r != 0:
                diags.append(f"halo consistency violated at v={v}, w={w}, part={k}")
    partition = None if bad else Partition(tuple(int(a) for a in cores.argmax(axis=1)), idx.K)
    return ChDecoding(partition, halos, not diags, diags)
