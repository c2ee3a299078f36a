"""Chimera topology, minors by edge contraction, clique embeddings, and chain handling.

Physical qubit labels follow ``((row * N + col) * 2 + side) * L + k``.
Side 0 qubits couple vertically (same column, adjacent rows), side 1
qubits couple horizontally (same row, adjacent columns); inside a cell
every side-0 qubit couples to every side-1 qubit.

Graphs produced here are compacted to the operational qubits:
vertex ``i`` of ``chimera_graph(spec)`` is ``spec.active_qubits()[i]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import Graph, contract_edge, is_connected
from .model import IsingModel
from .solvers import Sample, SampleSet, _rng


@dataclass(frozen=True)
class ChimeraSpec:
    M: int = 12
    N: int = 12
    L: int = 4
    missing: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if min(self.M, self.N, self.L) < 1:
            raise ValueError("M, N, L must all be >= 1")
        object.__setattr__(self, "missing", frozenset(int(q) for q in self.missing))

    @property
    def num_qubits(self) -> int:
        return 2 * self.L * self.M * self.N

    def label(self, row: int, col: int, side: int, k: int) -> int:
        return ((row * self.N + col) * 2 + side) * self.L + k

    def coords(self, q: int) -> tuple[int, int, int, int]:
        k = q % self.L
        q //= self.L
        side = q % 2
        q //= 2
        return q // self.N, q % self.N, side, k

    def active_qubits(self) -> list[int]:
        return [q for q in range(self.num_qubits) if q not in self.missing]

    def full_edges(self) -> list[tuple[int, int]]:
        M, N, L = self.M, self.N, self.L
        out = []
        for r in range(M):
            for c in range(N):
                for a in range(L):
                    for b in range(L):
                        out.append((self.label(r, c, 0, a), self.label(r, c, 1, b)))
                for k in range(L):
                    if r + 1 < M:
                        out.append((self.label(r, c, 0, k), self.label(r + 1, c, 0, k)))
                    if c + 1 < N:
                        out.append((self.label(r, c, 1, k), self.label(r, c + 1, 1, k)))
        return out

    def is_intra_cell(self, q1: int, q2: int) -> bool:
        r1, c1, s1, _ = self.coords(q1)
        r2, c2, s2, _ = self.coords(q2)
        return (r1, c1) == (r2, c2) and s1 != s2


def chimera_graph(spec: ChimeraSpec) -> Graph:
    labels = spec.active_qubits()
    index = {q: i for i, q in enumerate(labels)}
    edges = [(index[a], index[b]) for a, b in spec.full_edges() if a in index and b in index]
    return Graph(len(labels), edges)


def degrade(spec: ChimeraSpec, remove_count: int, seed=None) -> ChimeraSpec:
    """Mark ``remove_count`` uniformly chosen operational qubits as missing."""
    active = spec.active_qubits()
    if not 0 <= remove_count <= len(active):
        raise ValueError(f"cannot remove {remove_count} of {len(active)} qubits")
    rng = np.random.default_rng(seed)
    gone = rng.choice(len(active), size=remove_count, replace=False)
    return ChimeraSpec(spec.M, spec.N, spec.L, spec.missing | {active[i] for i in gone})


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------

@dataclass
class Embedding:
    """Logical variable -> chain of physical vertices."""

    chains: dict[int, tuple[int, ...]]

    def __post_init__(self):
        self.chains = {int(k): tuple(sorted(int(q) for q in c)) for k, c in self.chains.items()}

    def __len__(self):
        return len(self.chains)

    def physical_vertices(self) -> set[int]:
        return {q for c in self.chains.values() for q in c}

    def owner(self) -> dict[int, int]:
        return {q: k for k, c in self.chains.items() for q in c}

    def max_chain_length(self) -> int:
        return max((len(c) for c in self.chains.values()), default=0)

    def to_text(self) -> str:
        return "".join(f"{k}: {' '.join(map(str, c))}\n" for k, c in sorted(self.chains.items()))

    @classmethod
    def from_text(cls, text: str) -> Embedding:
        chains = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            head, sep, tail = line.partition(":")
            if not sep:
                raise ValueError(f"line {lineno}: expected 'k: v1 v2 ...'")
            try:
                chains[int(head)] = tuple(int(t) for t in tail.split())
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls(chains)

    def relabel(self, mapping) -> Embedding:
        return Embedding({k: tuple(mapping[q] for q in c) for k, c in self.chains.items()})


@dataclass
class EmbeddingCheck:
    ok: bool
    message: str = ""

    def __bool__(self):
        return self.ok


def verify_embedding(e: Embedding, physical: Graph, logical: Graph) -> EmbeddingCheck:
    """Chains nonempty, in range, disjoint and connected; every logical edge realized."""
    seen: dict[int, int] = {}
    for k in range(logical.n):
        if k not in e.chains or not e.chains[k]:
            return EmbeddingCheck(False, f"logical vertex {k} has no chain")
    for k, chain in sorted(e.chains.items()):
        for q in chain:
            if not 0 <= q < physical.n:
                return EmbeddingCheck(False, f"chain {k} uses unknown physical vertex {q}")
            if q in seen:
                return EmbeddingCheck(False, f"chains {seen[q]} and {k} overlap at physical vertex {q}")
            seen[q] = k
        if not is_connected(physical, chain):
            return EmbeddingCheck(False, f"chain {k} is not connected")
    for u, v in logical.sorted_edges():
        cv = set(e.chains[v])
        if not any(w in cv for q in e.chains[u] for w in physical.adj[q]):
            return EmbeddingCheck(False, f"logical edge ({u}, {v}) has no physical coupler")
    return EmbeddingCheck(True, "ok")


def contract_random_edges(spec: ChimeraSpec, m: int, seed=None) -> tuple[Graph, Embedding]:
    """Minor C_m of the chimera graph after ``m`` uniformly random edge contractions.

    Chains of the returned embedding are the groups of chimera vertices
    merged into each minor vertex.
    """
    g = chimera_graph(spec)
    if not 0 <= m < max(g.n, 1):
        raise ValueError(f"m must satisfy 0 <= m < {g.n}")
    rng = np.random.default_rng(seed)
    groups = [[v] for v in range(g.n)]
    for step in range(m):
        edges = g.sorted_edges()
        if not edges:
            raise ValueError(f"no edge left to contract at step {step}")
        u, v = edges[int(rng.integers(len(edges)))]
        g, merge = contract_edge(g, u, v)
        merged = [[] for _ in range(g.n)]
        for old, grp in enumerate(groups):
            merged[merge[old]].extend(grp)
        groups = merged
    return g, Embedding({i: grp for i, grp in enumerate(groups)})


def _clique_chains(M: int, L: int) -> list[list[tuple[int, int, int, int]]]:
    """Chains of K_{LM+1} on a defect-free C(M, M, L), in (row, col, side, k) coordinates.

    Chain (i, k): side-0 qubits k of column i in rows 0..i, plus side-1
    qubits k of row i in columns i..M-1 (length M+1). Chains i < j meet in
    cell (i, j); chains with equal i meet in cell (i, i). The extra chain
    lives below the diagonal and touches every L-shaped chain at one end.
    """
    chains = []
    for i in range(M):
        for k in range(L):
            chain = [(r, i, 0, k) for r in range(i + 1)]
            chain += [(i, c, 1, k) for c in range(i, M)]
            chains.append(chain)
    if M == 1:
        # K_{L,L} holds K_{L+1}: split the last chain into its two qubits
        last = chains.pop()
        chains.extend([[last[0]], [last[1]]])
        return chains
    extra = []
    for i in range(M - 1):
        cell = (i + 1, i)
        extra += [(*cell, 0, k) for k in range(L)]
        if i == M - 2:
            extra += [(*cell, 1, k) for k in range(L)]
        else:
            extra.append((*cell, 1, 0))
            # connector through cell (i+2, i) into the next subdiagonal cell
            extra += [(i + 2, i, 0, 0), (i + 2, i, 1, 0)]
    chains.append(extra)
    return chains


def _grid_symmetries(M: int):
    """The 8 automorphisms of a square chimera grid acting on (row, col, side, k)."""
    def make(transpose, flip_r, flip_c):
        def f(r, c, s, k):
            if flip_r:
                r = M - 1 - r
            if flip_c:
                c = M - 1 - c
            if transpose:
                r, c, s = c, r, 1 - s
            return r, c, s, k
        return f
    return [make(t, a, b) for t in (False, True) for a in (False, True) for b in (False, True)]


def clique_embedding(spec: ChimeraSpec) -> Embedding:
    """Embedding of the largest complete graph this construction fits on ``spec``.

    On a defect-free square grid this is K_{LM+1}. With missing qubits,
    chains touching a missing qubit are dropped; the best of the 8 grid
    symmetries is kept. Chains are given in ``chimera_graph(spec)`` indices.
    """
    if spec.M != spec.N:
        raise ValueError("clique embedding needs a square cell grid")
    index = {q: i for i, q in enumerate(spec.active_qubits())}
    base = _clique_chains(spec.M, spec.L)
    best = None
    for sym in _grid_symmetries(spec.M):
        kept = []
        for chain in base:
            labels = [spec.label(*sym(*xyz)) for xyz in chain]
            if all(q in index for q in labels):
                kept.append([index[q] for q in labels])
        if best is None or len(kept) > len(best):
            best = kept
    if len(best) < 2:
        raise ValueError("too many defects: fewer than 2 intact chains")
    return Embedding({i: c for i, c in enumerate(best)})


# ---------------------------------------------------------------------------
# logical <-> physical models
# ---------------------------------------------------------------------------

def embed_model(m: IsingModel, e: Embedding, chain_strength: float, physical: Graph) -> IsingModel:
    """Spread a logical Ising model over its chains.

    Linear weights split equally over chain members, each coupler equally
    over the physical edges joining its two chains, and every edge inside a
    chain gets ``-chain_strength``. The offset grows by ``chain_strength``
    per chain edge, so unbroken samples keep their logical energy.
    """
    if chain_strength < 0:
        raise ValueError("chain_strength is a magnitude and must be >= 0")
    logical = Graph(m.n, m.coupler_graph_edges())
    check = verify_embedding(e, physical, logical)
    if not check:
        raise ValueError(f"invalid embedding: {check.message}")
    out = IsingModel(physical.n, offset=m.offset)
    for i in range(m.n):
        chain = e.chains[i]
        for q in chain:
            out.add_linear(q, m.linear[i] / len(chain))
    for (i, j), w in m.quadratic.items():
        if w == 0.0:
            continue
        cj = set(e.chains[j])
        links = [(q, r) for q in e.chains[i] for r in physical.adj[q] if r in cj]
        for q, r in links:
            out.add_quadratic(q, r, w / len(links))
    chain_edges = 0
    for chain in e.chains.values():
        members = set(chain)
        for q in chain:
            for r in physical.adj[q]:
                if r in members and q < r:
                    out.add_quadratic(q, r, -chain_strength)
                    chain_edges += 1
    out.add_offset(chain_strength * chain_edges)
    return out


UNEMBED_STRATEGIES = ("majority_vote", "minimize_energy", "discard_broken")


def _resolve(field_from_fixed, i):
    return -1 if field_from_fixed > 0 else 1


def unembed_sample(s, e: Embedding, strategy: str, logical: IsingModel) -> tuple[np.ndarray | None, int]:
    """Logical spins for one physical sample and its number of broken chains.

    Returns ``(None, broken)`` when ``discard_broken`` rejects the sample.
    Undecided chains (majority ties, or every broken chain under
    ``minimize_energy``) are fixed one at a time, largest chain first, to
    the spin with lower logical energy given the chains already fixed;
    an exact energy tie resolves to +1.
    """
    if strategy not in UNEMBED_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    s = np.asarray(s)
    n = logical.n
    out = np.zeros(n, dtype=np.int64)
    broken = 0
    undecided = []
    for i in range(n):
        vals = s[list(e.chains[i])]
        total = int(vals.sum())
        if abs(total) == len(vals):
            out[i] = vals[0]
            continue
        broken += 1
        if strategy == "discard_broken":
            continue
        if strategy == "majority_vote" and total != 0:
            out[i] = 1 if total > 0 else -1
        else:
            undecided.append(i)
    if strategy == "discard_broken" and broken:
        return None, broken
    if undecided:
        nbrs = logical.adjacency()
        undecided.sort(key=lambda i: (-len(e.chains[i]), i))
        for i in undecided:
            f = logical.linear[i] + sum(w * out[j] for j, w in nbrs[i])  # unfixed chains are 0
            out[i] = -1 if f > 0 else 1
    return out, broken


def unembed(samples: SampleSet, e: Embedding, strategy: str, logical: IsingModel) -> SampleSet:
    records = []
    dropped = 0
    for rec in samples.records:
        spins, broken = unembed_sample(rec.assignment, e, strategy, logical)
        if spins is None:
            dropped += 1
            continue
        records.append(Sample(spins, logical.energy(spins), broken_chains=broken))
    stats = dict(samples.stats)
    stats.update(strategy=strategy, discarded=dropped,
                 broken_chains=[r.broken_chains for r in records])
    return SampleSet(records, stats)


def broken_chain_count(s, e: Embedding) -> int:
    s = np.asarray(s)
    return sum(1 for c in e.chains.values() if len(set(s[list(c)].tolist())) > 1)


def physical_to_logical_graph(e: Embedding, physical: Graph) -> Graph:
    """Logical graph whose edges are exactly the chain pairs joined by a physical coupler."""
    owner = e.owner()
    edges = set()
    for a, b in physical.edges:
        ka, kb = owner.get(a), owner.get(b)
        if ka is not None and kb is not None and ka != kb:
            edges.add((min(ka, kb), max(ka, kb)))
    return Graph(len(e.chains), edges)


def free_couplers(e: Embedding, physical: Graph, u: int, v: int) -> list[tuple[int, int]]:
    """Physical edges between chains u and v (empty when the pair is not realized)."""
    cv = set(e.chains[v])
    return [(q, r) for q in e.chains[u] for r in physical.adj[q] if r in cv]
