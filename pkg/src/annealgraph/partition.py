"""Partition metrics, a multilevel edge-cut partitioner, and SA refinement for core-halo cost."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

from .builders import Partition
from .graph import Graph
from .solvers import AnnealSchedule, _rng


@dataclass(frozen=True)
class ChMetrics:
    cores: tuple[int, ...]
    halos: tuple[int, ...]
    total: int


def edge_cut(g: Graph, p: Partition) -> int:
    a = p.assignment
    if len(a) != g.n:
        raise ValueError("partition does not cover the graph")
    return sum(1 for u, v in g.edges if a[u] != a[v])


def ch_cost(g: Graph, p: Partition) -> ChMetrics:
    """Core sizes, halo sizes (outside vertices adjacent to the part) and sum of (c+h)^2."""
    a = p.assignment
    if len(a) != g.n:
        raise ValueError("partition does not cover the graph")
    cores = p.sizes()
    halo_sets = [set() for _ in range(p.K)]
    for u, v in g.edges:
        if a[u] != a[v]:
            halo_sets[a[u]].add(v)
            halo_sets[a[v]].add(u)
    halos = [len(h) for h in halo_sets]
    total = sum((c + h) ** 2 for c, h in zip(cores, halos))
    return ChMetrics(tuple(cores), tuple(halos), total)


# ---------------------------------------------------------------------------
# enumeration oracles
# ---------------------------------------------------------------------------

def _assignments(n, K):
    """All assignments with vertex 0 in part 0 (part labels are interchangeable)."""
    if n == 0:
        yield ()
        return
    for rest in itertools.product(range(K), repeat=n - 1):
        yield (0,) + rest


def optimal_balanced_cut(g: Graph, K: int) -> tuple[int, list[Partition]]:
    """Minimum edge-cut over partitions with part sizes in {floor(n/K), ceil(n/K)}."""
    lo, hi = g.n // K, -(-g.n // K)
    best, argbest = math.inf, []
    edges = list(g.edges)
    for a in _assignments(g.n, K):
        sizes = [0] * K
        for x in a:
            sizes[x] += 1
        if any(s < lo or s > hi for s in sizes):
            continue
        cut = sum(1 for u, v in edges if a[u] != a[v])
        if cut < best:
            best, argbest = cut, [Partition(a, K)]
        elif cut == best:
            argbest.append(Partition(a, K))
    return int(best), argbest


def optimal_ch_cost(g: Graph, K: int) -> tuple[int, Partition]:
    """Minimum core-halo cost over all K-part assignments (empty parts allowed)."""
    best, arg = math.inf, None
    for a in _assignments(g.n, K):
        p = Partition(a, K)
        c = ch_cost(g, p).total
        if c < best:
            best, arg = c, p
    return int(best), arg


# ---------------------------------------------------------------------------
# multilevel partitioning
# ---------------------------------------------------------------------------

class _Level:
    """Weighted graph at one coarsening level."""

    def __init__(self, vw, adj):
        self.vw = vw          # vertex weights
        self.adj = adj        # list of {neighbor: edge weight}

    @property
    def n(self):
        return len(self.vw)

    @classmethod
    def from_graph(cls, g: Graph):
        return cls([1] * g.n, [{w: 1 for w in g.adj[v]} for v in range(g.n)])


def _coarsen(level: _Level, rng: random.Random):
    """Randomized heavy-edge matching; returns (coarse level, fine->coarse map)."""
    n = level.n
    match = [-1] * n
    order = list(range(n))
    rng.shuffle(order)
    for v in order:
        if match[v] >= 0:
            continue
        cand = [(wt, rng.random(), u) for u, wt in level.adj[v].items() if match[u] < 0]
        if cand:
            _, _, u = max(cand)
            match[v], match[u] = u, v
        else:
            match[v] = v
    cmap = [-1] * n
    nc = 0
    for v in range(n):
        if cmap[v] < 0:
            cmap[v] = cmap[match[v]] = nc
            nc += 1
    vw = [0] * nc
    adj = [dict() for _ in range(nc)]
    for v in range(n):
        cv = cmap[v]
        vw[cv] += level.vw[v]
        for u, wt in level.adj[v].items():
            cu = cmap[u]
            if cu != cv:
                adj[cv][cu] = adj[cv].get(cu, 0) + wt
    return _Level(vw, adj), cmap


class _Refiner:
    """Objective is (balance violation, weighted cut), compared lexicographically."""

    def __init__(self, level: _Level, K: int, lo: int, hi: int, part: list[int]):
        self.level, self.K, self.lo, self.hi = level, K, lo, hi
        self.part = list(part)
        self.sizes = [0] * K
        for v, a in enumerate(self.part):
            self.sizes[a] += level.vw[v]
        self.conn = [[0] * K for _ in range(level.n)]
        for v in range(level.n):
            for u, wt in level.adj[v].items():
                self.conn[v][self.part[u]] += wt
        self.cut = sum(
            wt for v in range(level.n) for u, wt in level.adj[v].items() if u > v and self.part[u] != self.part[v]
        )

    def _viol(self, s):
        return max(0, s - self.hi) + max(0, self.lo - s)

    def violation(self):
        return sum(self._viol(s) for s in self.sizes)

    def objective(self):
        return (self.violation(), self.cut)

    def move_effect(self, v, t):
        a = self.part[v]
        w = self.level.vw[v]
        dviol = (self._viol(self.sizes[a] - w) - self._viol(self.sizes[a])
                 + self._viol(self.sizes[t] + w) - self._viol(self.sizes[t]))
        dcut = self.conn[v][a] - self.conn[v][t]
        return dviol, dcut

    def move(self, v, t):
        a = self.part[v]
        w = self.level.vw[v]
        self.cut += self.conn[v][a] - self.conn[v][t]
        self.sizes[a] -= w
        self.sizes[t] += w
        self.part[v] = t
        for u, wt in self.level.adj[v].items():
            self.conn[u][a] -= wt
            self.conn[u][t] += wt

    def fm_pass(self, rng: random.Random, stall: int = 50) -> bool:
        """One Fiduccia-Mattheyses style pass with rollback to the best prefix.

        The pass ends early after ``stall`` consecutive moves without a new best.
        """
        n, K = self.level.n, self.K
        start = self.objective()
        best, best_len = start, 0
        history = []
        locked = [False] * n
        slack = 2 * max(self.level.vw, default=1)
        adj = self.level.adj
        for _ in range(n):
            if len(history) - best_len >= stall:
                break
            viol = self.violation()
            choice = None
            for v in range(n):
                if locked[v]:
                    continue
                a = self.part[v]
                over = self.sizes[a] > self.hi or viol > 0
                if not over and self.conn[v][a] == sum(adj[v].values()):
                    continue  # interior vertex, no neighbor elsewhere
                targets = range(K) if over else [t for t in range(K) if t != a and self.conn[v][t] > 0]
                for t in targets:
                    if t == a:
                        continue
                    dviol, dcut = self.move_effect(v, t)
                    if dviol > slack:
                        continue
                    key = (viol + dviol, self.cut + dcut, rng.random())
                    if choice is None or key < choice[0]:
                        choice = (key, v, t)
            if choice is None:
                break
            _, v, t = choice
            history.append((v, self.part[v]))
            self.move(v, t)
            locked[v] = True
            obj = self.objective()
            if obj < best:
                best, best_len = obj, len(history)
        for v, a in reversed(history[best_len:]):
            self.move(v, a)
        return best < start

    def refine(self, rng, max_passes=8):
        for _ in range(max_passes):
            if not self.fm_pass(rng):
                break


def _initial_partition(level: _Level, K: int, lo: int, hi: int, rng: random.Random, trials: int = 8):
    n = level.n
    if n <= 12 and K ** max(n - 1, 0) <= 20000:
        best = None
        for a in _assignments(n, K):
            r = _Refiner(level, K, lo, hi, list(a))
            key = r.objective()
            if best is None or key < best[0]:
                best = (key, list(a))
        return best[1]
    total = sum(level.vw)
    best = None
    for _ in range(trials):
        part = [K - 1] * n
        free = set(range(n))
        filled = 0
        for k in range(K - 1):
            goal = round(total * (k + 1) / K) - filled
            if not free:
                break
            seed_v = rng.choice(sorted(free))
            region_w = 0
            gain = {}
            frontier = {seed_v}
            while region_w < goal and free:
                if not frontier:
                    frontier = {rng.choice(sorted(free))}
                v = max(frontier, key=lambda u: (gain.get(u, 0), rng.random()))
                frontier.discard(v)
                free.discard(v)
                part[v] = k
                region_w += level.vw[v]
                for u, wt in level.adj[v].items():
                    if u in free:
                        gain[u] = gain.get(u, 0) + wt
                        frontier.add(u)
            filled += region_w
        r = _Refiner(level, K, lo, hi, part)
        r.refine(rng)
        key = r.objective()
        if best is None or key < best[0]:
            best = (key, list(r.part))
    return best[1]


def multilevel_partition(g: Graph, K: int = 2, seed=None, *, coarsen_to: int | None = None) -> Partition:
    """Three-phase multilevel partition: coarsen, partition the coarsest graph, refine while projecting back.

    Coarsening stops at ``coarsen_to`` vertices (default ``max(100, 4K)``).
    The coarsest graph is solved by enumeration when it has at most 12
    vertices, otherwise by greedy region growing. Returned part sizes lie
    in ``{floor(n/K), ceil(n/K)}``.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    if g.n < K:
        raise ValueError(f"cannot split {g.n} vertices into {K} parts")
    rng = _rng(seed)
    lo, hi = g.n // K, -(-g.n // K)
    limit = coarsen_to if coarsen_to is not None else max(100, 4 * K)

    levels = [_Level.from_graph(g)]
    maps = []
    while levels[-1].n > limit:
        coarse, cmap = _coarsen(levels[-1], rng)
        if coarse.n > 0.95 * levels[-1].n:
            break
        levels.append(coarse)
        maps.append(cmap)

    part = _initial_partition(levels[-1], K, lo, hi, rng)
    for depth in range(len(levels) - 1, -1, -1):
        if depth < len(levels) - 1:
            cmap = maps[depth]
            part = [part[cmap[v]] for v in range(levels[depth].n)]
        r = _Refiner(levels[depth], K, lo, hi, part)
        r.refine(rng)
        part = r.part

    r = _Refiner(levels[0], K, lo, hi, part)
    while r.violation() > 0:
        # unit weights at the finest level, so single moves always restore balance
        best = None
        for v in range(g.n):
            a = r.part[v]
            if r.sizes[a] <= lo:
                continue
            for t in range(K):
                if t != a and r.sizes[t] < hi:
                    dviol, dcut = r.move_effect(v, t)
                    key = (dviol, dcut, rng.random())
                    if best is None or key < best[0]:
                        best = (key, v, t)
        r.move(best[1], best[2])
    return Partition(tuple(r.part), K)


# ---------------------------------------------------------------------------
# core-halo refinement
# ---------------------------------------------------------------------------

def refine_ch_sa(g: Graph, p0: Partition, schedule: AnnealSchedule | None = None, seed=None,
                 *, trace: list | None = None, allow_empty: bool = True) -> Partition:
    """Simulated annealing on core-halo cost, starting from ``p0``.

    A move reassigns one endpoint of a cut edge to the part of the other
    endpoint. Balance is not constrained, and parts may empty out unless
    ``allow_empty=False`` (then a move never takes a part's last vertex;
    parts empty in ``p0`` may stay empty). Returns the
    best partition seen, so the cost never exceeds that of ``p0``. If
    ``trace`` is a list, the best-so-far cost is appended after every step.
    """
    if p0.n != g.n:
        raise ValueError("partition does not cover the graph")
    rng = _rng(seed)
    n, K = g.n, p0.K
    if schedule is None:
        schedule = AnnealSchedule(t_max=200 * max(n, 1), kind="geometric", alpha=1 - 6.0 / (200 * max(n, 1)))
    part = list(p0.assignment)
    closed = [sorted(g.adj[v] | {v}) for v in range(n)]
    cnt = [[0] * K for _ in range(n)]
    for v in range(n):
        for w in closed[v]:
            cnt[v][part[w]] += 1
    s = [sum(1 for v in range(n) if cnt[v][k] > 0) for k in range(K)]
    core = [0] * K
    for a in part:
        core[a] += 1
    cost = sum(x * x for x in s)
    best_cost, best_part = cost, list(part)
    edges = sorted(g.edges)

    def pick_move():
        for _ in range(32):
            u, w = edges[int(rng.random() * len(edges))]
            if part[u] != part[w]:
                return (u, part[w]) if rng.random() < 0.5 else (w, part[u])
        cut = [(u, w) for u, w in edges if part[u] != part[w]]
        if not cut:
            return None
        u, w = cut[int(rng.random() * len(cut))]
        return (u, part[w]) if rng.random() < 0.5 else (w, part[u])

    for temp in schedule.temperatures(float(max(n, 1))):
        mv = pick_move() if edges else None
        if mv is None:
            break
        u, b = mv
        a = part[u]
        if not allow_empty and core[a] == 1:
            if trace is not None:
                trace.append(best_cost)
            continue
        drop = sum(1 for w in closed[u] if cnt[w][a] == 1)
        gain = sum(1 for w in closed[u] if cnt[w][b] == 0)
        delta = ((s[a] - drop) ** 2 - s[a] ** 2) + ((s[b] + gain) ** 2 - s[b] ** 2)
        if delta <= 0 or rng.random() < math.exp(-delta / temp):
            for w in closed[u]:
                cnt[w][a] -= 1
                cnt[w][b] += 1
            s[a] -= drop
            s[b] += gain
            core[a] -= 1
            core[b] += 1
            part[u] = b
            cost += delta
            if cost < best_cost:
                best_cost, best_part = cost, list(part)
        if trace is not None:
            trace.append(best_cost)
    return Partition(tuple(best_part), K)


def random_partition(n: int, K: int, seed=None) -> Partition:
    rng = _rng(seed)
    return Partition(tuple(int(rng.random() * K) for _ in range(n)), K)
