"""Minimizers for QUBO / Ising models.

All solvers accept either model type and return assignments in the model's
own domain ({0,1} for QUBO, {-1,+1} for Ising). Every run is a deterministic
function of its inputs and ``seed``.
"""

from __future__ import annotations

import math
import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .model import IsingModel, QuboModel, as_qubo


# ---------------------------------------------------------------------------
# schedules and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnealSchedule:
    """Temperature schedule over ``t_max`` steps.

    ``kind="logarithmic"``: T(t) = T0 / ln(2 + t) for t = 1..t_max.
    ``kind="geometric"``:   T(1) = T0, T(t+1) = alpha * T(t).
    ``t0=None`` means "use the model's largest absolute weight".
    """

    t_max: int
    kind: str = "geometric"
    t0: float | None = None
    alpha: float = 0.999

    def __post_init__(self):
        if self.t_max < 0:
            raise ValueError("t_max must be >= 0")
        if self.kind not in ("logarithmic", "geometric"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "geometric" and not 0.0 < self.alpha < 1.0:
            raise ValueError("geometric schedule needs 0 < alpha < 1")
        if self.t0 is not None and self.t0 <= 0:
            raise ValueError("initial temperature must be positive")

    def temperatures(self, t0: float | None = None) -> Iterator[float]:
        start = self.t0 if self.t0 is not None else t0
        if start is None or start <= 0:
            start = 1.0
        if self.kind == "logarithmic":
            for t in range(1, self.t_max + 1):
                yield start / math.log(2 + t)
        else:
            temp = start
            for _ in range(self.t_max):
                # floor keeps T strictly positive for very long schedules
                yield max(temp, 1e-300)
                temp *= self.alpha


@dataclass
class Sample:
    assignment: np.ndarray
    energy: float
    feasible: bool | None = None
    broken_chains: int | None = None


@dataclass
class SampleSet:
    records: list[Sample]
    stats: dict = field(default_factory=dict)

    @property
    def best_index(self) -> int:
        if not self.records:
            raise ValueError("empty sample set")
        return min(range(len(self.records)), key=lambda k: self.records[k].energy)

    @property
    def best(self) -> Sample:
        return self.records[self.best_index]

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _rng(seed) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    if isinstance(seed, np.random.Generator):
        return random.Random(int(seed.integers(2**63)))
    return random.Random(seed)


class _FlipState:
    """Local fields for O(degree) single-variable flip deltas.

    ``field[i] = linear[i] + sum_j W_ij x_j``; flipping i changes the energy
    by ``(other(x_i) - x_i) * field[i]``.
    """

    def __init__(self, model, x):
        self.lo, self.hi = model.domain
        self.nbrs = model.adjacency()
        self.x = [int(v) for v in x]
        self.field = model.linear.tolist()
        for (i, j), w in model.quadratic.items():
            self.field[i] += w * self.x[j]
            self.field[j] += w * self.x[i]

    def delta(self, i: int) -> float:
        xi = self.x[i]
        return (self.lo + self.hi - 2 * xi) * self.field[i]

    def flip(self, i: int) -> None:
        xi = self.x[i]
        d = self.lo + self.hi - 2 * xi
        self.x[i] = xi + d
        f = self.field
        for j, w in self.nbrs[i]:
            f[j] += w * d


def _random_assignment(model, rng: random.Random) -> list[int]:
    lo, hi = model.domain
    return [hi if rng.random() < 0.5 else lo for _ in range(model.n)]


def _sample(model, x) -> Sample:
    arr = np.asarray(x, dtype=np.int64)
    return Sample(arr, model.energy(arr))


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

def brute_force(model, *, all_optima: bool = False, max_vars: int = 30,
                tol: float = 1e-9, max_optima: int = 100_000) -> SampleSet:
    """Exact minimum by enumerating all 2^n assignments.

    States are enumerated in counting order with variable 0 as the least
    significant bit, so among tied optima the one reported first is the
    smallest when read as a binary number x_{n-1}...x_0 (for the MIS QUBO
    of K3 that is (1, 0, 0)). ``stats["optima_count"]`` counts every assignment within ``tol`` of
    the minimum; ``all_optima=True`` returns them all as records.
    """
    n = model.n
    if n > max_vars:
        raise ValueError(f"brute_force limited to {max_vars} variables, model has {n}")
    q = as_qubo(model)
    lo, _ = model.domain
    to_domain = (lambda b: b) if lo == 0 else (lambda b: 2 * b - 1)

    if n == 0:
        s = Sample(np.zeros(0, dtype=np.int64), float(q.offset))
        return SampleSet([s], {"optima_count": 1, "states": 1})

    W = np.zeros((n, n))
    for (i, j), w in q.quadratic.items():
        W[i, j] += w
    # reverse so the MSB-first block enumeration below runs x_0 fastest
    W = W[::-1, ::-1]
    lin = q.linear[::-1]
    k = min(n, 16)
    h = n - k
    low = ((np.arange(2 ** k)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(float)
    w_ll = W[h:, h:]
    e_low = low @ lin[h:] + np.einsum("si,ij,sj->s", low, w_ll, low)
    w_hl = W[:h, h:] + W[h:, :h].T
    w_hh = W[:h, :h]

    best_e = math.inf
    first_state = None
    count = 0
    optima: list[int] = []
    for hi_idx in range(2 ** h):
        xh = np.array([(hi_idx >> (h - 1 - t)) & 1 for t in range(h)], dtype=float)
        e_high = q.offset + (xh @ lin[:h] + xh @ w_hh @ xh if h else 0.0)
        e = e_low + e_high
        if h:
            e = e + low @ (xh @ w_hl)
        m = float(e.min())
        if m < best_e - tol:
            best_e = m
            idx = np.flatnonzero(e <= m + tol)
            first_state = (hi_idx << k) | int(idx[0])
            count = idx.size
            if all_optima:
                optima = [(hi_idx << k) | int(t) for t in idx[:max_optima]]
        elif m <= best_e + tol:
            best_e = min(best_e, m)
            idx = np.flatnonzero(e <= best_e + tol)
            count += idx.size
            if all_optima and len(optima) < max_optima:
                optima.extend((hi_idx << k) | int(t) for t in idx[: max_optima - len(optima)])

    def unpack(state):
        bits = np.array([(state >> t) & 1 for t in range(n)], dtype=np.int64)
        return to_domain(bits)

    states = optima if all_optima else [first_state]
    records = [_sample(model, unpack(s)) for s in states]
    if all_optima:
        # drop boundary cases admitted before the final minimum was known
        records = [r for r in records if r.energy <= best_e + tol]
        count = len(records) if len(optima) < max_optima else count
    return SampleSet(records, {"optima_count": count, "states": 2 ** n, "min_energy": best_e})


# ---------------------------------------------------------------------------
# annealing
# ---------------------------------------------------------------------------

def anneal_swap_ising(m: IsingModel, t_max: int, seed=None, *, t0: float | None = None,
                      callback: Callable[[int, list[int], float], None] | None = None) -> SampleSet:
    """Balance-preserving annealing for bisection-style Ising models.

    Starts from a random state with n/2 spins up; each step flips one +1 and
    one -1 spin together and keeps the pair with probability
    ``min(1, exp(-delta / T(t)))`` where ``T(t) = t0 / ln(2 + t)``.
    Returns the best state seen. ``callback(t, state, energy)`` fires after
    every accepted move.
    """
    if not isinstance(m, IsingModel):
        raise TypeError("anneal_swap_ising needs an IsingModel")
    n = m.n
    if n % 2:
        raise ValueError(f"balanced initialization needs an even variable count, got {n}")
    rng = _rng(seed)
    start = time.perf_counter()
    spins = [1] * (n // 2) + [-1] * (n // 2)
    rng.shuffle(spins)
    st = _FlipState(m, spins)
    wmap: list[dict[int, float]] = [dict(nb) for nb in st.nbrs]
    pos = [i for i in range(n) if st.x[i] == 1]
    neg = [i for i in range(n) if st.x[i] == -1]
    where = {}
    for k, i in enumerate(pos):
        where[i] = k
    for k, i in enumerate(neg):
        where[i] = k
    temp0 = t0 if t0 is not None else (m.max_abs_weight() or 1.0)

    energy = m.energy(st.x)
    best_e, best_x = energy, list(st.x)
    accepted = 0
    for t in range(1, t_max + 1 if n else 1):
        a = pos[int(rng.random() * len(pos))]
        b = neg[int(rng.random() * len(neg))]
        # exact pair delta: d_a*f_a + d_b*f_b + W_ab*d_a*d_b with d_a*d_b = -4
        delta = -2 * st.x[a] * st.field[a] - 2 * st.x[b] * st.field[b] - 4 * wmap[a].get(b, 0.0)
        if delta <= 0 or rng.random() < math.exp(-delta / (temp0 / math.log(2 + t))):
            st.flip(a)
            st.flip(b)
            ka, kb = where[a], where[b]
            pos[ka], neg[kb] = b, a
            where[a], where[b] = kb, ka
            energy += delta
            accepted += 1
            if callback is not None:
                callback(t, st.x, energy)
            if energy < best_e - 1e-12:
                best_e, best_x = energy, list(st.x)
    rec = _sample(m, best_x)
    stats = {"steps": t_max, "accepted": accepted, "seed": seed,
             "elapsed": time.perf_counter() - start}
    return SampleSet([rec], stats)


def anneal_flip(model, schedule: AnnealSchedule, seed=None, *, reads: int = 1,
                x0=None, record_trace: bool = False) -> SampleSet:
    """Metropolis single-flip annealing; one record (best seen) per read."""
    rng = _rng(seed)
    start = time.perf_counter()
    n = model.n
    temp0 = model.max_abs_weight() or 1.0
    records, traces = [], []
    for _ in range(reads):
        init = list(x0) if x0 is not None else _random_assignment(model, rng)
        st = _FlipState(model, init)
        energy = model.energy(st.x) if n else model.offset
        best_e, best_x = energy, list(st.x)
        trace = [] if record_trace else None
        if n:
            for temp in schedule.temperatures(temp0):
                i = int(rng.random() * n)
                delta = st.delta(i)
                if delta <= 0 or rng.random() < math.exp(-delta / temp):
                    st.flip(i)
                    energy += delta
                    if energy < best_e - 1e-12:
                        best_e, best_x = energy, list(st.x)
                if trace is not None:
                    trace.append(best_e)
        records.append(_sample(model, best_x))
        traces.append(trace)
    stats = {"steps": schedule.t_max * reads, "reads": reads, "seed": seed,
             "elapsed": time.perf_counter() - start}
    if record_trace:
        stats["traces"] = traces
    return SampleSet(records, stats)


# ---------------------------------------------------------------------------
# descent and tabu
# ---------------------------------------------------------------------------

def local_search(model, x0) -> np.ndarray:
    """Best-improvement single-flip descent to a 1-flip local minimum.

    Ties between equally good flips go to the lowest index.
    """
    x = model.validate(x0).copy()
    if model.n == 0:
        return x
    lo, hi = model.domain
    W = model.dense() * 2  # symmetric, W[i, j] = coupler weight
    field = model.linear + W @ x
    while True:
        deltas = (lo + hi - 2 * x) * field
        i = int(np.argmin(deltas))
        if deltas[i] >= -1e-12:
            return x
        d = lo + hi - 2 * x[i]
        x[i] += d
        field += W[:, i] * d


def tabu_search(model, x0, seed=None, *, iterations: int | None = None,
                tenure: int | None = None) -> np.ndarray:
    """Single-flip tabu search; returns the best assignment visited.

    Each iteration flips the non-tabu variable with the lowest delta; a tabu
    variable is still allowed when the flip reaches a new best (aspiration).
    """
    x = model.validate(x0).copy()
    n = model.n
    if n == 0:
        return x
    rng = _rng(seed)
    lo, hi = model.domain
    iterations = iterations if iterations is not None else 20 * n
    tenure = tenure if tenure is not None else max(1, min(20, n // 4))
    W = model.dense() * 2
    field = model.linear + W @ x
    energy = model.energy(x)
    best_e, best_x = energy, x.copy()
    tabu_until = np.zeros(n, dtype=np.int64)
    noise = np.array([rng.random() for _ in range(n)]) * 1e-9
    for it in range(1, iterations + 1):
        deltas = (lo + hi - 2 * x) * field
        allowed = (tabu_until < it) | (energy + deltas < best_e - 1e-12)
        if not allowed.any():
            allowed[:] = True
        i = int(np.argmin(np.where(allowed, deltas + noise, np.inf)))
        d = lo + hi - 2 * x[i]
        energy += deltas[i]
        x[i] += d
        field += W[:, i] * d
        tabu_until[i] = it + tenure
        if energy < best_e - 1e-12:
            best_e, best_x = energy, x.copy()
    return best_x


def _clamp(model, x: np.ndarray, selected: np.ndarray):
    """Sub-model over ``selected`` with every other variable fixed at ``x``."""
    index = {int(v): k for k, v in enumerate(selected)}
    sub = type(model)(len(selected))
    sub.linear[:] = model.linear[selected]
    offset = model.offset
    for i in range(model.n):
        if i not in index:
            offset += model.linear[i] * x[i]
    for (i, j), w in model.quadratic.items():
        ki, kj = index.get(i), index.get(j)
        if ki is not None and kj is not None:
            sub.add_quadratic(ki, kj, w)
        elif ki is not None:
            sub.linear[ki] += w * x[j]
        elif kj is not None:
            sub.linear[kj] += w * x[i]
        else:
            offset += w * x[i] * x[j]
    sub.offset = offset
    sub._cache = None
    return sub


def _default_subsolver(rng: random.Random, restarts: int = 5) -> Callable:
    """Exact for tiny sub-models, otherwise best of a few tabu searches from random starts."""
    def solve(sub):
        if sub.n <= 16:
            return brute_force(sub)
        best = None
        for _ in range(restarts):
            x = tabu_search(sub, _random_assignment(sub, rng), rng)
            e = sub.energy(x)
            if best is None or e < best.energy:
                best = Sample(x, e)
        return SampleSet([best], {"restarts": restarts})
    return solve


def tabu_decompose(q, subproblem_size: int = 47, attempts: int = 50, target: float | None = None,
                   timeout: float | None = None, seed=None, subsolver: Callable | None = None,
                   tabu_size: int = 8) -> SampleSet:
    """Decompose-and-tabu meta-solver.

    Models that fit in ``subproblem_size`` go straight to ``subsolver`` and
    are polished by :func:`local_search`. Larger models alternate between
    (a) solving the sub-model of the ``subproblem_size`` variables with the
    largest single-flip energy change, all others clamped, and (b) a tabu
    search over the full model. Recently used variable sets are kept in a
    FIFO tabu list of length ``tabu_size``.

    Stops when ``target`` is reached, after ``attempts`` rounds, or when
    ``timeout`` seconds have elapsed; ``stats["stop"]`` names the reason.
    """
    if subproblem_size < 1:
        raise ValueError("subproblem_size must be >= 1")
    rng = _rng(seed)
    start = time.perf_counter()
    solve = subsolver if subsolver is not None else _default_subsolver(rng)
    n = q.n

    def reached(e):
        return target is not None and e <= target + 1e-9

    if n <= subproblem_size:
        res = solve(q)
        x = local_search(q, res.best.assignment)
        stats = {"calls": 1, "attempts": 0, "stop": "direct", "seed": seed,
                 "elapsed": time.perf_counter() - start}
        return SampleSet([_sample(q, x)], stats)

    lo, hi = q.domain
    x = tabu_search(q, _random_assignment(q, rng), rng)
    energy = q.energy(x)
    best_e, best_x = energy, x.copy()
    tabu = deque(maxlen=tabu_size)
    calls = 0
    stop = "attempts"
    W = q.dense() * 2
    rounds = 0
    for _ in range(attempts):
        if reached(best_e):
            stop = "target"
            break
        if timeout is not None and time.perf_counter() - start > timeout:
            stop = "timeout"
            break
        rounds += 1
        deltas = (lo + hi - 2 * x) * (q.linear + W @ x)
        jitter = np.array([rng.random() for _ in range(n)])
        order = np.lexsort((jitter, -np.abs(deltas)))
        shift = 0
        chosen = order[:subproblem_size]
        while frozenset(chosen.tolist()) in tabu and shift < n:
            shift += 1
            chosen = np.roll(order, -shift)[:subproblem_size]
        chosen = np.sort(chosen)
        tabu.append(frozenset(chosen.tolist()))
        res = solve(_clamp(q, x, chosen))
        calls += 1
        cand = x.copy()
        cand[chosen] = res.best.assignment
        cand = tabu_search(q, cand, rng)
        cand_e = q.energy(cand)
        if cand_e <= energy + 1e-12:
            x, energy = cand, cand_e
        if cand_e < best_e - 1e-12:
            best_e, best_x = cand_e, cand.copy()
    else:
        if reached(best_e):
            stop = "target"
    stats = {"calls": calls, "attempts": rounds, "stop": stop, "seed": seed,
             "elapsed": time.perf_counter() - start}
    return SampleSet([_sample(q, best_x)], stats)


def is_local_minimum(model, x, tol: float = 1e-12) -> bool:
    x = model.validate(x)
    base = model.energy(x)
    lo, hi = model.domain
    for i in range(model.n):
        y = x.copy()
        y[i] = lo + hi - y[i]
        if model.energy(y) < base - tol:
            return False
    return True


__all__ = [
    "AnnealSchedule", "Sample", "SampleSet", "brute_force", "anneal_swap_ising",
    "anneal_flip", "local_search", "tabu_search", "tabu_decompose", "is_local_minimum",
    "QuboModel", "IsingModel",
]
