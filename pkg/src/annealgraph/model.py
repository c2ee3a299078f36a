"""QUBO and Ising models with a tracked constant offset, and exact conversion between them."""

from __future__ import annotations

from typing import Mapping

import numpy as np


class _QuadraticModel:
    """Shared storage: dense linear vector, sparse upper-triangle couplers, offset.

    Coupler keys are normalized to ``(i, j)`` with ``i < j``; repeated
    insertions accumulate.
    """

    domain: tuple[int, int] = (0, 1)

    def __init__(self, n: int, linear=None, quadratic: Mapping | None = None, offset: float = 0.0):
        if n < 0:
            raise ValueError("variable count must be non-negative")
        self.n = int(n)
        self.linear = np.zeros(self.n, dtype=float)
        self.quadratic: dict[tuple[int, int], float] = {}
        self.offset = float(offset)
        self._cache = None
        if linear is not None:
            items = linear.items() if isinstance(linear, Mapping) else enumerate(linear)
            for i, w in items:
                self.add_linear(i, w)
        if quadratic:
            for (i, j), w in quadratic.items():
                self.add_quadratic(i, j, w)

    # -- building ---------------------------------------------------------
    def _check_index(self, i):
        if not 0 <= i < self.n:
            raise IndexError(f"variable {i} out of range for n={self.n}")

    def add_linear(self, i: int, w: float) -> None:
        i = int(i)
        self._check_index(i)
        self.linear[i] += w
        self._cache = None

    def add_quadratic(self, i: int, j: int, w: float) -> None:
        i, j = int(i), int(j)
        self._check_index(i)
        self._check_index(j)
        if i == j:
            self._add_diagonal(i, w)
            return
        if i > j:
            i, j = j, i
        self.quadratic[(i, j)] = self.quadratic.get((i, j), 0.0) + float(w)
        self._cache = None

    def add_offset(self, w: float) -> None:
        self.offset += float(w)

    def _add_diagonal(self, i, w):
        raise NotImplementedError

    def copy(self):
        return type(self)(self.n, self.linear.copy(), dict(self.quadratic), self.offset)

    # -- evaluation -------------------------------------------------------
    def _arrays(self):
        if self._cache is None:
            if self.quadratic:
                keys = np.array(list(self.quadratic.keys()), dtype=np.int64)
                vals = np.array(list(self.quadratic.values()), dtype=float)
            else:
                keys = np.zeros((0, 2), dtype=np.int64)
                vals = np.zeros(0, dtype=float)
            self._cache = (keys[:, 0], keys[:, 1], vals)
        return self._cache

    def validate(self, x) -> np.ndarray:
        arr = np.asarray(x)
        if arr.ndim != 1 or arr.shape[0] != self.n:
            raise ValueError(f"assignment must have length {self.n}, got shape {arr.shape}")
        lo, hi = self.domain
        if not np.all((arr == lo) | (arr == hi)):
            raise ValueError(f"assignment entries must lie in {{{lo}, {hi}}}")
        return arr.astype(np.int64)

    def energy(self, x) -> float:
        arr = self.validate(x)
        return float(self.energies(arr[None, :])[0])

    def energies(self, xs) -> np.ndarray:
        """Energies of a batch of assignments (rows); no domain check."""
        xs = np.asarray(xs, dtype=float)
        ii, jj, vals = self._arrays()
        e = xs @ self.linear + self.offset
        if vals.size:
            e = e + (xs[:, ii] * xs[:, jj]) @ vals
        return e

    def adjacency(self) -> list[list[tuple[int, float]]]:
        """Per-variable list of ``(neighbor, weight)`` over nonzero couplers."""
        nbrs: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for (i, j), w in self.quadratic.items():
            if w != 0.0:
                nbrs[i].append((j, w))
                nbrs[j].append((i, w))
        return nbrs

    def dense(self) -> np.ndarray:
        """Symmetric coupling matrix with zero diagonal (each coupler split over both halves)."""
        mat = np.zeros((self.n, self.n))
        for (i, j), w in self.quadratic.items():
            mat[i, j] += w / 2
            mat[j, i] += w / 2
        return mat

    def max_abs_weight(self) -> float:
        vals = [abs(w) for w in self.quadratic.values()]
        vals.extend(np.abs(self.linear).tolist())
        return max(vals, default=0.0)

    def coupler_graph_edges(self) -> list[tuple[int, int]]:
        return sorted(k for k, w in self.quadratic.items() if w != 0.0)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        nz = lambda d: {k: v for k, v in d.items() if v != 0.0}
        return (
            self.n == other.n
            and np.array_equal(self.linear, other.linear)
            and nz(self.quadratic) == nz(other.quadratic)
            and self.offset == other.offset
        )

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, couplers={len(self.quadratic)}, offset={self.offset:g})"


class QuboModel(_QuadraticModel):
    """Binary model: ``sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j + offset`` over x in {0,1}."""

    domain = (0, 1)

    def _add_diagonal(self, i, w):
        # x_i * x_i == x_i
        self.linear[i] += w
        self._cache = None


class IsingModel(_QuadraticModel):
    """Spin model: ``sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + offset`` over s in {-1,+1}."""

    domain = (-1, 1)

    @property
    def h(self) -> np.ndarray:
        return self.linear

    @property
    def J(self) -> dict[tuple[int, int], float]:
        return self.quadratic

    def _add_diagonal(self, i, w):
        # s_i * s_i == 1
        self.offset += float(w)


def qubo_energy(q: QuboModel, x) -> float:
    return q.energy(x)


def ising_energy(m: IsingModel, s) -> float:
    return m.energy(s)


def binary_to_spin(x) -> np.ndarray:
    return 2 * np.asarray(x, dtype=np.int64) - 1


def spin_to_binary(s) -> np.ndarray:
    return (np.asarray(s, dtype=np.int64) + 1) // 2


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Substitute x = (1 + s) / 2; energies agree exactly for every assignment."""
    h = q.linear / 2
    offset = q.offset + float(np.sum(q.linear)) / 2
    J = {}
    for (i, j), w in q.quadratic.items():
        J[(i, j)] = w / 4
        h[i] += w / 4
        h[j] += w / 4
        offset += w / 4
    return IsingModel(q.n, h, J, offset)


def ising_to_qubo(m: IsingModel) -> QuboModel:
    """Substitute s = 2x - 1; energies agree exactly for every assignment."""
    lin = 2 * m.linear
    offset = m.offset - float(np.sum(m.linear))
    Q = {}
    for (i, j), w in m.quadratic.items():
        Q[(i, j)] = 4 * w
        lin[i] -= 2 * w
        lin[j] -= 2 * w
        offset += w
    return QuboModel(m.n, lin, Q, offset)


def as_qubo(model) -> QuboModel:
    return model if isinstance(model, QuboModel) else ising_to_qubo(model)


def as_ising(model) -> IsingModel:
    return model if isinstance(model, IsingModel) else qubo_to_ising(model)
