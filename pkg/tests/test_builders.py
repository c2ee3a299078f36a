import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from annealgraph.builders import (ChVarIndex, InfeasibleAssignment, KwayVarIndex, Partition, bisection_weights,
                                  build_bisection_ising, build_ch_qubo, build_clique_kfixed_qubo,
                                  build_kway_qubo, build_mis_qubo, decode_ch, decode_kway, decode_mis,
                                  encode_ch, encode_kway, partition_to_spins, spins_to_partition)
from annealgraph.graph import Graph, complement, complete_graph, cycle_graph, empty_graph, path_graph, random_graph
from annealgraph.partition import ch_cost, edge_cut, optimal_balanced_cut, optimal_ch_cost
from annealgraph.solvers import brute_force, is_local_minimum

from conftest import enumerate_min, graphs
from oracles import ch_hamiltonian_minimum, max_clique_size, max_independent_set_size


# ---------------------------------------------------------------------------
# MIS and clique
# ---------------------------------------------------------------------------

def test_mis_k3_structure_and_minimum():
    q = build_mis_qubo(complete_graph(3))
    assert list(q.linear) == [-1, -1, -1]
    assert q.quadratic == {(0, 1): 2, (0, 2): 2, (1, 2): 2}
    best, arg = enumerate_min(q.energy, 3)
    assert best == -1 and len(arg) == 3


def test_mis_edgeless_and_path():
    best, arg = enumerate_min(build_mis_qubo(empty_graph(3)).energy, 3)
    assert best == -3 and arg == [(1, 1, 1)]
    best, arg = enumerate_min(build_mis_qubo(path_graph(3)).energy, 3)
    assert best == -2 and arg == [(1, 0, 1)]


@pytest.mark.parametrize("L, M", [(-1, 1), (-2, 1), (1, 2), (0, 2)])
def test_mis_weight_precondition(L, M):
    with pytest.raises(ValueError):
        build_mis_qubo(path_graph(3), L, M)


@given(graphs(max_n=8))
def test_mis_minimum_is_independence_number(g):
    q = build_mis_qubo(g)
    r = brute_force(q)
    assert r.best.energy == -max_independent_set_size(g)
    chosen, ok = decode_mis(g, r.best.assignment)
    assert ok and len(chosen) == -r.best.energy


def test_mis_on_complement_gives_clique():
    for seed in range(10):
        g = random_graph(8, 0.5, seed)
        r = brute_force(build_mis_qubo(complement(g)))
        chosen, ok = decode_mis(complement(g), r.best.assignment)
        assert ok and g.is_clique(chosen) and len(chosen) == max_clique_size(g)


def test_decode_mis_examples():
    k3 = complete_graph(3)
    assert decode_mis(k3, [1, 0, 0]) == ({0}, True)
    assert decode_mis(k3, [1, 1, 0]) == ({0, 1}, False)
    assert decode_mis(random_graph(6, 0.5, 0), [0] * 6) == (set(), True)


def test_clique_kfixed_examples():
    q = build_clique_kfixed_qubo(complete_graph(3), 3, A=1, B=1)
    assert q.energy([1, 1, 1]) == 0
    q = build_clique_kfixed_qubo(Graph(2, [(0, 1)]), 2, A=1, B=1)
    assert q.energy([1, 1]) == 0
    q = build_clique_kfixed_qubo(empty_graph(2), 1, A=1, B=1)
    assert q.energy([1, 0]) == 0 and q.energy([0, 1]) == 0
    assert q.energy([1, 1]) > 0 and q.energy([0, 0]) > 0


def test_clique_kfixed_expansion_matches_formula():
    g = random_graph(6, 0.5, 3)
    K, A, B = 3, 2.5, 1.0
    q = build_clique_kfixed_qubo(g, K, A=A, B=B)
    for x in itertools.product((0, 1), repeat=6):
        ref = A * (K - sum(x)) ** 2 + B * (K * (K - 1) / 2 - sum(x[u] * x[v] for u, v in g.edges))
        assert q.energy(x) == pytest.approx(ref)


@given(graphs(min_n=1, max_n=7), st.integers(1, 5))
def test_clique_kfixed_zero_iff_clique_exists(g, K):
    q = build_clique_kfixed_qubo(g, K)
    best = brute_force(q).best.energy
    assert (abs(best) < 1e-9) == (max_clique_size(g) >= K)
    assert best >= -1e-9


# ---------------------------------------------------------------------------
# bisection
# ---------------------------------------------------------------------------

def test_bisection_weights_and_structure():
    g = path_graph(4)
    A, B = bisection_weights(g)
    assert (A, B) == (1.5, 1.0)
    m = build_bisection_ising(g)
    assert np.all(m.h == 0)
    assert m.offset == 1.5 * 4 + 3 / 2
    for i, j in itertools.combinations(range(4), 2):
        assert m.J[(i, j)] == 2 * A - (B / 2 if g.has_edge(i, j) else 0)


def test_bisection_examples():
    r = brute_force(build_bisection_ising(path_graph(4)), all_optima=True)
    assert r.best.energy == 1
    parts = {frozenset(map(frozenset, spins_to_partition(s.assignment).parts())) for s in r.records}
    assert parts == {frozenset({frozenset({0, 1}), frozenset({2, 3})})}
    assert brute_force(build_bisection_ising(Graph(2, [(0, 1)]))).best.energy == 1
    assert brute_force(build_bisection_ising(empty_graph(2))).best.energy == 0


def test_bisection_energy_formula(rng):
    g = random_graph(8, 0.5, 4)
    A, B = bisection_weights(g)
    m = build_bisection_ising(g)
    for s in itertools.product((-1, 1), repeat=8):
        s = np.array(s)
        ref = A * s.sum() ** 2 + B * sum((1 - s[u] * s[v]) / 2 for u, v in g.edges)
        assert m.energy(s) == pytest.approx(ref)


def test_partition_spin_round_trip():
    p = Partition([0, 1, 1, 0], 2)
    assert spins_to_partition(partition_to_spins(p)) == p


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_bisection_soundness_small(n):
    for seed in range(4):
        g = random_graph(n, 0.5, seed)
        r = brute_force(build_bisection_ising(g), all_optima=True)
        opt, _ = optimal_balanced_cut(g, 2)
        assert r.best.energy == opt
        for rec in r.records:
            p = spins_to_partition(rec.assignment)
            assert p.is_balanced() and edge_cut(g, p) == opt


# ---------------------------------------------------------------------------
# K-way
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("g, expected", [(cycle_graph(4), 6), (complete_graph(4), 10), (empty_graph(4), 0)])
def test_kway_examples(g, expected):
    q, idx = build_kway_qubo(g, 2)
    assert q.n == 8 and idx.num_vars == 8
    assert brute_force(q).best.energy == expected


def test_kway_c4_optimum_split():
    q, idx = build_kway_qubo(cycle_graph(4), 2)
    r = brute_force(q, all_optima=True)
    for rec in r.records:
        p = decode_kway(idx, rec.assignment)
        assert edge_cut(cycle_graph(4), p) == 2 and p.is_balanced()


def test_kway_index_bijective():
    idx = KwayVarIndex(5, 3)
    assert sorted(idx.var(v, k) for v in range(5) for k in range(3)) == list(range(15))


def test_decode_kway_examples():
    idx = KwayVarIndex(2, 2)
    assert decode_kway(idx, [1, 0, 0, 1]) == Partition([0, 1], 2)
    with pytest.raises(InfeasibleAssignment) as e:
        decode_kway(idx, [0, 0, 0, 1])
    assert e.value.vertices == [0]
    with pytest.raises(InfeasibleAssignment) as e:
        decode_kway(idx, [1, 0, 1, 1])
    assert e.value.vertices == [1]


@given(graphs(min_n=1, max_n=9), st.integers(2, 4), st.data())
def test_kway_identity(g, K, data):
    assign = data.draw(st.lists(st.integers(0, K - 1), min_size=g.n, max_size=g.n))
    p = Partition(assign, K)
    q, idx = build_kway_qubo(g, K)
    x = encode_kway(idx, p)
    A, Bw, _ = (g.n / 2 + 1, g.n / 2 + 1, 1)
    balance = sum((s - g.n / K) ** 2 for s in p.sizes())
    expected = (K - 1) * g.num_edges + edge_cut(g, p) + Bw * balance
    assert q.energy(x) == pytest.approx(expected)
    if p.is_balanced() and g.n % K == 0:
        assert q.energy(x) == (K - 1) * g.num_edges + edge_cut(g, p)


# ---------------------------------------------------------------------------
# core-halo
# ---------------------------------------------------------------------------

def test_ch_variable_count_and_ranges():
    g = random_graph(5, 0.5, 2)
    for K in (1, 2, 3):
        q, idx = build_ch_qubo(g, K)
        assert q.n == K * (3 * g.n + 2 * g.num_edges) == idx.num_vars
        cores = {idx.core(v, k) for v in range(g.n) for k in range(K)}
        halos = {idx.halo(v, k) for v in range(g.n) for k in range(K)}
        aux = {idx.aux(v, w, k) for v, w in idx.pairs for k in range(K)}
        assert not (cores & halos) and not (cores & aux) and not (halos & aux)
        assert cores | halos | aux == set(range(q.n))


@pytest.mark.parametrize("g, K, expected", [
    (empty_graph(1), 1, 1),
    (path_graph(2), 2, 4),
    (empty_graph(2), 2, 2),
])
def test_ch_examples(g, K, expected):
    q, idx = build_ch_qubo(g, K)
    r = brute_force(q, all_optima=True)
    assert r.best.energy == expected
    for rec in r.records:
        dec = decode_ch(idx, rec.assignment, g)
        assert dec.feasible
        assert ch_cost(g, dec.partition).total == expected


def test_ch_p2_split_costs_more():
    g = path_graph(2)
    q, idx = build_ch_qubo(g, 2)
    assert q.energy(encode_ch(idx, g, Partition([0, 1], 2))) == 8
    assert q.energy(encode_ch(idx, g, Partition([0, 0], 2))) == 4


def test_decode_ch_examples():
    g = path_graph(2)
    q, idx = build_ch_qubo(g, 2)
    x = encode_ch(idx, g, Partition([0, 0], 2))
    dec = decode_ch(idx, x, g)
    assert dec.feasible and dec.halos[0] == {0, 1} and dec.halos[1] == set()
    for v, w in idx.pairs:
        assert x[idx.aux(v, w, 0)] == 0
    y = x.copy()
    y[idx.halo(0, 0)] = 0
    assert not decode_ch(idx, y, g).feasible
    z = np.zeros(idx.num_vars, dtype=int)
    dec = decode_ch(idx, z, g)
    assert not dec.feasible and dec.partition is None and "one-hot" in dec.diagnostics[0]


@given(graphs(min_n=1, max_n=7), st.integers(1, 3), st.data())
def test_ch_identity(g, K, data):
    assign = data.draw(st.lists(st.integers(0, K - 1), min_size=g.n, max_size=g.n))
    p = Partition(assign, K)
    q, idx = build_ch_qubo(g, K)
    x = encode_ch(idx, g, p)
    assert decode_ch(idx, x, g).feasible
    assert q.energy(x) == ch_cost(g, p).total


def test_ch_oracle_agrees_with_brute_force():
    cases = [empty_graph(1), path_graph(2), empty_graph(3), Graph(3, [(0, 1)]), path_graph(3),
             Graph(4, [(0, 1)]), Graph(4, [(0, 1), (2, 3)])]
    for g in cases:
        q, _ = build_ch_qubo(g, 2)
        if q.n > 28:
            continue
        best, _, feasible = ch_hamiltonian_minimum(g, 2)
        assert brute_force(q).best.energy == pytest.approx(best)
        assert feasible


@pytest.mark.parametrize("seed", range(4))
def test_ch_soundness_small(seed):
    g = random_graph(5, 0.5, seed)
    best, minimizers, feasible = ch_hamiltonian_minimum(g, 2)
    opt, _ = optimal_ch_cost(g, 2)
    assert best == opt and feasible
    q, idx = build_ch_qubo(g, 2)
    for c in minimizers:
        p = Partition([row.index(1) for row in c], 2)
        assert is_local_minimum(q, encode_ch(idx, g, p))
