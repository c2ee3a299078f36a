import itertools
import statistics

import numpy as np
import pytest
from hypothesis import given, strategies as st

from annealgraph.builders import build_mis_qubo
from annealgraph.chimera import (ChimeraSpec, Embedding, broken_chain_count, chimera_graph, clique_embedding,
                                 contract_random_edges, degrade, embed_model, free_couplers,
                                 physical_to_logical_graph, unembed, unembed_sample, verify_embedding)
from annealgraph.graph import Graph, complete_graph, is_bipartite, path_graph, random_graph
from annealgraph.model import IsingModel, as_ising
from annealgraph.solvers import AnnealSchedule, Sample, SampleSet, anneal_flip


def edge_formula(M, N, L):
    return L * L * M * N + L * M * (N - 1) + L * N * (M - 1)


@pytest.mark.parametrize("M, N, L", [(1, 1, 4), (2, 2, 4), (12, 12, 4), (3, 2, 2)])
def test_chimera_counts(M, N, L):
    g = chimera_graph(ChimeraSpec(M, N, L))
    assert g.n == 2 * L * M * N
    assert g.num_edges == edge_formula(M, N, L)
    assert is_bipartite(g)


def test_chimera_known_values():
    assert chimera_graph(ChimeraSpec(1, 1, 4)).num_edges == 16
    assert chimera_graph(ChimeraSpec(2, 2, 4)).num_edges == 80
    g = chimera_graph(ChimeraSpec())
    assert (g.n, g.num_edges) == (1152, 3360)


def test_chimera_orientation_convention():
    s = ChimeraSpec(2, 2, 4)
    g = chimera_graph(s)
    # side-0 couples vertically, side-1 horizontally
    assert g.has_edge(s.label(0, 0, 0, 2), s.label(1, 0, 0, 2))
    assert not g.has_edge(s.label(0, 0, 0, 2), s.label(0, 1, 0, 2))
    assert g.has_edge(s.label(0, 0, 1, 3), s.label(0, 1, 1, 3))
    assert s.coords(s.label(1, 0, 1, 3)) == (1, 0, 1, 3)


def test_degrade():
    base = ChimeraSpec()
    assert chimera_graph(degrade(base, 0, 1)) == chimera_graph(base)
    s = degrade(base, 52, seed=3)
    assert len(s.active_qubits()) == 1100
    assert chimera_graph(s).n == 1100
    assert degrade(base, 52, seed=3) == s
    with pytest.raises(ValueError):
        degrade(ChimeraSpec(1, 1, 4), 9, 0)


def test_degraded_graph_drops_incident_edges():
    base = ChimeraSpec(3, 3, 4)
    s = degrade(base, 10, seed=1)
    full = chimera_graph(base)
    g = chimera_graph(s)
    labels = s.active_qubits()
    survived = {(labels[u], labels[v]) for u, v in g.edges}
    expected = {(a, b) for a, b in full.edges if a not in s.missing and b not in s.missing}
    assert survived == expected


def test_contract_m0_identity():
    s = ChimeraSpec(2, 2, 4)
    g, e = contract_random_edges(s, 0, seed=0)
    assert g == chimera_graph(s)
    assert all(len(c) == 1 for c in e.chains.values())


def test_contract_full_chimera_m1():
    g, e = contract_random_edges(ChimeraSpec(), 1, seed=0)
    assert g.n == 1151
    assert e.max_chain_length() == 2


@pytest.mark.parametrize("m", [1, 5, 20, 60])
def test_contract_embedding_certifies(m):
    s = ChimeraSpec(4, 4, 4)
    g, e = contract_random_edges(s, m, seed=m)
    assert g.n == 128 - m
    assert verify_embedding(e, chimera_graph(s), g)
    assert sorted(q for c in e.chains.values() for q in c) == list(range(128))
    # the minor is exactly the graph induced by the chains
    assert physical_to_logical_graph(e, chimera_graph(s)) == g


def test_contract_on_degraded_spec():
    s = degrade(ChimeraSpec(3, 3, 4), 5, seed=2)
    g, e = contract_random_edges(s, 10, seed=1)
    assert g.n == 72 - 5 - 10
    assert verify_embedding(e, chimera_graph(s), g)


def test_contract_intra_cell_edge_not_bipartite():
    s = ChimeraSpec(1, 1, 4)
    g, _ = contract_random_edges(s, 1, seed=0)  # every edge of one cell is intra-cell
    assert not is_bipartite(g)


def test_added_edge_has_no_free_coupler():
    s = ChimeraSpec(2, 2, 4)
    phys = chimera_graph(s)
    g, e = contract_random_edges(s, 4, seed=5)
    absent = [(u, v) for u, v in itertools.combinations(range(g.n), 2) if not g.has_edge(u, v)]
    for u, v in absent[:50]:
        assert free_couplers(e, phys, u, v) == []
        bigger = Graph(g.n, set(g.edges) | {(u, v)})
        check = verify_embedding(e, phys, bigger)
        assert not check and "no physical coupler" in check.message


def test_contract_too_many():
    with pytest.raises(ValueError):
        contract_random_edges(ChimeraSpec(1, 1, 2), 4, seed=0)


@pytest.mark.parametrize("M, size", [(1, 5), (2, 9), (4, 17), (12, 49)])
def test_clique_embedding_full_yield(M, size):
    s = ChimeraSpec(M, M, 4)
    e = clique_embedding(s)
    assert len(e) == size
    check = verify_embedding(e, chimera_graph(s), complete_graph(size))
    assert check, check.message


def test_clique_embedding_chain_lengths():
    e = clique_embedding(ChimeraSpec(12, 12, 4))
    lengths = sorted(len(c) for c in e.chains.values())
    assert lengths[:-1] == [13] * 48  # the L-shaped chains have M + 1 qubits


def test_clique_embedding_degraded():
    s = degrade(ChimeraSpec(), 52, seed=0)
    e = clique_embedding(s)
    assert 2 <= len(e) < 49
    assert verify_embedding(e, chimera_graph(s), complete_graph(len(e)))


def test_clique_embedding_errors():
    with pytest.raises(ValueError):
        clique_embedding(ChimeraSpec(2, 3, 4))
    with pytest.raises(ValueError):
        clique_embedding(degrade(ChimeraSpec(1, 1, 4), 7, seed=0))


def test_verify_examples():
    g = random_graph(10, 0.4, 0)
    ident = Embedding({v: (v,) for v in range(g.n)})
    assert verify_embedding(ident, g, g)
    bad = Embedding({0: (0, 1), 1: (1, 2)})
    check = verify_embedding(bad, path_graph(3), path_graph(2))
    assert not check and "overlap" in check.message
    split = Embedding({0: (0, 2), 1: (1,)})
    assert "not connected" in verify_embedding(split, path_graph(3), path_graph(2)).message
    assert "no chain" in verify_embedding(Embedding({0: (0,)}), path_graph(3), path_graph(2)).message


def test_embedding_text_round_trip():
    e = clique_embedding(ChimeraSpec(2, 2, 4))
    assert Embedding.from_text(e.to_text()) == e
    with pytest.raises(ValueError):
        Embedding.from_text("0 1 2\n")


def test_embed_identity_unchanged():
    m = as_ising(build_mis_qubo(random_graph(8, 0.4, 1)))
    g = Graph(8, m.coupler_graph_edges())
    ident = Embedding({v: (v,) for v in range(8)})
    assert embed_model(m, ident, 3.0, g) == m


def test_embed_single_variable_chain():
    m = IsingModel(1, linear=[1.0])
    phys = path_graph(2)
    e = Embedding({0: (0, 1)})
    p = embed_model(m, e, 1.0, phys)
    assert list(p.h) == [0.5, 0.5]
    assert p.J == {(0, 1): -1.0}
    assert p.offset == 1.0
    assert p.energy([1, 1]) == m.energy([1]) == 1
    assert p.energy([-1, -1]) == m.energy([-1]) == -1
    assert p.energy([1, -1]) == p.energy([-1, 1]) == 2


def test_embed_zero_strength_has_no_chain_coupling():
    m = IsingModel(1, linear=[1.0])
    p = embed_model(m, Embedding({0: (0, 1)}), 0.0, path_graph(2))
    assert p.J.get((0, 1), 0.0) == 0.0
    with pytest.raises(ValueError):
        embed_model(m, Embedding({0: (0, 1)}), -1.0, path_graph(2))


def test_embed_rejects_invalid_embedding():
    m = IsingModel(2, quadratic={(0, 1): 1.0})
    with pytest.raises(ValueError):
        embed_model(m, Embedding({0: (0,), 1: (2,)}), 1.0, path_graph(3))


@given(st.integers(0, 10**6), st.floats(0, 3))
def test_unbroken_physical_energy_equals_logical(seed, strength):
    s = ChimeraSpec(2, 2, 4)
    g, e = contract_random_edges(s, 8, seed=seed % 50)
    rng = np.random.default_rng(seed)
    m = IsingModel(g.n)
    for v in range(g.n):
        m.add_linear(v, float(rng.normal()))
    for u, v in g.sorted_edges():
        m.add_quadratic(u, v, float(rng.normal()))
    p = embed_model(m, e, strength, chimera_graph(s))
    logical = rng.choice([-1, 1], size=g.n)
    phys = np.zeros(p.n, dtype=int)
    for k, chain in e.chains.items():
        phys[list(chain)] = logical[k]
    assert p.energy(phys) == pytest.approx(m.energy(logical), abs=1e-9)
    spins, broken = unembed_sample(phys, e, "majority_vote", m)
    assert broken == 0 and np.array_equal(spins, logical)


def test_majority_vote_examples():
    m = IsingModel(1)
    e = Embedding({0: (0, 1, 2)})
    assert unembed_sample(np.array([1, 1, -1]), e, "majority_vote", m) == (pytest.approx([1]), 1)
    for strategy in ("majority_vote", "minimize_energy", "discard_broken"):
        spins, broken = unembed_sample(np.array([-1, -1, -1]), e, strategy, m)
        assert list(spins) == [-1] and broken == 0


def test_majority_tie_uses_logical_energy():
    e = Embedding({0: (0, 1), 1: (2,)})
    for J, expected in ((1.0, -1), (-1.0, 1)):
        m = IsingModel(2, quadratic={(0, 1): J})
        spins, broken = unembed_sample(np.array([1, -1, 1]), e, "majority_vote", m)
        assert broken == 1 and spins[0] == expected
        energies = {c: m.energy([c, 1]) for c in (-1, 1)}
        assert m.energy(spins) == min(energies.values())


def test_minimize_energy_and_discard():
    m = IsingModel(2, linear=[0.0, 0.0], quadratic={(0, 1): -1.0})
    e = Embedding({0: (0, 1, 2), 1: (3,)})
    sample = np.array([1, -1, -1, 1])
    assert list(unembed_sample(sample, e, "majority_vote", m)[0]) == [-1, 1]
    assert list(unembed_sample(sample, e, "minimize_energy", m)[0]) == [1, 1]
    assert unembed_sample(sample, e, "discard_broken", m) == (None, 1)
    with pytest.raises(ValueError):
        unembed_sample(sample, e, "vote", m)


def test_unembed_sampleset():
    m = IsingModel(2, quadratic={(0, 1): -1.0})
    e = Embedding({0: (0, 1), 1: (2,)})
    ss = SampleSet([Sample(np.array([1, 1, 1]), 0.0), Sample(np.array([1, -1, 1]), 0.0)])
    out = unembed(ss, e, "discard_broken", m)
    assert len(out) == 1 and out.stats["discarded"] == 1
    out = unembed(ss, e, "majority_vote", m)
    assert [r.broken_chains for r in out] == [0, 1]
    for r in out:
        assert r.energy == m.energy(r.assignment)


def test_broken_rate_decreases_with_strength():
    s = ChimeraSpec(2, 2, 4)
    phys = chimera_graph(s)
    rates = {}
    for cs in (0.0, 0.5, 1.0, 2.0):
        per_seed = []
        for seed in range(20):
            g, e = contract_random_edges(s, 8, seed=seed)
            p = embed_model(as_ising(build_mis_qubo(g)), e, cs, phys)
            r = anneal_flip(p, AnnealSchedule(1500, alpha=0.995), seed=seed)
            per_seed.append(broken_chain_count(r.best.assignment, e) / len(e))
        rates[cs] = statistics.median(per_seed)
    assert rates[0.0] >= rates[0.5] >= rates[1.0] >= rates[2.0]
    assert rates[0.0] > rates[2.0]
