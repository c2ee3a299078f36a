import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from annealgraph.builders import build_mis_qubo
from annealgraph.graph import complete_graph
from annealgraph.model import (IsingModel, QuboModel, binary_to_spin, ising_energy, ising_to_qubo,
                               qubo_energy, qubo_to_ising, spin_to_binary)


def random_qubo(rng, n, density=0.6):
    q = QuboModel(n, offset=float(rng.normal()))
    for i in range(n):
        q.add_linear(i, float(rng.normal()))
        for j in range(i + 1, n):
            if rng.random() < density:
                q.add_quadratic(i, j, float(rng.normal()))
    return q


def random_ising(rng, n, density=0.6):
    m = IsingModel(n, offset=float(rng.normal()))
    for i in range(n):
        m.add_linear(i, float(rng.normal()))
        for j in range(i + 1, n):
            if rng.random() < density:
                m.add_quadratic(i, j, float(rng.normal()))
    return m


def naive_qubo_energy(q, x):
    e = q.offset + sum(q.linear[i] * x[i] for i in range(q.n))
    return e + sum(w * x[i] * x[j] for (i, j), w in q.quadratic.items())


def test_mis_k3_energies():
    q = build_mis_qubo(complete_graph(3))
    assert qubo_energy(q, [0, 0, 0]) == 0
    assert qubo_energy(q, [1, 0, 0]) == -1
    assert qubo_energy(q, [1, 1, 0]) == 0


def test_ising_energy_examples():
    assert ising_energy(IsingModel(3), [1, -1, 1]) == 0
    m = IsingModel(2, linear=[1, 1], quadratic={(0, 1): 1})
    assert ising_energy(m, [-1, -1]) == -1
    assert ising_energy(m, [1, -1]) == -1


def test_domain_and_length_errors():
    q = QuboModel(2)
    with pytest.raises(ValueError):
        qubo_energy(q, [0, 2])
    with pytest.raises(ValueError):
        qubo_energy(q, [0])
    with pytest.raises(ValueError):
        ising_energy(IsingModel(2), [0, 1])


def test_index_and_key_normalization():
    q = QuboModel(3)
    q.add_quadratic(2, 0, 1.5)
    q.add_quadratic(0, 2, 0.5)
    assert q.quadratic == {(0, 2): 2.0}
    q.add_quadratic(1, 1, 3.0)  # binary diagonal folds into the linear term
    assert q.linear[1] == 3.0
    m = IsingModel(2)
    m.add_quadratic(1, 1, 2.0)  # s^2 = 1
    assert m.offset == 2.0
    with pytest.raises(IndexError):
        q.add_linear(3, 1.0)


def test_qubo_to_ising_examples():
    z = qubo_to_ising(QuboModel(3))
    assert not z.quadratic and np.all(z.h == 0) and z.offset == 0
    m = qubo_to_ising(QuboModel(1, linear=[2.0]))
    assert list(m.h) == [1.0] and m.offset == 1.0
    assert [ising_energy(m, [s]) for s in (-1, 1)] == [0.0, 2.0]
    m = qubo_to_ising(QuboModel(2, quadratic={(0, 1): 4.0}))
    assert list(m.h) == [1.0, 1.0] and m.J == {(0, 1): 1.0} and m.offset == 1.0
    q = QuboModel(2, quadratic={(0, 1): 4.0})
    for x in itertools.product((0, 1), repeat=2):
        assert qubo_energy(q, x) == ising_energy(m, binary_to_spin(x))


def test_ising_to_qubo_examples():
    q = ising_to_qubo(IsingModel(1, linear=[1.0]))
    assert list(q.linear) == [2.0] and q.offset == -1.0
    assert [qubo_energy(q, [x]) for x in (0, 1)] == [-1.0, 1.0]
    z = ising_to_qubo(IsingModel(2))
    assert not z.quadratic and z.offset == 0


def test_conversion_exhaustive_random_models(rng):
    for _ in range(100):
        n = int(rng.integers(1, 11))
        q = random_qubo(rng, n)
        m = qubo_to_ising(q)
        xs = np.array(list(itertools.product((0, 1), repeat=n)))
        assert np.allclose(q.energies(xs), m.energies(2 * xs - 1), atol=1e-9, rtol=0)
        ref = np.array([naive_qubo_energy(q, x) for x in xs])
        assert np.allclose(q.energies(xs), ref, atol=1e-9, rtol=0)
        back = ising_to_qubo(m)
        assert np.allclose(back.linear, q.linear, atol=1e-12)
        assert back.offset == pytest.approx(q.offset, abs=1e-12)
        assert set(back.quadratic) == set(q.quadratic)
        for k, w in q.quadratic.items():
            assert back.quadratic[k] == pytest.approx(w, abs=1e-12)


def test_ising_to_qubo_exhaustive(rng):
    for _ in range(30):
        n = int(rng.integers(1, 9))
        m = random_ising(rng, n)
        q = ising_to_qubo(m)
        ss = np.array(list(itertools.product((-1, 1), repeat=n)))
        assert np.allclose(m.energies(ss), q.energies(spin_to_binary(ss)), atol=1e-9, rtol=0)


def test_argmin_preserved(rng):
    q = random_qubo(rng, 8)
    m = qubo_to_ising(q)
    xs = np.array(list(itertools.product((0, 1), repeat=8)))
    assert np.argmin(q.energies(xs)) == np.argmin(m.energies(2 * xs - 1))


def test_dense_matches_energy(rng):
    q = random_qubo(rng, 6)
    D = q.dense()
    x = np.array([1, 0, 1, 1, 0, 1])
    assert x @ D @ x + q.linear @ x + q.offset == pytest.approx(q.energy(x))


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_orientation_invariance(n, seed):
    rng = np.random.default_rng(seed)
    a, b = QuboModel(n), QuboModel(n)
    for i in range(n):
        for j in range(i + 1, n):
            w = float(rng.normal())
            a.add_quadratic(i, j, w)
            b.add_quadratic(j, i, w)
    assert a == b


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_round_trip_property(n, seed):
    rng = np.random.default_rng(seed)
    m = random_ising(rng, n)
    back = qubo_to_ising(ising_to_qubo(m))
    assert np.allclose(back.h, m.h, atol=1e-9)
    assert back.offset == pytest.approx(m.offset, abs=1e-9)
