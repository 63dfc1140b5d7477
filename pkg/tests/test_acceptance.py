"""The acceptance criteria, each at its stated tolerance and time budget.

The terminal summary lists one PASS/FAIL line per criterion (see conftest).
"""
import math
import time
from fractions import Fraction

import numpy as np

from dstoch.birkhoff import decompose, max_terms, recombine
from dstoch.markov import ChainSchedule, entropy_trace, path_distribution, path_entropy, state_at
from dstoch.polytope import contains, is_nested, membership_oracle, orbit_vertices
from dstoch.quantum import (
    identity_unitary,
    diagonal_state,
    markov_vs_quantum_gap,
    maximally_mixed,
    measurement_chain,
    momentum_state,
    random_unitary,
    validate_density_matrix,
    zeno_report,
)
from dstoch.scenarios import ERGODIC_HAMILTONIAN, ergodic_kernel
from dstoch.stochastic import (
    kl_to_uniform,
    propagate,
    random_doubly_stochastic,
    random_probability_vector,
    uniform_matrix,
    uniform_vector,
    validate_doubly_stochastic,
)

X1 = (0.2, 0.3, 0.5)
D12 = ((0.1, 0.3, 0.6), (0.4, 0.2, 0.4), (0.5, 0.5, 0.0))
PUBLISHED_KERNEL = np.array([[0.232, 0.223, 0.545], [0.223, 0.551, 0.226], [0.545, 0.226, 0.229]])


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        if exc[0] is None:
            elapsed = time.perf_counter() - self.start
            assert elapsed < self.seconds, f"took {elapsed:.2f}s, budget {self.seconds}s"


def sinkhorn(a, tol=1e-14):
    for _ in range(10000):
        a = a / a.sum(axis=1, keepdims=True)
        a = a / a.sum(axis=0, keepdims=True)
        if np.max(np.abs(a.sum(axis=1) - 1)) < tol:
            return a
    raise AssertionError("sinkhorn did not converge")


def random_density(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = z @ z.conj().T
    return validate_density_matrix(rho / np.trace(rho).real)


def test_criterion_01_worked_chain_step():
    with Budget(1):
        y = propagate(X1, D12).data
        exact = [sum(Fraction(str(X1[a])) * Fraction(str(D12[a][b])) for a in range(3)) for b in range(3)]
        assert [float(v) for v in exact] == [0.39, 0.37, 0.24]
        assert np.max(np.abs(y - [0.39, 0.37, 0.24])) < 1e-12


def test_criterion_02_kl_regression():
    with Budget(1):
        assert abs(kl_to_uniform(X1) - 0.069) < 5e-4
        assert abs(kl_to_uniform(propagate(X1, D12)) - 0.021) < 5e-4


def test_criterion_03_ergodic_quantum_example():
    with Budget(1):
        D = ergodic_kernel(1.0).data
        assert np.max(np.abs(D - PUBLISHED_KERNEL)) < 1e-3
        ev = sorted(np.linalg.eigvals(D), key=lambda z: -z.real)
        assert np.max(np.abs(np.array(ev) - [1.0, 0.325, -0.315])) < 1e-3
        assert np.max(np.abs(np.linalg.matrix_power(D, 6) - 1 / 3)) < 0.01


def test_criterion_04_path_entropy_closed_forms():
    with Budget(5):
        for d in (2, 3, 4):
            for s in range(1, 9):
                u = path_distribution(ChainSchedule.homogeneous(uniform_vector(d), uniform_matrix(d), s - 1))
                assert abs(path_entropy(u) - math.log(d)) < 1e-10
                e = np.zeros(d)
                e[0] = 1.0
                c = path_distribution(ChainSchedule.homogeneous(e, uniform_matrix(d), s - 1))
                assert abs(path_entropy(c) - (s - 1) / s * math.log(d)) < 1e-10


def test_criterion_05_birkhoff_round_trip():
    rng = np.random.default_rng(5)
    with Budget(10):
        for i in range(200):
            d = int(rng.integers(1, 7))
            if i % 2:
                D = random_doubly_stochastic(d, rng)
            else:
                D = validate_doubly_stochastic(sinkhorn(rng.random((d, d))))
            dec = decompose(D)
            assert np.max(np.abs(recombine(dec).data - D.data)) < 1e-9
            assert len(dec) <= max_terms(d)
            assert abs(math.fsum(dec.weights) - 1.0) < 1e-9


def test_criterion_06_polytope_membership_oracle():
    rng = np.random.default_rng(6)
    with Budget(30):
        for i in range(1000):
            d = int(rng.integers(2, 6))
            x = random_probability_vector(d, rng)
            if i % 2:
                y = random_probability_vector(d, rng)
            else:  # a reachable point, so both answers are exercised
                y = propagate(x, random_doubly_stochastic(d, rng))
            p = orbit_vertices(x)
            assert contains(p, y) == membership_oracle(p, y)
        p = orbit_vertices(X1)
        assert not contains(p, (0.4, 0.5, 0.1))
        assert contains(p, (0.39, 0.37, 0.24))


def test_criterion_07_universality_and_nesting():
    rng = np.random.default_rng(7)
    with Budget(30):
        for _ in range(500):
            d, n = int(rng.integers(1, 7)), int(rng.integers(1, 11))
            schedule = ChainSchedule(
                random_probability_vector(d, rng), tuple(random_doubly_stochastic(d, rng) for _ in range(n))
            )
            first = orbit_vertices(schedule.initial)
            polys = [first]
            for t in range(2, schedule.horizon + 1):
                x = state_at(schedule, t)
                assert contains(first, x)
                polys.append(orbit_vertices(x))
                assert is_nested(polys[-1], polys[-2])
            e = entropy_trace(schedule).entropies
            assert all(b >= a - 1e-10 for a, b in zip(e, e[1:]))


def test_criterion_08_stroboscopic_equivalence():
    rng = np.random.default_rng(8)
    with Budget(30):
        for _ in range(100):
            d, n = int(rng.integers(1, 7)), int(rng.integers(1, 9))
            rec = measurement_chain(random_density(d, rng), [random_unitary(d, rng) for _ in range(n)])
            replay = ChainSchedule(rec.vectors[0], rec.kernels)
            for s, v in enumerate(rec.vectors, start=1):
                assert np.max(np.abs(v.data - state_at(replay, s).data)) < 1e-12
            st = rec.staircase
            assert st[1] >= st[0] - 1e-9
            for i in range(1, len(st) - 2, 2):
                assert abs(st[i + 1] - st[i]) < 1e-9
                assert st[i + 2] >= st[i + 1] - 1e-9
            assert st[-1] <= math.log(d) + 1e-9


def test_criterion_09_non_markovianity_witness():
    rng = np.random.default_rng(9)
    with Budget(5):
        rho1 = diagonal_state(random_probability_vector(3, rng))
        assert markov_vs_quantum_gap(rho1, random_unitary(3, rng), identity_unitary(3)).max_gap == 0.0
        hits = sum(
            markov_vs_quantum_gap(maximally_mixed(3), random_unitary(3, rng), random_unitary(3, rng)).max_gap > 1e-6
            for _ in range(100)
        )
        assert hits >= 99


def test_criterion_10_zeno_freezing():
    with Budget(10):
        rep = zeno_report(ERGODIC_HAMILTONIAN, 1e-3, 100, X1)
        for s, drift in enumerate(rep.drift, start=1):
            assert drift < 10 * s * rep.epsilon_max
        assert rep.frozen_mass[-1] > 0.99
        pe = rep.path_entropies
        assert all(b < a for a, b in zip(pe, pe[1:]))
        assert pe[-1] < 0.05


def test_criterion_11_momentum_state_fixed_point():
    rng = np.random.default_rng(11)
    with Budget(1):
        for d in range(2, 7):
            for r in range(d):
                rec = measurement_chain(momentum_state(d, r), [random_unitary(d, rng) for _ in range(4)])
                for v, e in zip(rec.vectors, rec.entropies):
                    assert np.max(np.abs(v.data - 1 / d)) < 1e-12
                    assert abs(e - math.log(d)) < 1e-9
