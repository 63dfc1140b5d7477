import math

import numpy as np
import pytest
import scipy.linalg

from dstoch.errors import (
    DimensionMismatch,
    NonDiagonalInput,
    NotHermitian,
    NotPositive,
    NotUnitary,
    RegimeViolation,
    TraceMismatch,
    ValidationError,
)
from dstoch.markov import ChainSchedule, ergodicity_report, mixing_time_estimate, path_distribution, state_at
from dstoch.polytope import is_nested, orbit_vertices
from dstoch.quantum import (
    MeasurementChainConfig,
    diagonal_state,
    evolve_unitary,
    fourier_matrix,
    hamiltonian_evolution,
    identity_unitary,
    induced_kernel,
    markov_vs_quantum_gap,
    maximally_mixed,
    measurement_chain,
    momentum_state,
    nonselective_measure,
    position_state,
    random_unitary,
    validate_density_matrix,
    validate_hamiltonian,
    validate_unitary,
    von_neumann_entropy,
    zeno_epsilon,
    zeno_report,
)
from dstoch.scenarios import (
    ERGODIC_EIGENVALUES_PUBLISHED,
    ERGODIC_HAMILTONIAN,
    ERGODIC_KERNEL_PUBLISHED,
    ergodic_kernel,
    ergodic_run,
    momentum_state_run,
    position_state_run,
    zeno_run,
)
from dstoch.stochastic import shannon_entropy, spectral_analysis


def random_density(d, rng, rank=None):
    rank = d if rank is None else rank
    z = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = z @ z.conj().T
    return validate_density_matrix(rho / np.trace(rho).real)


class TestValidation:
    def test_density(self):
        with pytest.raises(NotHermitian):
            validate_density_matrix([[0.5, 0.1], [0.2, 0.5]])
        with pytest.raises(TraceMismatch):
            validate_density_matrix(np.eye(2))
        with pytest.raises(NotPositive):
            validate_density_matrix([[1.5, 0], [0, -0.5]])

    def test_unitary(self):
        with pytest.raises(NotUnitary):
            validate_unitary([[1, 1], [0, 1]])
        validate_unitary(fourier_matrix(5))

    def test_hamiltonian(self):
        with pytest.raises(NotHermitian):
            validate_hamiltonian([[0, 1j], [1j, 0]])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            evolve_unitary(maximally_mixed(2), identity_unitary(3))


class TestBasics:
    def test_fourier(self):
        for d in range(1, 8):
            F = fourier_matrix(d).data
            np.testing.assert_allclose(F @ F.conj().T, np.eye(d), atol=1e-12)
            np.testing.assert_allclose(np.abs(F) ** 2, 1 / d, atol=1e-15)
        assert fourier_matrix(4).data[1, 1] == pytest.approx(0.5j)

    def test_momentum_state_is_pure_and_flat(self):
        for d in (2, 3, 5):
            for r in range(d):
                rho = momentum_state(d, r)
                np.testing.assert_allclose(rho.data @ rho.data, rho.data, atol=1e-12)
                np.testing.assert_allclose(np.diag(rho.data).real, 1 / d, atol=1e-15)

    def test_evolve_preserves_spectrum(self, rng):
        rho = random_density(4, rng)
        V = random_unitary(4, rng)
        out = evolve_unitary(rho, V)
        np.testing.assert_allclose(np.linalg.eigvalsh(out.data), np.linalg.eigvalsh(rho.data), atol=1e-12)
        np.testing.assert_allclose(out.data, V.data.conj().T @ rho.data @ V.data, atol=1e-14)

    def test_measure_position_basis(self, rng):
        rho = random_density(3, rng)
        out, x = nonselective_measure(rho)
        np.testing.assert_allclose(out.data, np.diag(np.diag(rho.data)), atol=1e-15)
        np.testing.assert_allclose(x.data, np.diag(rho.data).real, atol=1e-15)
        again, y = nonselective_measure(out)
        np.testing.assert_allclose(again.data, out.data, atol=1e-15)

    def test_measure_in_frame(self, rng):
        rho = random_density(3, rng)
        W = random_unitary(3, rng)
        out, x = nonselective_measure(rho, W)
        for f in range(3):
            w = W.data[:, f]
            assert x[f] == pytest.approx((w.conj() @ rho.data @ w).real, abs=1e-14)
        # commutes with every projector of the frame
        for f in range(3):
            P = np.outer(W.data[:, f], W.data[:, f].conj())
            np.testing.assert_allclose(P @ out.data, out.data @ P, atol=1e-12)

    def test_measurement_destroys_coherence(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 7))
            W = random_unitary(d, rng)
            out, _ = nonselective_measure(random_density(d, rng), W)
            in_frame = W.data.conj().T @ out.data @ W.data
            assert np.max(np.abs(in_frame - np.diag(np.diag(in_frame)))) < 1e-12

    def test_measurement_never_lowers_entropy(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 6))
            rho = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
            out, x = nonselective_measure(rho, random_unitary(d, rng))
            assert von_neumann_entropy(out) >= von_neumann_entropy(rho) - 1e-9
            assert von_neumann_entropy(out) == pytest.approx(shannon_entropy(x), abs=1e-9)

    def test_entropy_values(self):
        assert von_neumann_entropy(position_state(3, 1)) == pytest.approx(0.0, abs=1e-12)
        assert von_neumann_entropy(maximally_mixed(4)) == pytest.approx(math.log(4), abs=1e-12)

    def test_random_unitary_is_unitary(self, rng):
        for d in range(1, 7):
            U = random_unitary(d, rng).data
            np.testing.assert_allclose(U @ U.conj().T, np.eye(d), atol=1e-12)

    def test_unistochastic(self, rng):
        for _ in range(500):
            d = int(rng.integers(1, 9))
            D = induced_kernel(random_unitary(d, rng)).data
            assert D.min() >= 0
            np.testing.assert_allclose(D.sum(axis=0), 1, atol=1e-12)
            np.testing.assert_allclose(D.sum(axis=1), 1, atol=1e-12)

    def test_kernel_with_frames(self, rng):
        V, A, B = (random_unitary(3, rng) for _ in range(3))
        expect = np.abs(A.data.conj().T @ V.data @ B.data) ** 2
        np.testing.assert_allclose(induced_kernel(V, A, B).data, expect, atol=1e-15)

    def test_fourier_kernel_is_uniform(self):
        np.testing.assert_allclose(induced_kernel(fourier_matrix(4)).data, 0.25, atol=1e-15)


class TestHamiltonian:
    def test_against_expm(self, rng):
        for _ in range(20):
            d = int(rng.integers(1, 6))
            z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            h = (z + z.conj().T) / 2
            t = float(rng.uniform(-3, 3))
            np.testing.assert_allclose(
                hamiltonian_evolution(h, t).data, scipy.linalg.expm(1j * t * h), atol=1e-10
            )

    def test_zero_time_is_identity(self):
        assert np.array_equal(hamiltonian_evolution(ERGODIC_HAMILTONIAN, 0.0).data, np.eye(3))

    def test_group_law(self):
        a = hamiltonian_evolution(ERGODIC_HAMILTONIAN, 0.3).data
        b = hamiltonian_evolution(ERGODIC_HAMILTONIAN, 0.5).data
        np.testing.assert_allclose(a @ b, hamiltonian_evolution(ERGODIC_HAMILTONIAN, 0.8).data, atol=1e-12)


class TestErgodicExample:
    def test_kernel(self):
        D = ergodic_kernel()
        assert np.max(np.abs(D.data - ERGODIC_KERNEL_PUBLISHED)) < 1e-3
        np.testing.assert_allclose(D.data, D.data.T, atol=1e-12)

    def test_eigenvalues(self):
        ev = np.sort(np.linalg.eigvalsh(ergodic_kernel().data))[::-1]
        np.testing.assert_allclose(ev, ERGODIC_EIGENVALUES_PUBLISHED, atol=1e-3)
        assert spectral_analysis(ergodic_kernel()).e_max == pytest.approx(0.3256, abs=1e-3)

    def test_convergence(self):
        D = ergodic_kernel().data
        dev = [np.max(np.abs(np.linalg.matrix_power(D, n) - 1 / 3)) for n in range(1, 9)]
        assert dev[5] < 0.01
        assert all(b < a for a, b in zip(dev, dev[1:]))

    def test_ergodicity_report(self):
        rec = ergodic_run(n_steps=8)
        rep = ergodicity_report(rec.schedule, 0.01)
        assert rep.ergodic_at == 5
        assert mixing_time_estimate(ergodic_kernel()) == pytest.approx(0.890, abs=5e-3)

    def test_run_matches_powers(self):
        rec = ergodic_run(n_steps=5)
        D = ergodic_kernel().data
        x1 = np.array([0.2, 0.3, 0.5])
        for s, v in enumerate(rec.vectors):
            np.testing.assert_allclose(v.data, x1 @ np.linalg.matrix_power(D, s), atol=1e-12)


class TestMeasurementChain:
    def test_frame_count(self, rng):
        V = (random_unitary(2, rng),)
        with pytest.raises(ValidationError):
            MeasurementChainConfig(maximally_mixed(2), V, (identity_unitary(2),) * 3)
        short = MeasurementChainConfig(maximally_mixed(2), V, (fourier_matrix(2),))
        assert len(short.frames()) == 2
        assert np.array_equal(short.frames()[0].data, np.eye(2))

    def test_stroboscopic_replay(self, rng):
        for _ in range(100):
            d, n = int(rng.integers(1, 7)), int(rng.integers(0, 9))
            evolutions = [random_unitary(d, rng) for _ in range(n)]
            frames = None if rng.random() < 0.5 else [random_unitary(d, rng) for _ in range(n + 1)]
            rec = measurement_chain(random_density(d, rng), evolutions, frames)
            for s, v in enumerate(rec.vectors, start=1):
                assert np.max(np.abs(v.data - state_at(rec.schedule, s).data)) < 1e-12
            st = rec.staircase
            for i in range(1, len(st) - 1, 2):
                assert st[i + 1] == pytest.approx(st[i], abs=1e-9)  # unitary step
                assert st[i + 2] >= st[i + 1] - 1e-9  # measurement step
            assert st[1] >= st[0] - 1e-9
            for v, e in zip(rec.vectors, rec.entropies):
                assert e == pytest.approx(shannon_entropy(v), abs=1e-9)

    def test_position_state_second_vector(self, rng):
        d, r = 4, 2
        V = random_unitary(d, rng)
        rec = position_state_run(d, r, [V])
        np.testing.assert_allclose(rec.vectors[0].data, np.eye(d)[r], atol=1e-15)
        np.testing.assert_allclose(rec.vectors[1].data, np.abs(V.data[r]) ** 2, atol=1e-12)
        assert rec.staircase[0] == pytest.approx(0.0, abs=1e-12)

    def test_momentum_fixed_point(self, rng):
        for d in (2, 3, 5):
            rec = momentum_state_run(d, 1, [random_unitary(d, rng) for _ in range(5)])
            for v, e in zip(rec.vectors, rec.entropies):
                assert np.max(np.abs(v.data - 1 / d)) < 1e-12
                assert e == pytest.approx(math.log(d), abs=1e-9)

    def test_maximally_mixed_is_stationary(self, rng):
        rec = measurement_chain(maximally_mixed(3), [random_unitary(3, rng) for _ in range(4)])
        for rho in rec.rhos + rec.evolved:
            np.testing.assert_allclose(rho.data, np.eye(3) / 3, atol=1e-12)

    def test_polytopes_nest(self, rng):
        rec = position_state_run(3, 0, [random_unitary(3, rng) for _ in range(6)])
        polys = [orbit_vertices(v) for v in rec.vectors]
        assert all(is_nested(b, a) for a, b in zip(polys, polys[1:]))


class TestGap:
    def test_identity_second_step(self, rng):
        for _ in range(20):
            x = rng.dirichlet(np.ones(3))
            rep = markov_vs_quantum_gap(diagonal_state(x), random_unitary(3, rng), identity_unitary(3))
            assert rep.max_gap == 0.0

    def test_qubit_fourier(self):
        F = fourier_matrix(2)
        rep = markov_vs_quantum_gap(position_state(2, 0), F, F)
        np.testing.assert_allclose(rep.D_with_meas.data, 0.5, atol=1e-15)
        np.testing.assert_allclose(rep.D_without.data, np.eye(2), atol=1e-15)
        assert rep.max_gap == pytest.approx(0.5)
        assert rep.x_without.tolist() == pytest.approx([1.0, 0.0])

    def test_random_pairs(self, rng):
        gaps = [
            markov_vs_quantum_gap(maximally_mixed(3), random_unitary(3, rng), random_unitary(3, rng)).max_gap
            for _ in range(100)
        ]
        assert sum(g > 1e-6 for g in gaps) >= 99

    def test_rejects_coherent_input(self):
        with pytest.raises(NonDiagonalInput):
            markov_vs_quantum_gap(momentum_state(2, 0), identity_unitary(2), identity_unitary(2))


class TestZeno:
    def test_epsilon(self):
        D = np.array([[0.9, 0.1], [0.1, 0.9]])
        np.testing.assert_allclose(zeno_epsilon(D), [[0.1, 0.1], [0.1, 0.1]])

    def test_quadratic_scaling(self):
        e1 = zeno_epsilon(ergodic_kernel(1e-3)).max()
        e2 = zeno_epsilon(ergodic_kernel(2e-3)).max()
        assert e2 / e1 == pytest.approx(4.0, rel=1e-2)

    def test_freezing(self):
        rep = zeno_run()
        assert rep.epsilon_max < 1e-5
        for s, drift in enumerate(rep.drift, start=1):
            assert drift < 10 * s * rep.epsilon_max
        assert rep.frozen_mass[-1] > 0.99
        assert sum(rep.frozen_path_probs) == pytest.approx(rep.frozen_mass[-1], abs=1e-15)
        pe = rep.path_entropies
        assert all(b < a for a, b in zip(pe, pe[1:]))
        assert pe[-1] < 0.05

    def test_linear_prediction(self):
        rep = zeno_run(s_max=50)
        D = rep.kernel.data
        x1 = np.array([0.2, 0.3, 0.5])
        for s in (1, 10, 50):
            exact = x1 @ np.linalg.matrix_power(D, s)
            assert np.max(np.abs(rep.linear_prediction[s - 1] - exact)) < (s * rep.epsilon_max) ** 2 * 10

    def test_switching_paths_are_rare(self):
        rep = zeno_run(s_max=4)
        eps = rep.epsilon
        dist = path_distribution(ChainSchedule.homogeneous([0.2, 0.3, 0.5], rep.kernel, 4))
        x1 = (0.2, 0.3, 0.5)
        for a in range(3):
            for b in range(3):
                if a != b:
                    q = dist.probability((a, a, b, b, b))
                    assert q == pytest.approx(x1[a] * eps[a, b], rel=1e-4)

    def test_regime_guard(self):
        with pytest.raises(RegimeViolation):
            zeno_report(ERGODIC_HAMILTONIAN, 0.1, 100, [0.2, 0.3, 0.5])

    def test_zero_step_is_frozen(self):
        rep = zeno_report(ERGODIC_HAMILTONIAN, 0.0, 10, [0.2, 0.3, 0.5])
        assert rep.epsilon_max == 0.0
        assert max(rep.drift) == 0.0
        assert rep.frozen_path_probs == (0.2, 0.3, 0.5)
        assert rep.path_entropies[-1] == pytest.approx(shannon_entropy([0.2, 0.3, 0.5]) / 11)
