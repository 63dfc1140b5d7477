import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dstoch.birkhoff import (
    BirkhoffDecomposition,
    decompose,
    hopcroft_karp,
    max_terms,
    recombine,
    reconstruction_error,
    support_permutation,
)
from dstoch.errors import NoPerfectMatching, ValidationError
from dstoch.stochastic import (
    DoublyStochasticMatrix,
    Permutation,
    PermutationMatrix,
    random_doubly_stochastic,
    uniform_matrix,
)

WORKED_D = [[0.1, 0.3, 0.6], [0.4, 0.2, 0.4], [0.5, 0.5, 0.0]]


def brute_force_matching_size(adj, n_right):
    n_left = len(adj)
    for k in range(min(n_left, n_right), 0, -1):
        for lefts in itertools.combinations(range(n_left), k):
            for rights in itertools.permutations(range(n_right), k):
                if all(r in adj[l] for l, r in zip(lefts, rights)):
                    return k
    return 0


class TestMatching:
    @pytest.mark.parametrize("seed", range(30))
    def test_maximum_cardinality_against_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 6))
        adj = [sorted(np.flatnonzero(rng.random(n) < 0.4).tolist()) for _ in range(n)]
        match = hopcroft_karp(adj, n)
        size = sum(v != -1 for v in match)
        assert size == brute_force_matching_size(adj, n)
        used = [v for v in match if v != -1]
        assert len(used) == len(set(used))
        assert all(v in adj[u] for u, v in enumerate(match) if v != -1)

    def test_no_perfect_matching(self):
        m = np.array([[1.0, 0.0], [1.0, 0.0]])
        assert support_permutation(m) is None

    def test_deterministic(self):
        U = uniform_matrix(4).data
        assert support_permutation(U) == support_permutation(U)


class TestDecompose:
    def test_uniform_2x2(self):
        dec = decompose(uniform_matrix(2))
        got = {p.image: w for p, w in dec.terms}
        assert got == {(0, 1): pytest.approx(0.5), (1, 0): pytest.approx(0.5)}

    @pytest.mark.parametrize("image", [(0,), (1, 0), (2, 0, 1), (3, 1, 0, 2)])
    def test_vertex_is_one_term(self, image):
        dec = decompose(PermutationMatrix(image))
        assert len(dec) == 1
        assert dec.terms[0][0].image == image
        assert dec.terms[0][1] == 1.0

    def test_worked_matrix_reconstructs(self):
        dec = decompose(WORKED_D)
        assert reconstruction_error(dec, WORKED_D) < 1e-9
        assert len(dec) <= max_terms(3)

    def test_round_trip_random(self, rng):
        for _ in range(200):
            d = int(rng.integers(1, 7))
            D = random_doubly_stochastic(d, rng)
            dec = decompose(D)
            assert np.max(np.abs(recombine(dec).data - D.data)) < 1e-9
            assert len(dec) <= max_terms(d)
            assert np.all(dec.weights > 0)
            assert abs(dec.weights.sum() - 1) < 1e-9

    def test_sparse_mixtures(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 8))
            D = random_doubly_stochastic(d, rng, k=int(rng.integers(1, 4)))
            dec = decompose(D)
            assert reconstruction_error(dec, D) < 1e-9

    def test_corrupted_residual_is_reported(self):
        # bypasses validation: column sums are (2, 0)
        bad = DoublyStochasticMatrix(np.array([[1.0, 0.0], [1.0, 0.0]]))
        with pytest.raises(NoPerfectMatching):
            decompose(bad)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_properties(self, d, seed):
        D = random_doubly_stochastic(d, np.random.default_rng(seed))
        dec = decompose(D)
        assert reconstruction_error(dec, D) < 1e-9
        assert len(dec) <= max_terms(d)
        assert dec == decompose(D)


class TestRecombine:
    def test_identity(self):
        dec = BirkhoffDecomposition(((Permutation.identity(3), 1.0),), 3)
        np.testing.assert_array_equal(recombine(dec).data, np.eye(3))

    def test_uniform(self):
        dec = BirkhoffDecomposition(((Permutation((0, 1)), 0.5), (Permutation((1, 0)), 0.5)), 2)
        np.testing.assert_array_equal(recombine(dec).data, uniform_matrix(2).data)

    def test_invalid_weights(self):
        with pytest.raises(ValidationError):
            BirkhoffDecomposition(((Permutation((0, 1)), 0.7),), 2)
        with pytest.raises(ValidationError):
            BirkhoffDecomposition(((Permutation((0, 1)), 1.5), (Permutation((1, 0)), -0.5)), 2)
