import itertools

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from ncvxkit.core import RandomSource
from ncvxkit.exceptions import DeflationError, InvalidInputError
from ncvxkit.tensor import contract, decompose, lrtd_component, tensor_from_components

from oracles import central_difference, naive_tensor_contract


def random_orthonormal(p, r, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((p, r)))
    return Q


class TestTensorFromComponents:
    def test_single_basis_component(self):
        U = np.zeros((2, 1))
        U[0, 0] = 1.0
        T = tensor_from_components(U)
        assert T[0, 0, 0, 0] == 1.0
        assert np.abs(T).sum() == 1.0

    def test_canonical_basis_diagonal(self):
        p = 3
        T = tensor_from_components(np.eye(p))
        for idx in itertools.product(range(p), repeat=4):
            want = 1.0 if len(set(idx)) == 1 else 0.0
            assert T[idx] == want

    def test_symmetry_under_all_permutations(self):
        U = random_orthonormal(4, 2, 0)
        T = tensor_from_components(U)
        for perm in itertools.permutations(range(4)):
            assert np.abs(T - T.transpose(perm)).max() <= 1e-12

    def test_rejects_non_orthonormal(self):
        U = np.ones((3, 2)) / np.sqrt(3)
        with pytest.raises(InvalidInputError):
            tensor_from_components(U)
        with pytest.raises(InvalidInputError):
            tensor_from_components(2.0 * np.eye(3)[:, :1])

    def test_dimension_cap(self):
        with pytest.raises(InvalidInputError):
            tensor_from_components(np.eye(65)[:, :1])


class TestFlatSerialization:
    def test_roundtrip(self):
        from ncvxkit.tensor import tensor_from_flat, tensor_to_flat

        U = random_orthonormal(3, 2, 99)
        T = tensor_from_components(U)
        shape, values = tensor_to_flat(T)
        assert shape == [3, 3, 3, 3]
        back = tensor_from_flat(shape, values)
        assert np.array_equal(back, T)


class TestContract:
    def test_component_alignment(self):
        U = random_orthonormal(5, 2, 1)
        T = tensor_from_components(U)
        assert contract(T, U[:, 0], 0) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vector_annihilates(self):
        U = random_orthonormal(5, 2, 2)
        T = tensor_from_components(U)
        # a vector orthogonal to both components
        Q, _ = np.linalg.qr(np.hstack([U, np.random.default_rng(3).standard_normal((5, 1))]))
        v = Q[:, 2]
        assert abs(contract(T, v, 0)) <= 1e-12
        assert np.abs(contract(T, v, 1)).max() <= 1e-12
        assert np.abs(contract(T, v, 2)).max() <= 1e-12
        assert np.abs(contract(T, v, 3)).max() <= 1e-12

    def test_matches_naive_loops(self):
        rng = np.random.default_rng(4)
        T = rng.standard_normal((4, 4, 4, 4))
        v = rng.standard_normal(4)
        assert abs(contract(T, v, 0) - naive_tensor_contract(T, v, 0)) <= 1e-10
        for holds in (1, 2, 3):
            got = contract(T, v, holds)
            want = naive_tensor_contract(T, v, holds)
            assert np.abs(got - want).max() <= 1e-10

    def test_validation(self):
        T = tensor_from_components(np.eye(3))
        with pytest.raises(InvalidInputError):
            contract(T, np.ones(4), 0)
        with pytest.raises(InvalidInputError):
            contract(T, np.ones(3), 4)


class TestLrtdComponent:
    def test_rank_one_recovery(self):
        U = random_orthonormal(6, 1, 5)
        T = tensor_from_components(U)
        u = lrtd_component(T, 0.02, 0.9, RandomSource(0))
        assert abs(u @ U[:, 0]) >= 0.999

    def test_value_bounded_by_one(self):
        U = random_orthonormal(8, 3, 6)
        T = tensor_from_components(U)
        for seed in range(3):
            u = lrtd_component(T, 0.05, 0.9, RandomSource(seed), restarts=2)
            val = contract(T, u, 0)
            assert -1e-12 <= val <= 1.0 + 1e-12

    def test_seeded_recovery_p8_r3(self):
        hits = 0
        for seed in range(6):
            U = random_orthonormal(8, 3, seed + 10)
            T = tensor_from_components(U)
            u = lrtd_component(T, 0.02, 0.9, RandomSource(seed))
            hits += np.abs(U.T @ u).max() >= 0.99
        assert hits >= 5

    def test_gradient_consistency(self):
        U = random_orthonormal(5, 2, 7)
        T = tensor_from_components(U)
        rand = RandomSource(8)
        from ncvxkit.core import sample_unit_sphere

        for _ in range(5):
            u = sample_unit_sphere(5, rand)
            g = -4.0 * contract(T, u, 1)
            fd = central_difference(lambda x: -contract(T, x, 0), u, h=1e-5)
            assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(fd), 1e-12)

    def test_component_global_optimality_probes(self):
        U = random_orthonormal(6, 2, 9)
        T = tensor_from_components(U)
        rand = RandomSource(10)
        from ncvxkit.core import sample_unit_sphere

        probe_max = max(contract(T, sample_unit_sphere(6, rand), 0) for _ in range(10**4))
        comp_val = contract(T, U[:, 0], 0)
        assert comp_val == pytest.approx(1.0, abs=1e-10)
        assert comp_val >= probe_max - 1e-8

    def test_convex_combination_suboptimal(self):
        U = random_orthonormal(6, 2, 11)
        v = (U[:, 0] + U[:, 1]) / np.sqrt(2)
        T = tensor_from_components(U)
        assert contract(T, v, 0) == pytest.approx(0.5, abs=1e-10)


class TestDecompose:
    def test_rank_one_residual(self):
        U = random_orthonormal(6, 1, 12)
        T = tensor_from_components(U)
        W = decompose(T, 1, RandomSource(1))
        assert abs(abs(W[:, 0] @ U[:, 0]) - 1.0) <= 1e-3
        resid = T - np.einsum("i,j,k,l->ijkl", W[:, 0], W[:, 0], W[:, 0], W[:, 0])
        assert np.abs(resid).max() <= 1e-6

    def test_canonical_basis_full_rank(self):
        p = 4
        T = tensor_from_components(np.eye(p))
        W = decompose(T, p, RandomSource(2))
        M = np.abs(W.T @ np.eye(p))
        ri, ci = linear_sum_assignment(-M)
        assert M[ri, ci].min() >= 0.99

    def test_seeded_decomposition_p8_r3(self):
        hits = 0
        for seed in range(4):
            U = random_orthonormal(8, 3, seed + 20)
            T = tensor_from_components(U)
            W = decompose(T, 3, RandomSource(seed))
            M = np.abs(U.T @ W)
            ri, ci = linear_sum_assignment(-M)
            hits += M[ri, ci].min() >= 0.99
        assert hits >= 4

    def test_deflation_residual_drop(self):
        U = random_orthonormal(8, 3, 30)
        T = tensor_from_components(U)
        u = lrtd_component(T, 0.02, 0.9, RandomSource(3))
        overlap = np.abs(U.T @ u).max()
        assert overlap >= 0.99
        T2 = T - np.einsum("i,j,k,l->ijkl", u, u, u, u)
        assert contract(T2, u, 0) <= 1e-2

    def test_repeated_component_triggers_deflation_error(self):
        # a weighted repeat of one direction: the second round rediscovers
        # the first component
        u = np.zeros(5)
        u[1] = 1.0
        T = 1.5 * np.einsum("i,j,k,l->ijkl", u, u, u, u)
        with pytest.raises(DeflationError):
            decompose(T, 2, RandomSource(4))

    def test_orthonormal_output_and_determinism(self):
        U = random_orthonormal(8, 3, 31)
        T = tensor_from_components(U)
        W1 = decompose(T, 3, RandomSource(5))
        W2 = decompose(T, 3, RandomSource(5))
        assert np.array_equal(W1, W2)
        assert np.abs(W1.T @ W1 - np.eye(3)).max() <= 1e-8
        # sign convention: first nonzero coordinate positive
        for col in W1.T:
            nz = np.flatnonzero(np.abs(col) > 1e-12)
            assert col[nz[0]] > 0
