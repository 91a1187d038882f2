"""Symmetric-operator algebra: oracle-checked values and random identities."""

import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracegrowth.symop import (
    Definiteness,
    SymOp,
    elementary_symmetric,
    elementary_symmetric_table,
    identity_suite,
    newton_operator,
    numeric_rank,
    rank_bound_witness,
    restricted_symmetric,
    semidefinite_class,
    trace_identities,
    vanishing_symmetric_sample,
)


def brute_force_symmetric(values, j):
    """Oracle: S_j as an explicit sum over all j-element subsets."""
    return sum(np.prod(combo) for combo in itertools.combinations(values, j)) if j else 1.0


class TestElementarySymmetric:
    def test_two_subsets_of_small_spectrum(self):
        # Oracle: 1*2 + 1*3 + 2*3 = 11.
        assert elementary_symmetric([1.0, 2.0, 3.0], 2) == pytest.approx(11.0)
        assert brute_force_symmetric([1.0, 2.0, 3.0], 2) == pytest.approx(11.0)

    def test_empty_product_convention(self):
        assert elementary_symmetric([1.0, 1.0, 1.0], 0) == 1.0

    def test_full_product(self):
        # Oracle: the product of all eigenvalues, 1*2*3 = 6.
        assert elementary_symmetric([1.0, 2.0, 3.0], 3) == pytest.approx(6.0)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            elementary_symmetric([1.0, 2.0], 3)
        with pytest.raises(ValueError):
            elementary_symmetric([1.0, 2.0], -1)

    def test_matches_brute_force_on_random_spectra(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            m = int(rng.integers(2, 7))
            values = rng.uniform(-2, 2, size=m)
            for j in range(m + 1):
                assert elementary_symmetric(values, j) == pytest.approx(
                    brute_force_symmetric(values, j), abs=1e-12, rel=1e-10
                )

    def test_table_is_batched(self):
        vals = np.array([[1.0, 2.0, 3.0], [0.0, 1.0, -1.0]])
        table = elementary_symmetric_table(vals)
        assert table.shape == (2, 4)
        assert table[0].tolist() == pytest.approx([1.0, 6.0, 11.0, 6.0])
        assert table[1].tolist() == pytest.approx([1.0, 0.0, -1.0, 0.0])


class TestRestrictedSymmetric:
    def test_first_eigenvalue_deleted(self):
        # Oracle: remaining {2, 3}, S_1 = 5.
        assert restricted_symmetric([1.0, 2.0, 3.0], 0, 1) == pytest.approx(5.0)

    def test_zeroth_polynomial_convention(self):
        assert restricted_symmetric([1.0, 2.0, 3.0], 1, 0) == 1.0

    def test_last_eigenvalue_deleted(self):
        # Oracle: remaining {1, 2}, S_2 = 2.
        assert restricted_symmetric([1.0, 2.0, 3.0], 2, 2) == pytest.approx(2.0)

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            restricted_symmetric([1.0, 2.0], 2, 0)
        with pytest.raises(ValueError):
            restricted_symmetric([1.0, 2.0], 0, 2)


class TestNewtonOperator:
    def test_identity_operator(self):
        p1 = newton_operator(SymOp.identity(3), 1)
        np.testing.assert_allclose(p1.entries, 2.0 * np.eye(3), atol=1e-14)

    def test_diagonal_example(self):
        # Oracle: eigenvalue of P_1 on e_k is S_1 with the k-th entry deleted.
        T = SymOp.from_matrix(np.diag([1.0, 2.0, 3.0]))
        p1 = newton_operator(T, 1)
        np.testing.assert_allclose(p1.entries, np.diag([5.0, 4.0, 3.0]), atol=1e-12)

    def test_top_newton_operator_is_traceless(self):
        T = SymOp.from_matrix(np.diag([1.0, 2.0, 3.0]))
        p3 = newton_operator(T, 3)
        assert np.trace(p3.entries) == pytest.approx(0.0, abs=1e-10)

    def test_commutes_with_argument(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            m = int(rng.integers(2, 7))
            T = SymOp.from_matrix(rng.uniform(-1, 1, size=(m, m)))
            for j in range(m + 1):
                p = newton_operator(T, j)
                comm = np.linalg.norm(p @ T - T @ p)
                assert comm <= 1e-9 * (1.0 + T.norm() ** (j + 1))

    def test_entries_are_exactly_symmetric(self):
        rng = np.random.default_rng(11)
        T = SymOp.from_matrix(rng.uniform(-1, 1, size=(5, 5)))
        p = newton_operator(T, 3)
        assert np.array_equal(p.entries, p.entries.T)


class TestTraceIdentities:
    def test_diagonal_oracle_values(self):
        # P_1 = diag(5, 4, 3); oracle traces: tr(T P_1) = 5 + 8 + 9 = 22 = 2 S_2,
        # tr(T^2 P_1) = 5 + 16 + 27 = 48 = S_1 S_2 - 3 S_3 = 66 - 18.
        T = SymOp.from_matrix(np.diag([1.0, 2.0, 3.0]))
        res = trace_identities(T, 1)
        assert res.r_c == pytest.approx(0.0, abs=1e-12)
        assert res.r_d == pytest.approx(0.0, abs=1e-12)

    def test_zero_operator(self):
        res = trace_identities(SymOp.from_matrix(np.zeros((4, 4))), 2)
        assert res.max() == 0.0

    def test_top_index_uses_vanishing_tail_convention(self):
        # At j = m - 1 the S_{j+2} term falls outside 0..m and must read 0.
        T = SymOp.from_matrix(np.diag([1.0, -1.0, 2.0]))
        res = trace_identities(T, 2)
        assert res.max() <= 1e-12

    def test_rejects_out_of_range_index(self):
        T = SymOp.identity(3)
        with pytest.raises(ValueError):
            trace_identities(T, 0)
        with pytest.raises(ValueError):
            trace_identities(T, 3)

    @settings(deadline=None, max_examples=60)
    @given(
        data=st.lists(st.floats(-1, 1), min_size=4, max_size=36),
        seed=st.integers(0, 2**31),
    )
    def test_random_operators_satisfy_identities(self, data, seed):
        m = max(2, min(6, int(np.sqrt(len(data)))))
        rng = np.random.default_rng(seed)
        mat = np.zeros((m, m))
        flat = (data * (m * m))[: m * m]
        mat.ravel()[:] = flat
        T = SymOp.from_matrix(mat + rng.uniform(-0.1, 0.1, size=(m, m)))
        for j in range(1, m):
            assert trace_identities(T, j).max() <= 1e-9


class TestSemidefiniteClass:
    def test_indefinite_newton_operator(self):
        # T = diag(1, -1): S_2 = -1 != 0 and P_1 = diag(-1, 1).
        T = SymOp.from_matrix(np.diag([1.0, -1.0]))
        p1 = newton_operator(T, 1)
        np.testing.assert_allclose(p1.entries, np.diag([-1.0, 1.0]), atol=1e-14)
        assert semidefinite_class(p1, 1e-9) is Definiteness.INDEFINITE

    def test_semidefinite_when_next_polynomial_vanishes(self):
        # T = diag(1, 0): S_2 = 0 and P_1 = diag(0, 1).
        T = SymOp.from_matrix(np.diag([1.0, 0.0]))
        p1 = newton_operator(T, 1)
        assert semidefinite_class(p1, 1e-9) is Definiteness.POSITIVE_SEMI

    def test_identity_yields_positive_newton_operators(self):
        T = SymOp.identity(4)
        for j in range(1, 4):
            assert semidefinite_class(newton_operator(T, j), 1e-9) is Definiteness.POSITIVE_SEMI

    def test_negative_branch(self):
        assert semidefinite_class(SymOp.from_matrix(-np.eye(3)), 0.0) is Definiteness.NEGATIVE_SEMI


class TestRankBoundWitness:
    def test_nonvanishing_polynomial_short_circuits(self):
        T = SymOp.from_matrix(np.diag([1.0, 0.0, 0.0]))
        assert rank_bound_witness(T, 2, 1e-10)

    def test_rank_one_operator(self):
        # Oracle: with one nonzero eigenvalue every subset of size >= 2 has a
        # zero factor, so S_2 = S_3 = 0 while rank = 1 = j - 2.
        T = SymOp.from_matrix(np.diag([0.7, 0.0, 0.0, 0.0]))
        assert brute_force_symmetric([0.7, 0, 0, 0], 2) == 0.0
        assert brute_force_symmetric([0.7, 0, 0, 0], 3) == 0.0
        assert numeric_rank(T) == 1
        assert rank_bound_witness(T, 3, 1e-10)

    def test_zero_operator(self):
        T = SymOp.from_matrix(np.zeros((5, 5)))
        for j in range(2, 6):
            assert rank_bound_witness(T, j, 1e-10)

    def test_random_instances_never_violate(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            m = int(rng.integers(2, 7))
            T = SymOp.from_matrix(rng.uniform(-1, 1, size=(m, m)))
            for j in range(2, m + 1):
                assert rank_bound_witness(T, j, 1e-8)


class TestConditionedSampling:
    def test_constraint_is_exactly_solved(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            m = int(rng.integers(2, 7))
            j = int(rng.integers(1, m))
            T = vanishing_symmetric_sample(rng, m, j)
            lam = T.spectrum().eigenvalues
            scale = 1.0 + float(np.abs(lam).max()) ** (j + 1)
            assert abs(brute_force_symmetric(lam, j + 1)) <= 1e-10 * scale

    def test_conditioned_newton_operators_are_semidefinite(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            m = int(rng.integers(2, 7))
            j = int(rng.integers(1, m))
            T = vanishing_symmetric_sample(rng, m, j)
            cls = semidefinite_class(newton_operator(T, j), 1e-9)
            assert cls is not Definiteness.INDEFINITE


class TestRestrictionEigenvalueLaw:
    @settings(deadline=None, max_examples=60)
    @given(seed=st.integers(0, 2**31), dim=st.integers(2, 6))
    def test_newton_action_on_eigenvectors(self, seed, dim):
        rng = np.random.default_rng(seed)
        T = SymOp.from_matrix(rng.uniform(-1, 1, size=(dim, dim)))
        spec = T.spectrum()
        scale = 1.0 + T.norm() ** dim
        for j in range(dim):
            p = newton_operator(T, j)
            for k in range(dim):
                vec = spec.eigenvectors[:, k]
                value = float(vec @ (p.entries @ vec))
                assert abs(value - restricted_symmetric(spec, k, j)) <= 1e-8 * scale


class TestIdentitySuite:
    def test_suite_aggregates_and_is_fast(self):
        start = time.perf_counter()
        report = identity_suite(seed=1, count=300, dims=range(2, 7))
        elapsed = time.perf_counter() - start
        assert report["max_trace_identity_residual"] <= 1e-9
        assert report["max_restriction_eigenvalue_residual"] <= 1e-8
        assert report["conditioned_indefinite_count"] == 0
        assert report["rank_witness_failures"] == 0
        assert elapsed < 10.0

    def test_suite_rejects_empty_count(self):
        with pytest.raises(ValueError):
            identity_suite(seed=1, count=0, dims=[2])

    def test_suite_is_deterministic(self):
        a = identity_suite(seed=5, count=40, dims=[2, 3])
        b = identity_suite(seed=5, count=40, dims=[2, 3])
        assert a == b
