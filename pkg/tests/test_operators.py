import numpy as np
import pytest

from istalab import (
    DenseOperator,
    DimensionMismatchError,
    EnumerationBudgetError,
    PowerIterationError,
    fbi_check,
    load_matrix,
    load_vector,
    operator_norm_sq,
    operator_norm_sq_dense,
    save_matrix,
    save_vector,
    spectral_report,
)


class TestApply:
    def test_identity(self):
        K = DenseOperator.identity(2)
        np.testing.assert_array_equal(K.apply([3.0, -1.0]), [3.0, -1.0])

    def test_hand_product(self):
        K = DenseOperator([[1.0, 2.0], [0.0, 1.0]])
        np.testing.assert_array_equal(K.apply([1.0, 1.0]), [3.0, 1.0])

    def test_zero_operator(self):
        K = DenseOperator.zeros(2, 2)
        np.testing.assert_array_equal(K.apply([5.0, 7.0]), [0.0, 0.0])

    def test_dimension_mismatch(self):
        K = DenseOperator.zeros(3, 2)
        with pytest.raises(DimensionMismatchError, match="length-2"):
            K.apply([1.0, 2.0, 3.0])
        with pytest.raises(DimensionMismatchError, match="length-3"):
            K.adjoint_apply([1.0, 2.0])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            DenseOperator([[1.0, np.inf]])

    def test_entries_immutable(self):
        K = DenseOperator.identity(2)
        with pytest.raises(ValueError):
            K.entries[0, 0] = 5.0


class TestAdjoint:
    def test_shift_transpose(self):
        K = DenseOperator([[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_array_equal(K.adjoint_apply([1.0, 0.0]), [0.0, 1.0])

    def test_identity_fixed(self, rng):
        K = DenseOperator.identity(3)
        y = rng.standard_normal(3)
        np.testing.assert_array_equal(K.adjoint_apply(y), y)

    def test_adjoint_identity_random(self, rng):
        # <Ku, y> == <u, K*y> for 100 random triples
        for _ in range(100):
            rows, cols = rng.integers(1, 9, size=2)
            K = DenseOperator(rng.standard_normal((rows, cols)))
            u = rng.standard_normal(cols)
            y = rng.standard_normal(rows)
            lhs = K.apply(u) @ y
            rhs = u @ K.adjoint_apply(y)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))

    def test_double_adjoint(self, rng):
        K = DenseOperator(rng.standard_normal((4, 3)))
        np.testing.assert_array_equal(K.adjoint().adjoint().entries, K.entries)


class TestOperatorNormSq:
    def test_diagonal(self):
        K = DenseOperator.diagonal([3.0, 1.0])
        assert operator_norm_sq(K, tol=1e-12) == pytest.approx(9.0, rel=1e-9)

    def test_identity(self):
        K = DenseOperator.identity(5)
        assert operator_norm_sq(K) == pytest.approx(1.0, rel=1e-12)

    def test_zero_operator(self):
        assert operator_norm_sq(DenseOperator.zeros(3, 4)) == 0.0

    def test_kernel_start_fallback(self):
        # the all-ones start vector lies in the kernel of this Gram matrix
        K = DenseOperator([[1.0, -1.0]])
        assert operator_norm_sq(K, tol=1e-12) == pytest.approx(2.0, rel=1e-9)

    def test_matches_dense_oracle(self, rng):
        K = DenseOperator(rng.standard_normal((6, 6)))
        exact = operator_norm_sq_dense(K)
        assert operator_norm_sq(K, tol=1e-12) == pytest.approx(exact, rel=1e-8)

    def test_norm_bounds_image(self, rng):
        K = DenseOperator(rng.standard_normal((5, 7)))
        lam = operator_norm_sq(K, tol=1e-10)
        for _ in range(50):
            u = rng.standard_normal(7)
            assert np.linalg.norm(K.apply(u)) ** 2 <= lam * np.linalg.norm(u) ** 2 * (1 + 1e-8)

    def test_budget_error_carries_estimate(self):
        K = DenseOperator.diagonal([2.0, 1.0])
        with pytest.raises(PowerIterationError) as exc:
            operator_norm_sq(K, tol=1e-16, max_iters=1)
        assert 0.0 < exc.value.last_estimate <= 4.0

    def test_deterministic(self, rng):
        K = DenseOperator(rng.standard_normal((8, 8)))
        assert operator_norm_sq(K) == operator_norm_sq(K)


class TestSpectralReport:
    def test_diagonal_case(self):
        K = DenseOperator.diagonal([2.0, 1.0, 0.5])
        rep = spectral_report(K, k_max=3)
        assert rep.sigma[0] == np.inf
        assert rep.sigma[2] == pytest.approx(1.0)  # eigenvalues {4, 1} of the head Gram
        assert rep.mu[1] == pytest.approx(1.0)
        assert rep.operator_norm_sq == pytest.approx(4.0)

    def test_identity(self):
        rep = spectral_report(DenseOperator.identity(4), k_max=4)
        assert rep.sigma[0] == np.inf
        assert all(s == pytest.approx(1.0) for s in rep.sigma[1:])
        assert all(m == pytest.approx(1.0) for m in rep.mu)

    def test_matches_gram_eig_oracle(self, rng):
        # decaying columns, compare against direct Gram eigendecompositions
        A = rng.standard_normal((5, 5)) * (0.5 ** np.arange(5))
        K = DenseOperator(A)
        rep = spectral_report(K, k_max=5)
        for k in range(2, 6):
            head = A[:, : k - 1]
            expect = np.linalg.eigvalsh(head.T @ head)[0]
            assert rep.sigma[k - 1] == pytest.approx(expect, abs=1e-12)
        for k in range(1, 6):
            tail = A[:, k - 1 :]
            expect = np.linalg.eigvalsh(tail.T @ tail)[-1]
            assert rep.mu[k - 1] == pytest.approx(expect, abs=1e-12)

    def test_k_max_range(self):
        K = DenseOperator.identity(3)
        with pytest.raises(ValueError, match="k_max"):
            spectral_report(K, k_max=0)
        with pytest.raises(ValueError, match="k_max"):
            spectral_report(K, k_max=4)


class TestFbiCheck:
    def test_identity_passes(self):
        rep = fbi_check(DenseOperator.identity(3), order=2)
        assert rep.passes
        assert all(v == pytest.approx(1.0) for v in rep.min_singular_by_support.values())
        # sizes 1 and 2 both enumerated
        assert (0,) in rep.min_singular_by_support
        assert (0, 2) in rep.min_singular_by_support

    def test_duplicate_columns_fail(self):
        A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        rep = fbi_check(DenseOperator(A), order=2)
        assert not rep.passes
        assert rep.min_singular_by_support[(0, 1)] == pytest.approx(0.0, abs=1e-12)

    def test_zero_column_always_fails(self):
        A = np.array([[1.0, 0.0], [0.0, 0.0]])
        for order in (1, 2):
            rep = fbi_check(DenseOperator(A), order=order)
            assert not rep.passes
            assert rep.min_singular_by_support[(1,)] == 0.0

    def test_values_match_svd_oracle(self, rng):
        import itertools

        A = rng.standard_normal((6, 4))
        rep = fbi_check(DenseOperator(A), order=3)
        assert rep.passes
        for size in (1, 2, 3):
            for subset in itertools.combinations(range(4), size):
                expect = np.linalg.svd(A[:, subset], compute_uv=False)[-1]
                assert rep.min_singular_by_support[subset] == pytest.approx(expect, rel=1e-12)

    def test_budget_exceeded(self, rng):
        K = DenseOperator(rng.standard_normal((4, 30)))
        with pytest.raises(EnumerationBudgetError, match="supports"):
            fbi_check(K, order=5)

    def test_explicit_supports(self, rng):
        A = rng.standard_normal((4, 30))
        rep = fbi_check(DenseOperator(A), order=5, supports=[(0, 3, 7), (1, 2)])
        assert set(rep.min_singular_by_support) == {(0, 3, 7), (1, 2)}


class TestCsvIo:
    def test_matrix_round_trip(self, tmp_path, rng):
        arr = rng.standard_normal((4, 3))
        path = tmp_path / "m.csv"
        save_matrix(path, arr)
        np.testing.assert_array_equal(load_matrix(path), arr)

    def test_header_autodetect(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("a,b\n1.0,2.0\n3.0,4.0\n")
        np.testing.assert_array_equal(load_matrix(path), [[1.0, 2.0], [3.0, 4.0]])

    def test_vector_round_trip(self, tmp_path, rng):
        vec = rng.standard_normal(6)
        path = tmp_path / "v.csv"
        save_vector(path, vec)
        np.testing.assert_array_equal(load_vector(path), vec)

    def test_vector_rejects_matrix(self, tmp_path):
        path = tmp_path / "m.csv"
        save_matrix(path, np.eye(2))
        with pytest.raises(ValueError, match="single row or column"):
            load_vector(path)

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(ValueError, match="ragged"):
            load_matrix(path)
