import numpy as np
import pytest
from hypothesis import given, strategies as st

from risrank.errors import DimensionError, DomainError, SingularMatrixError
from risrank.numerics import hermitian_eig, logdet2_plus_identity, solve_hermitian

from conftest import crandn, random_psd


class TestHermitianEig:
    def test_identity(self):
        eig = hermitian_eig(np.eye(3))
        np.testing.assert_allclose(eig.eigenvalues, [1, 1, 1])

    def test_diagonal(self):
        eig = hermitian_eig(np.diag([3.0, 1.0, 0.0]))
        np.testing.assert_allclose(eig.eigenvalues, [3, 1, 0], atol=1e-15)
        # eigenvectors are a signed permutation of the identity, here in diagonal order
        np.testing.assert_allclose(np.abs(eig.eigenvectors), np.eye(3), atol=1e-15)

    def test_reconstruction(self, rng):
        A = random_psd(rng, 4)
        eig = hermitian_eig(A)
        scale = np.linalg.norm(A)
        assert np.linalg.norm(eig.reconstruct() - A) < 1e-8 * scale
        assert np.all(np.diff(eig.eigenvalues) <= 0)
        U = eig.eigenvectors
        assert np.linalg.norm(U.conj().T @ U - np.eye(4)) <= 1e-9 * 2
        for k in range(4):
            r = A @ U[:, k] - eig.eigenvalues[k] * U[:, k]
            assert np.linalg.norm(r) <= 1e-9 * scale

    def test_psd_clamp(self, rng):
        A = random_psd(rng, 4, rank=2)
        w = hermitian_eig(A, psd=True).eigenvalues
        assert np.all(w >= 0)
        assert np.count_nonzero(w) == 2

    def test_trace_identity(self, rng):
        for n in range(1, 7):
            A = random_psd(rng, n)
            w = hermitian_eig(A, psd=True).eigenvalues
            assert abs(w.sum() - np.trace(A).real) <= 1e-9 * np.linalg.norm(A)

    def test_deterministic(self, rng):
        A = random_psd(rng, 5)
        a, b = hermitian_eig(A), hermitian_eig(A.copy())
        assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
        assert a.eigenvectors.tobytes() == b.eigenvectors.tobytes()

    def test_errors(self):
        with pytest.raises(DimensionError):
            hermitian_eig(np.ones((2, 3)))
        with pytest.raises(DomainError):
            hermitian_eig(np.array([[1.0, np.nan], [np.nan, 1.0]]))
        with pytest.raises(DomainError):
            hermitian_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestSolveHermitian:
    def test_identity(self, rng):
        b = crandn(rng, 4)
        np.testing.assert_allclose(solve_hermitian(np.eye(4), b), b)

    def test_scalar(self):
        np.testing.assert_allclose(solve_hermitian(2 * np.eye(3), np.ones(3)), [0.5] * 3)

    def test_residual(self, rng):
        for _ in range(20):
            A = random_psd(rng, 5) + 0.1 * np.eye(5)
            b = crandn(rng, 5)
            x = solve_hermitian(A, b)
            assert np.linalg.norm(A @ x - b) <= 1e-8 * np.linalg.norm(A) * np.linalg.norm(x)

    def test_singular(self, rng):
        A = random_psd(rng, 4, rank=2)
        with pytest.raises(SingularMatrixError) as info:
            solve_hermitian(A, np.ones(4))
        assert info.value.smallest_eigenvalue is not None
        assert "smallest eigenvalue" in str(info.value)

    def test_indefinite(self):
        with pytest.raises(SingularMatrixError):
            solve_hermitian(np.diag([1.0, -1.0]), np.ones(2))


class TestLogdet:
    def test_zero(self):
        assert logdet2_plus_identity(np.zeros((3, 3))) == 0.0

    def test_diagonal(self):
        assert logdet2_plus_identity(np.diag([1.0, 3.0])) == pytest.approx(3.0, abs=1e-15)

    def test_against_slogdet(self, rng):
        # independent determinant route: LU-based slogdet of I + A
        for i in range(100):
            n = 1 + i % 6
            A = random_psd(rng, n) * rng.uniform(0.01, 10)
            sign, ld = np.linalg.slogdet(np.eye(n) + A)
            assert sign.real > 0
            ref = ld / np.log(2)
            assert logdet2_plus_identity(A) == pytest.approx(ref, rel=1e-8)

    def test_non_hermitian(self):
        with pytest.raises(DomainError):
            logdet2_plus_identity(np.array([[1.0, 1.0], [0.0, 1.0]]))

    @given(st.lists(st.floats(0, 1e3), min_size=1, max_size=6))
    def test_nonnegative_diag(self, lam):
        v = logdet2_plus_identity(np.diag(lam))
        assert v >= 0
        assert (v == 0) == (max(lam) == 0)
