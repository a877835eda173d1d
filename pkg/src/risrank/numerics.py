"""Dense complex-matrix primitives.

Everything here operates on small ``numpy`` arrays (a few tens of rows at
most). Hermitian eigendecompositions are returned in *descending* order so
that index ``k`` means the same eigenvalue everywhere downstream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, SingularMatrixError

HERMITIAN_RTOL = 1e-10
PSD_CLAMP_RTOL = 1e-12


@dataclass(frozen=True)
class HermitianEig:
    """Eigenpairs of a Hermitian matrix, eigenvalues sorted descending.

    Column ``k`` of ``eigenvectors`` pairs with ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


def _check_square(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def _check_hermitian(A: np.ndarray) -> np.ndarray:
    A = _check_square(A)
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.conj().T) > HERMITIAN_RTOL * scale:
        raise DomainError("matrix is not Hermitian")
    return 0.5 * (A + A.conj().T)


def hermitian_eig(A: np.ndarray, psd: bool = False) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    A : (n, n) array_like
        Hermitian within ``1e-10 * ||A||_F``; it is symmetrized first.
    psd : bool
        If true, eigenvalues below ``1e-12 * lambda_max`` (including
        negative round-off) are set to zero.
    """
    A = _check_hermitian(A)
    w, U = np.linalg.eigh(A)
    w = w[::-1].copy()
    U = U[:, ::-1].copy()
    if psd:
        top = w[0] if w.size else 0.0
        w[w < PSD_CLAMP_RTOL * max(top, 0.0)] = 0.0
    return HermitianEig(w, U)


def solve_hermitian(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` for Hermitian positive definite ``A``."""
    A = _check_hermitian(A)
    b = np.asarray(b)
    if b.shape[0] != A.shape[0]:
        raise DimensionError(f"rhs length {b.shape[0]} does not match {A.shape}")
    w = np.linalg.eigvalsh(A)
    if w[0] <= 1e-12 * np.linalg.norm(A):
        raise SingularMatrixError(
            f"matrix is not positive definite (smallest eigenvalue {w[0]:.3e})",
            smallest_eigenvalue=float(w[0]),
        )
    L = np.linalg.cholesky(A)
    y = np.linalg.solve(L, b)
    return np.linalg.solve(L.conj().T, y)


def logdet2_plus_identity(A: np.ndarray) -> float:
    """``log2 |I + A|`` for Hermitian PSD ``A``, via its eigenvalues (bits)."""
    lam = hermitian_eig(A, psd=True).eigenvalues
    return float(np.sum(np.log1p(lam)) / np.log(2.0))
