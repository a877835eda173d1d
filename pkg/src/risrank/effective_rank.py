"""Effective rank of ``H Rx H^H`` and its gradient with respect to the RIS phases.

The effective rank of a PSD matrix with eigenvalues ``lambda`` is
``exp(-sum p_i ln p_i)`` where ``p = lambda / ||lambda||_1`` (``0 ln 0 = 0``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, RisPhases, composite_channel
from .errors import DegenerateInputError
from .numerics import hermitian_eig

ZERO_EIG_RTOL = 1e-14
MIN_TRACE = 1e-300


@dataclass(frozen=True)
class Spectrum:
    lam: np.ndarray  # descending, >= 0
    basis: np.ndarray  # column k pairs with lam[k]
    l1: float

    @property
    def K(self) -> int:
        return self.lam.size


def spectrum(A: np.ndarray) -> Spectrum:
    eig = hermitian_eig(A, psd=True)
    return Spectrum(eig.eigenvalues, eig.eigenvectors, float(np.sum(eig.eigenvalues)))


def weighted_covariance(H: np.ndarray, Rx: np.ndarray) -> np.ndarray:
    """``H Rx H^H``, symmetrized."""
    S = H @ Rx @ H.conj().T
    return 0.5 * (S + S.conj().T)


def _distribution(lam: np.ndarray) -> np.ndarray:
    l1 = lam.sum()
    if not l1 > MIN_TRACE:
        raise DegenerateInputError("effective rank is undefined for a zero matrix")
    return lam / l1


def effective_rank_from_eigenvalues(lam: np.ndarray) -> float:
    lam = np.asarray(lam, dtype=float)
    p = _distribution(lam)
    nz = p > 0
    return float(np.exp(-np.sum(p[nz] * np.log(p[nz]))))


def effective_rank(A: np.ndarray) -> float:
    """Effective rank of a Hermitian PSD matrix, in ``[1, rank(A)]``."""
    return effective_rank_from_eigenvalues(spectrum(A).lam)


def effrank_at(ch: ChannelRealization, phases: RisPhases, Rx: np.ndarray) -> float:
    """Effective rank of ``H Rx H^H`` for the composite channel at ``phases``."""
    H = composite_channel(ch, phases)
    return effective_rank(weighted_covariance(H, Rx))


def effrank_eigen_gradient(sp: Spectrum) -> np.ndarray:
    """``dE/d lambda_k`` for every eigenvalue.

    ``dE/d lambda_k = E * sum_j (-C[j, k] / l1**2) * (1 + ln(lambda_j / l1))``
    with ``C[k, k] = l1 - lambda_k`` and ``C[j, k] = -lambda_j``. Terms with a
    (numerically) zero ``lambda_j`` are dropped.
    """
    lam = sp.lam
    l1 = sp.l1
    if not l1 > MIN_TRACE:
        raise DegenerateInputError("effective rank is undefined for a zero matrix")
    E = effective_rank_from_eigenvalues(lam)
    K = lam.size
    live = lam > ZERO_EIG_RTOL * lam.max()
    log_term = np.zeros(K)
    log_term[live] = 1.0 + np.log(lam[live] / l1)
    C = l1 * np.eye(K) - lam[:, None]
    return -(C * log_term[:, None]).sum(axis=0) * E / l1**2


def eigenvalue_phase_derivatives(
    ch: ChannelRealization, phases: RisPhases, Rx: np.ndarray, sp: Spectrum
) -> np.ndarray:
    """``d lambda_k / d theta_n`` as a ``(K, N)`` array.

    Uses ``d lambda_k = Re{u_k^H (dH Rx H^H + H Rx dH^H) u_k} = 2 Re{u_k^H dH Rx H^H u_k}``
    with ``dH = j e^{j theta_n} H2[:, n] H1[n, :]``, evaluated for all ``n`` at once.
    """
    H = composite_channel(ch, phases)
    U = sp.basis
    A = U.conj().T @ ch.H2  # (K, N): u_k^H H2[:, n]
    B = ch.H1 @ Rx @ H.conj().T @ U  # (N, K): H1[n, :] Rx H^H u_k
    return -2.0 * np.imag(phases.reflection()[None, :] * A * B.T)


def effrank_phase_gradient(
    ch: ChannelRealization, phases: RisPhases, Rx: np.ndarray
) -> np.ndarray:
    """Analytic ``dE/d theta_n`` for ``E = effective_rank(H Rx H^H)``; length ``N``."""
    H = composite_channel(ch, phases)
    sp = spectrum(weighted_covariance(H, Rx))
    dE_dlam = effrank_eigen_gradient(sp)
    dlam_dtheta = eigenvalue_phase_derivatives(ch, phases, Rx, sp)
    return dE_dlam @ dlam_dtheta


def finite_difference_gradient(
    ch: ChannelRealization, phases: RisPhases, Rx: np.ndarray, eps: float = 1e-6
) -> np.ndarray:
    """Central-difference ``dE/d theta_n``; reruns the full pipeline per evaluation."""
    if not 1e-8 <= eps <= 1e-3:
        raise ValueError(f"eps must lie in [1e-8, 1e-3], got {eps}")
    theta = phases.theta
    grad = np.empty(theta.size)
    for n in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[n] += eps
        dn[n] -= eps
        grad[n] = (effrank_at(ch, RisPhases(up), Rx) - effrank_at(ch, RisPhases(dn), Rx)) / (2 * eps)
    return grad


class PhaseObjective:
    """Effective rank as a function of the phases for a fixed ``Rx``.

    Hot-loop version of :func:`effrank_at` / :func:`effrank_phase_gradient`:
    skips input validation and reuses the eigendecomposition of the last
    evaluated point for the gradient.
    """

    def __init__(self, ch: ChannelRealization, Rx: np.ndarray):
        self.ch = ch
        self.Rx = np.asarray(Rx)
        self._H1Rx = ch.H1 @ self.Rx

    def evaluate(self, theta: np.ndarray) -> tuple[float, tuple]:
        """Return ``(E, state)``; pass ``state`` to :meth:`gradient`."""
        ch = self.ch
        phi = np.exp(1j * theta)
        H = ch.G + (ch.H2 * phi) @ ch.H1
        S = H @ self.Rx @ H.conj().T
        w, U = np.linalg.eigh(0.5 * (S + S.conj().T))
        w = w[::-1]
        top = max(w[0], 0.0)
        w = np.where(w < 1e-12 * top, 0.0, w)
        l1 = w.sum()
        if not l1 > MIN_TRACE:
            raise DegenerateInputError("effective rank is undefined for a zero matrix")
        p = w / l1
        nz = p > 0
        E = float(np.exp(-np.sum(p[nz] * np.log(p[nz]))))
        return E, (phi, H, w, U[:, ::-1], l1)

    def gradient(self, state: tuple) -> np.ndarray:
        phi, H, w, U, l1 = state
        dE_dlam = effrank_eigen_gradient(Spectrum(w, U, float(l1)))
        A = U.conj().T @ self.ch.H2
        B = self._H1Rx @ (H.conj().T @ U)
        return dE_dlam @ (-2.0 * np.imag(phi[None, :] * A * B.T))
