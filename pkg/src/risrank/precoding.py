"""Linear precoders, water-filling and input covariance construction.

Convention: ``H`` is ``(K, M)`` and user ``k``'s channel ``h_k`` is row ``k``.
Precoders are stored as the columns of an ``(M, K)`` array.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError
from .numerics import solve_hermitian

SCHEMES = ("UPA", "WF", "MRT-WF", "MMSE-WF")


@dataclass(frozen=True)
class PrecoderSet:
    vectors: np.ndarray  # (M, K), unit-norm columns
    powers: np.ndarray  # (K,)
    sigma2: float

    def __post_init__(self):
        if self.vectors.shape[1] != self.powers.size:
            raise DimensionError(
                f"{self.vectors.shape[1]} precoders but {self.powers.size} powers"
            )

    @property
    def gamma(self) -> np.ndarray:
        """Per-user transmit SNR ``p_k / sigma2``."""
        return self.powers / self.sigma2

    @property
    def K(self) -> int:
        return self.powers.size


@dataclass(frozen=True)
class InputCovariance:
    Rx: np.ndarray  # (M, M) Hermitian PSD
    trace_budget: float

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.Rx)))


def _row(H: np.ndarray, k: int) -> np.ndarray:
    if not 0 <= k < H.shape[0]:
        raise IndexError(f"user index {k} out of range for K={H.shape[0]}")
    return H[k]


def mrt_precoder(H: np.ndarray, k: int) -> np.ndarray:
    """``h_k^H / ||h_k||``."""
    h = _row(H, k)
    norm = np.linalg.norm(h)
    if norm == 0.0:
        raise DegenerateInputError(f"user {k} has a zero channel")
    return h.conj() / norm


def mmse_precoder(H: np.ndarray, k: int, gamma_k: float) -> np.ndarray:
    """Normalized ``(H^H H + I / gamma_k)^{-1} h_k^H``."""
    if not gamma_k > 0:
        raise ValueError(f"gamma_k must be positive, got {gamma_k}")
    h = _row(H, k)
    A = H.conj().T @ H + np.eye(H.shape[1]) / gamma_k
    w = solve_hermitian(A, h.conj())
    norm = np.linalg.norm(w)
    if norm == 0.0:
        raise DegenerateInputError(f"user {k} has a zero channel")
    return w / norm


def waterfill(gains, Pt: float, sigma2: float) -> np.ndarray:
    """Powers ``p_k = max(0, mu - sigma2 / g_k)`` summing to ``Pt``.

    The water level ``mu`` is found exactly from the sorted inverse-gain
    floors. Zero gains get zero power.
    """
    g = np.asarray(gains, dtype=float)
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise ValueError("gains must be finite and nonnegative")
    if not Pt > 0 or not sigma2 > 0:
        raise ValueError("Pt and sigma2 must be positive")
    pos = np.flatnonzero(g > 0)
    if pos.size == 0:
        raise DegenerateInputError("all gains are zero")
    floors = sigma2 / g[pos]
    order = np.argsort(floors, kind="stable")
    f = floors[order]
    csum = np.cumsum(f)
    m = np.arange(1, f.size + 1)
    levels = (Pt + csum) / m
    # largest active count whose water level clears its own floor
    n_active = int(np.flatnonzero(levels > f)[-1]) + 1
    mu = levels[n_active - 1]
    p = np.zeros_like(g)
    p[pos] = np.maximum(mu - floors, 0.0)
    return p


def water_level(gains, powers, sigma2: float) -> float:
    """Recover ``mu`` from an allocation (mean over active users)."""
    g = np.asarray(gains, dtype=float)
    p = np.asarray(powers, dtype=float)
    active = p > 0
    return float(np.mean(p[active] + sigma2 / g[active]))


def assemble_covariance(pre: PrecoderSet, Pt: float | None = None) -> InputCovariance:
    """``Rx = sum_k p_k v_k v_k^H``."""
    V = pre.vectors
    Rx = (V * pre.powers) @ V.conj().T
    Rx = 0.5 * (Rx + Rx.conj().T)
    budget = float(np.sum(pre.powers)) if Pt is None else float(Pt)
    return InputCovariance(Rx, budget)


def upa_covariance(M: int, Pt: float) -> InputCovariance:
    """Uniform power over all transmit antennas, ``(Pt / M) I``."""
    return InputCovariance(np.eye(M, dtype=complex) * (Pt / M), float(Pt))


def eigen_waterfill_covariance(H: np.ndarray, Pt: float, sigma2: float) -> InputCovariance:
    """Capacity-achieving covariance for a fixed ``H``: water-filling over its eigenmodes."""
    _, s, Vh = np.linalg.svd(H)
    if not np.any(s > 0):
        raise DegenerateInputError("channel is identically zero")
    p = waterfill(s**2, Pt, sigma2)
    V = Vh[: s.size].conj().T
    Rx = (V * p) @ V.conj().T
    return InputCovariance(0.5 * (Rx + Rx.conj().T), float(Pt))


def precoders(H: np.ndarray, scheme: str, powers: np.ndarray, sigma2: float) -> np.ndarray:
    """Precoder columns for ``"MRT-WF"`` or ``"MMSE-WF"`` given current powers.

    For MMSE a user with zero power has no defined ``gamma_k``; it gets the
    ``gamma -> 0`` limit of the MMSE direction, which is the MRT direction.
    """
    K, M = H.shape
    V = np.empty((M, K), dtype=complex)
    for k in range(K):
        if scheme == "MRT-WF" or powers[k] <= 0:
            V[:, k] = mrt_precoder(H, k)
        elif scheme == "MMSE-WF":
            V[:, k] = mmse_precoder(H, k, powers[k] / sigma2)
        else:
            raise ValueError(f"no per-user precoder for scheme {scheme!r}")
    return V


def precoder_gains(H: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Matched gains ``|h_k v_k|^2`` (``||h_k||^2`` for MRT)."""
    return np.abs(np.einsum("km,mk->k", H, V)) ** 2
