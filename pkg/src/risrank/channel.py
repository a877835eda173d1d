"""Channel realizations and the composite RIS channel ``H = G + H2 diag(e^{j theta}) H1``.

User ``k``'s channel is row ``k`` of ``H`` (a ``1 x M`` vector).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SystemDims:
    M: int  # BS antennas
    K: int  # single-antenna users
    N: int  # RIS elements

    def __post_init__(self):
        for name in ("M", "K", "N"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DimensionError(f"{name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the three link matrices.

    Attributes
    ----------
    H1 : (N, M) complex ndarray
        BS to RIS.
    H2 : (K, N) complex ndarray
        RIS to users; row ``k`` is user ``k``.
    G : (K, M) complex ndarray
        Direct BS to users link, all-zero when disabled.
    seed : int or None
        Provenance only.
    """

    H1: np.ndarray
    H2: np.ndarray
    G: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        N, M = self.H1.shape
        K, N2 = self.H2.shape
        if N2 != N or self.G.shape != (K, M):
            raise DimensionError(
                f"inconsistent shapes H1={self.H1.shape} H2={self.H2.shape} G={self.G.shape}"
            )
        for name in ("H1", "H2", "G"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DimensionError(f"{name} has non-finite entries")

    @property
    def dims(self) -> SystemDims:
        N, M = self.H1.shape
        return SystemDims(M=M, K=self.H2.shape[0], N=N)


@dataclass(frozen=True)
class RisPhases:
    """RIS phase vector in radians.

    Values are kept unwrapped during optimization; call :meth:`wrapped` to
    get the canonical representative in ``[0, 2*pi)``.
    """

    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float).reshape(-1))

    @property
    def N(self) -> int:
        return self.theta.size

    def wrapped(self) -> "RisPhases":
        t = np.mod(self.theta, TWO_PI)
        t[t >= TWO_PI] = 0.0  # mod can round up to exactly 2*pi
        return RisPhases(t)

    def reflection(self) -> np.ndarray:
        """Diagonal of Phi, i.e. ``exp(1j * theta)``."""
        return np.exp(1j * self.theta)

    @classmethod
    def zeros(cls, N: int) -> "RisPhases":
        return cls(np.zeros(N))

    @classmethod
    def random(cls, N: int, rng: np.random.Generator) -> "RisPhases":
        return cls(rng.uniform(0.0, TWO_PI, size=N))


def child_seeds(master_seed: int, realization: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Independent (channel, phase-init) seed sequences for one realization.

    Derived only from ``(master_seed, realization)``, so any execution order
    reproduces the same streams.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(realization),))
    chan, init = ss.spawn(2)
    return chan, init


def _crandn(rng: np.random.Generator, shape) -> np.ndarray:
    # CN(0, 1): real and imaginary parts each N(0, 1/2)
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def sample_rayleigh(
    dims: SystemDims,
    direct_link: bool,
    rng: np.random.Generator,
    seed: Optional[int] = None,
) -> ChannelRealization:
    """Draw i.i.d. CN(0, 1) entries for ``H1``, ``H2`` and (optionally) ``G``."""
    M, K, N = dims.M, dims.K, dims.N
    H1 = _crandn(rng, (N, M))
    H2 = _crandn(rng, (K, N))
    if direct_link:
        G = _crandn(rng, (K, M))
    else:
        G = np.zeros((K, M), dtype=complex)
    return ChannelRealization(H1, H2, G, seed=seed)


def _check_phases(ch: ChannelRealization, phases: RisPhases) -> None:
    if phases.N != ch.H1.shape[0]:
        raise DimensionError(f"{phases.N} phases for an RIS with {ch.H1.shape[0]} elements")


def composite_channel(ch: ChannelRealization, phases: RisPhases) -> np.ndarray:
    """``H = G + H2 diag(e^{j theta}) H1`` of shape ``(K, M)``."""
    _check_phases(ch, phases)
    return ch.G + (ch.H2 * phases.reflection()) @ ch.H1


def channel_phase_derivative(ch: ChannelRealization, phases: RisPhases, n: int) -> np.ndarray:
    """``dH/d theta_n``, the rank-one matrix ``j e^{j theta_n} H2[:, n] H1[n, :]``.

    ``n`` is a zero-based element index.
    """
    _check_phases(ch, phases)
    if not 0 <= n < phases.N:
        raise IndexError(f"element index {n} out of range for N={phases.N}")
    coeff = np.exp(1j * (phases.theta[n] + np.pi / 2))
    return coeff * np.outer(ch.H2[:, n], ch.H1[n, :])


# -- JSON dump / load ---------------------------------------------------------

def _encode(A: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def _decode(rows: list) -> np.ndarray:
    a = np.array(rows, dtype=float)
    if a.ndim != 3 or a.shape[-1] != 2:
        raise ValueError("expected a matrix of [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def channel_to_dict(ch: ChannelRealization) -> dict:
    d = ch.dims
    return {
        "schema_version": 1,
        "dims": {"M": d.M, "K": d.K, "N": d.N},
        "seed": ch.seed,
        "H1": _encode(ch.H1),
        "H2": _encode(ch.H2),
        "G": _encode(ch.G),
    }


def channel_from_dict(obj: dict) -> ChannelRealization:
    dims = SystemDims(**obj["dims"])
    ch = ChannelRealization(
        _decode(obj["H1"]), _decode(obj["H2"]), _decode(obj["G"]), seed=obj.get("seed")
    )
    if ch.dims != dims:
        raise DimensionError(f"header dims {dims} disagree with matrices {ch.dims}")
    return ch


def dump_channel(ch: ChannelRealization, path) -> None:
    with open(path, "w") as fh:
        json.dump(channel_to_dict(ch), fh)


def load_channel(path) -> ChannelRealization:
    with open(path) as fh:
        return channel_from_dict(json.load(fh))
