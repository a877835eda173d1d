"""Gradient ascent on RIS phases and the phase / covariance alternation."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .channel import ChannelRealization, RisPhases, composite_channel
from .effective_rank import PhaseObjective, effective_rank, weighted_covariance
from .numerics import logdet2_plus_identity
from .precoding import (
    InputCovariance,
    PrecoderSet,
    assemble_covariance,
    eigen_waterfill_covariance,
    precoder_gains,
    precoders,
    upa_covariance,
    waterfill,
)

log = logging.getLogger(__name__)

MIN_STEP = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    alpha: float = 0.1
    gamma_tol: float = 1e-4
    max_outer: int = 100
    max_inner: int = 20
    inner_tol: float = 1e-6
    backtrack_factor: float = 0.5

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.gamma_tol > 0:
            raise ValueError("gamma_tol must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not self.inner_tol >= 0:
            raise ValueError("inner_tol must be nonnegative")


@dataclass
class AscentResult:
    phases: RisPhases
    steps: int
    effrank: float
    history: list  # E after each accepted step, starting with E(theta0)
    last_step: float  # step size of the last accepted step, 0 if none


def ascend_phases(
    ch: ChannelRealization,
    Rx: InputCovariance | np.ndarray,
    theta0: RisPhases,
    cfg: OptimizerConfig = OptimizerConfig(),
) -> AscentResult:
    """Maximize ``E(H Rx H^H)`` over the phases with ``Rx`` held fixed.

    Each step tries ``theta + alpha * grad`` and shrinks ``alpha`` by
    ``cfg.backtrack_factor`` until the effective rank strictly improves;
    ``alpha`` resets to ``cfg.alpha`` at every step.
    """
    R = Rx.Rx if isinstance(Rx, InputCovariance) else np.asarray(Rx)
    objective = PhaseObjective(ch, R)
    theta = theta0.theta.copy()
    E, state = objective.evaluate(theta)
    history = [E]
    steps = 0
    last_step = 0.0
    for _ in range(cfg.max_inner):
        grad = objective.gradient(state)
        if np.linalg.norm(grad) < cfg.inner_tol:
            break
        step = cfg.alpha
        accepted = False
        while step >= MIN_STEP:
            trial = theta + step * grad
            E_trial, trial_state = objective.evaluate(trial)
            if E_trial > E:
                accepted = True
                break
            step *= cfg.backtrack_factor
        if not accepted:
            break
        theta, E, state = trial, E_trial, trial_state
        history.append(E)
        steps += 1
        last_step = step
    return AscentResult(RisPhases(theta), steps, E, history, last_step)


@dataclass
class IterationRecord:
    iteration: int
    effrank: float
    capacity: float
    inner_steps: int
    step_size: float


@dataclass
class OptimizationTrace:
    scheme: str
    records: list = field(default_factory=list)
    phases: Optional[RisPhases] = None
    covariance: Optional[InputCovariance] = None
    precoders: Optional[PrecoderSet] = None
    initial_effrank: float = float("nan")
    initial_capacity: float = float("nan")
    converged: bool = False
    capped: bool = False
    rejected: bool = False  # stopped because an outer iteration lowered E

    @property
    def final_effrank(self) -> float:
        return self.records[-1].effrank if self.records else self.initial_effrank

    @property
    def final_capacity(self) -> float:
        return self.records[-1].capacity if self.records else self.initial_capacity

    @property
    def total_inner_steps(self) -> int:
        return sum(r.inner_steps for r in self.records)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "converged": self.converged,
            "capped": self.capped,
            "rejected": self.rejected,
            "initial_effrank": self.initial_effrank,
            "initial_capacity": self.initial_capacity,
            "iterations": [asdict(r) for r in self.records],
            "final_phases": [float(t) for t in self.phases.wrapped().theta],
        }


def capacity_bits(H: np.ndarray, Rx: np.ndarray, sigma2: float) -> float:
    return logdet2_plus_identity(weighted_covariance(H, Rx) / sigma2)


class _CovarianceDesign:
    """Carries the power / precoder state across outer iterations."""

    def __init__(self, scheme: str, Pt: float, sigma2: float, M: int, K: int):
        self.scheme = scheme
        self.Pt = Pt
        self.sigma2 = sigma2
        self.M = M
        self.powers = np.full(K, Pt / K)
        self.V = None
        self.pre = None

    def update(self, H: np.ndarray) -> InputCovariance:
        if self.scheme == "UPA":
            return upa_covariance(self.M, self.Pt)
        if self.scheme == "WF":
            return eigen_waterfill_covariance(H, self.Pt, self.sigma2)
        if self.V is None:
            self.V = precoders(H, self.scheme, self.powers, self.sigma2)
        # powers first (from the gains of the current precoders), then precoders
        self.powers = waterfill(precoder_gains(H, self.V), self.Pt, self.sigma2)
        self.V = precoders(H, self.scheme, self.powers, self.sigma2)
        self.pre = PrecoderSet(self.V, self.powers, self.sigma2)
        return assemble_covariance(self.pre, self.Pt)


def covariance_for(
    H: np.ndarray, scheme: str, Pt: float, sigma2: float
) -> tuple[InputCovariance, Optional[PrecoderSet]]:
    """One covariance-design pass at a fixed channel (no phase optimization)."""
    design = _CovarianceDesign(scheme, Pt, sigma2, H.shape[1], H.shape[0])
    cov = design.update(H)
    return cov, design.pre


def alternate(
    ch: ChannelRealization,
    scheme: str,
    Pt: float,
    sigma2: float,
    theta0: RisPhases,
    cfg: OptimizerConfig = OptimizerConfig(),
) -> OptimizationTrace:
    """Alternate covariance design and phase ascent until ``|dE| <= cfg.gamma_tol``.

    Per outer iteration: water-filling powers, precoders (MRT or MMSE with
    ``gamma_k`` from the fresh powers), ``Rx = sum p_k v_k v_k^H``, then
    :func:`ascend_phases`. ``"UPA"`` and ``"WF"`` substitute the fixed
    ``(Pt/M) I`` and the eigenmode water-filling covariance respectively.

    An outer iteration that ends below the previous effective rank is
    discarded and the loop stops there, so the recorded sequence never
    decreases.
    """
    dims = ch.dims
    design = _CovarianceDesign(scheme, Pt, sigma2, dims.M, dims.K)
    trace = OptimizationTrace(scheme=scheme)
    phases = theta0
    H = composite_channel(ch, phases)
    cov = design.update(H)
    pre = design.pre
    E_prev = effective_rank(weighted_covariance(H, cov.Rx))
    trace.initial_effrank = E_prev
    trace.initial_capacity = capacity_bits(H, cov.Rx, sigma2)

    for i in range(1, cfg.max_outer + 1):
        if i > 1:
            cand_cov = design.update(H)
            cand_pre = design.pre
        else:
            cand_cov, cand_pre = cov, pre
        res = ascend_phases(ch, cand_cov, phases, cfg)
        if res.effrank < E_prev:
            trace.rejected = True
            trace.converged = True
            break
        phases, cov, pre = res.phases, cand_cov, cand_pre
        H = composite_channel(ch, phases)
        trace.records.append(
            IterationRecord(i, res.effrank, capacity_bits(H, cov.Rx, sigma2), res.steps, res.last_step)
        )
        delta = abs(res.effrank - E_prev)
        E_prev = res.effrank
        if delta <= cfg.gamma_tol:
            trace.converged = True
            break
    else:
        trace.capped = True
        log.debug("%s alternation hit max_outer=%d", scheme, cfg.max_outer)

    trace.phases = phases
    trace.covariance = cov
    trace.precoders = pre
    return trace
