"""Capacity / SINR metrics and seeded Monte-Carlo sweeps.

Realization ``r`` always draws its channel and its initial phases from
:func:`risrank.channel.child_seeds` ``(master_seed, r)``, so every scheme and
every sweep value sees the same random inputs (paired comparisons), and
results do not depend on how realizations are scheduled across workers.
"""
from __future__ import annotations

import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .channel import (
    ChannelRealization,
    RisPhases,
    SystemDims,
    child_seeds,
    composite_channel,
    sample_rayleigh,
)
from .effective_rank import effective_rank, weighted_covariance
from .errors import DegenerateInputError, SingularMatrixError
from .numerics import logdet2_plus_identity
from .optimizer import OptimizerConfig, alternate, covariance_for
from .precoding import SCHEMES, InputCovariance, PrecoderSet

log = logging.getLogger(__name__)

SWEEP_VARS = ("SNR", "N", "M")
RIS_MODES = ("optimized", "random", "identity")
CSV_COLUMNS = (
    "sweep_var",
    "sweep_value",
    "scheme",
    "mean_se",
    "ci95",
    "mean_effrank",
    "mean_gap",
    "realizations",
    "capped_count",
    # extras, always after the fixed block
    "mean_sum_rate",
    "mean_gap_shared_ris",
    "failed_count",
)
WORKERS_ENV = "RISRANK_WORKERS"
MAX_FAILURE_FRACTION = 0.01
Z95 = 1.959963984540054


def capacity(H: np.ndarray, Rx, sigma2: float = 1.0) -> float:
    """``log2 |I + H Rx H^H / sigma2|`` in bits/s/Hz."""
    R = Rx.Rx if isinstance(Rx, InputCovariance) else np.asarray(Rx)
    if H.shape[1] != R.shape[0]:
        raise ValueError(f"H is {H.shape} but Rx is {R.shape}")
    return logdet2_plus_identity(weighted_covariance(H, R) / sigma2)


def user_sinr(H: np.ndarray, pre: PrecoderSet, k: int) -> float:
    """SINR of user ``k``: ``p_k |h_k v_k|^2 / (sum_{j != k} p_j |h_k v_j|^2 + sigma2)``."""
    g = np.abs(H[k] @ pre.vectors) ** 2 * pre.powers
    interference = g.sum() - g[k]
    return float(g[k] / (interference + pre.sigma2))


def sum_rate(sinrs: Sequence[float]) -> float:
    s = np.asarray(sinrs, dtype=float)
    if np.any(s < 0):
        raise ValueError("SINR must be nonnegative")
    return float(np.sum(np.log2(1.0 + s)))


@dataclass(frozen=True)
class SimulationConfig:
    dims: SystemDims = SystemDims(M=4, K=3, N=8)
    Pt: float = 10.0
    sigma2: float = 1.0
    schemes: tuple = SCHEMES
    realizations: int = 1000
    master_seed: int = 0
    sweep_var: str = "SNR"
    sweep_values: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    optimizer: OptimizerConfig = OptimizerConfig()
    ris_mode: str = "optimized"
    direct_link: bool = False

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if self.sweep_var not in SWEEP_VARS:
            raise ValueError(f"sweep_var must be one of {SWEEP_VARS}")
        if self.ris_mode not in RIS_MODES:
            raise ValueError(f"ris_mode must be one of {RIS_MODES}")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise ValueError(f"unknown schemes {bad}; choose from {SCHEMES}")
        vals = list(self.sweep_values)
        if not vals or vals != sorted(vals) or len(set(vals)) != len(vals):
            raise ValueError("sweep values must be non-empty, sorted and distinct")
        if self.sweep_var != "SNR" and any(v <= 0 or int(v) != v for v in vals):
            raise ValueError(f"{self.sweep_var} sweep values must be positive integers")
        if not self.Pt > 0 or not self.sigma2 > 0:
            raise ValueError("Pt and sigma2 must be positive")

    def point(self, value: float) -> tuple[SystemDims, float]:
        """``(dims, Pt)`` at one sweep value. SNR is ``Pt / sigma2`` in dB."""
        if self.sweep_var == "SNR":
            return self.dims, self.sigma2 * 10.0 ** (value / 10.0)
        if self.sweep_var == "N":
            return replace(self.dims, N=int(value)), self.Pt
        return replace(self.dims, M=int(value)), self.Pt


@dataclass
class MetricsRecord:
    sweep_var: str
    sweep_value: float
    scheme: str
    mean_se: float
    ci95: float
    mean_effrank: float
    mean_gap: float
    realizations: int
    capped_count: int
    mean_sum_rate: float = math.nan
    mean_gap_shared_ris: float = math.nan
    failed_count: int = 0


@dataclass
class SchemeOutcome:
    capacity: float
    effrank: float
    sum_rate: float
    capped: bool
    phases: Optional[RisPhases] = None


@dataclass
class RealizationOutcome:
    realization: int
    schemes: dict = field(default_factory=dict)
    gap: float = math.nan
    gap_shared_ris: float = math.nan


def draw_realization(
    dims: SystemDims, master_seed: int, r: int, direct_link: bool = False
) -> tuple[ChannelRealization, RisPhases]:
    """Channel and initial phases of realization ``r``."""
    chan_ss, init_ss = child_seeds(master_seed, r)
    ch = sample_rayleigh(dims, direct_link, np.random.default_rng(chan_ss), seed=master_seed)
    theta0 = RisPhases.random(dims.N, np.random.default_rng(init_ss))
    return ch, theta0


def _sum_rate_of(H: np.ndarray, pre: Optional[PrecoderSet]) -> float:
    if pre is None:
        return math.nan
    return sum_rate([user_sinr(H, pre, k) for k in range(pre.K)])


def evaluate_scheme(
    ch: ChannelRealization,
    theta0: RisPhases,
    scheme: str,
    Pt: float,
    sigma2: float,
    ris_mode: str,
    opt: OptimizerConfig,
) -> SchemeOutcome:
    if ris_mode == "optimized":
        trace = alternate(ch, scheme, Pt, sigma2, theta0, opt)
        H = composite_channel(ch, trace.phases)
        return SchemeOutcome(
            trace.final_capacity,
            trace.final_effrank,
            _sum_rate_of(H, trace.precoders),
            trace.capped,
            trace.phases,
        )
    phases = theta0 if ris_mode == "random" else RisPhases.zeros(theta0.N)
    H = composite_channel(ch, phases)
    cov, pre = covariance_for(H, scheme, Pt, sigma2)
    return SchemeOutcome(
        capacity(H, cov, sigma2),
        effective_rank(weighted_covariance(H, cov.Rx)),
        _sum_rate_of(H, pre),
        False,
        phases,
    )


def evaluate_realization(
    cfg: SimulationConfig, dims: SystemDims, Pt: float, r: int
) -> RealizationOutcome:
    """All configured schemes on realization ``r`` at one sweep point."""
    ch, theta0 = draw_realization(dims, cfg.master_seed, r, cfg.direct_link)
    out = RealizationOutcome(r)
    for scheme in cfg.schemes:
        out.schemes[scheme] = evaluate_scheme(
            ch, theta0, scheme, Pt, cfg.sigma2, cfg.ris_mode, cfg.optimizer
        )
    if "MRT-WF" in out.schemes and "MMSE-WF" in out.schemes:
        out.gap = abs(out.schemes["MRT-WF"].capacity - out.schemes["MMSE-WF"].capacity)
        # both precoders on the RIS configuration found by the MRT-WF run
        H = composite_channel(ch, out.schemes["MRT-WF"].phases)
        c_mrt = capacity(H, covariance_for(H, "MRT-WF", Pt, cfg.sigma2)[0], cfg.sigma2)
        c_mmse = capacity(H, covariance_for(H, "MMSE-WF", Pt, cfg.sigma2)[0], cfg.sigma2)
        out.gap_shared_ris = abs(c_mrt - c_mmse)
    return out


def _work(args):
    cfg, dims, Pt, r = args
    try:
        return evaluate_realization(cfg, dims, Pt, r)
    except (DegenerateInputError, SingularMatrixError, np.linalg.LinAlgError) as exc:
        log.warning("realization %d failed: %s", r, exc)
        return None


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _mean_ci(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return math.nan, math.nan
    mean = float(np.sum(x) / x.size)
    if x.size < 2:
        return mean, 0.0
    return mean, float(Z95 * np.std(x, ddof=1) / math.sqrt(x.size))


def _nanmean(x: np.ndarray) -> float:
    x = x[~np.isnan(x)]
    return float(np.sum(x) / x.size) if x.size else math.nan


def aggregate(
    cfg: SimulationConfig, value: float, outcomes: list
) -> list[MetricsRecord]:
    """Per-scheme records for one sweep value; ``None`` entries are failures."""
    ok = [o for o in outcomes if o is not None]
    failed = len(outcomes) - len(ok)
    if failed > MAX_FAILURE_FRACTION * len(outcomes):
        raise RuntimeError(
            f"{failed}/{len(outcomes)} realizations failed at {cfg.sweep_var}={value}"
        )
    ok.sort(key=lambda o: o.realization)
    gap = _nanmean(np.array([o.gap for o in ok]))
    gap_shared = _nanmean(np.array([o.gap_shared_ris for o in ok]))
    records = []
    for scheme in cfg.schemes:
        res = [o.schemes[scheme] for o in ok]
        mean_se, ci = _mean_ci(np.array([s.capacity for s in res]))
        records.append(
            MetricsRecord(
                sweep_var=cfg.sweep_var,
                sweep_value=float(value),
                scheme=scheme,
                mean_se=mean_se,
                ci95=ci,
                mean_effrank=_mean_ci(np.array([s.effrank for s in res]))[0],
                mean_gap=gap,
                realizations=len(ok),
                capped_count=sum(s.capped for s in res),
                mean_sum_rate=_nanmean(np.array([s.sum_rate for s in res])),
                mean_gap_shared_ris=gap_shared,
                failed_count=failed,
            )
        )
    return records


def run_monte_carlo(cfg: SimulationConfig, workers: Optional[int] = None) -> list[MetricsRecord]:
    """Sweep ``cfg.sweep_var`` and return one record per (value, scheme).

    ``workers`` defaults to the ``RISRANK_WORKERS`` environment variable (1
    if unset). Output is identical for any worker count.
    """
    workers = worker_count() if workers is None else max(1, workers)
    jobs = []
    for value in cfg.sweep_values:
        dims, Pt = cfg.point(value)
        jobs.append([(cfg, dims, Pt, r) for r in range(cfg.realizations)])
    flat = [j for group in jobs for j in group]
    if workers == 1:
        results = [_work(j) for j in flat]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_work, flat, chunksize=max(1, len(flat) // (4 * workers))))
    records = []
    for i, value in enumerate(cfg.sweep_values):
        chunk = results[i * cfg.realizations : (i + 1) * cfg.realizations]
        records.extend(aggregate(cfg, value, chunk))
    return records


# -- output -------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip repr
    return str(v)


def records_to_csv(records: Sequence[MetricsRecord]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for rec in records:
        buf.write(",".join(_fmt(getattr(rec, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def _json_num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def records_to_json(records: Sequence[MetricsRecord]) -> str:
    """Records nested by sweep value; NaN becomes ``null``."""
    groups: dict = {}
    order = []
    for rec in records:
        if rec.sweep_value not in groups:
            groups[rec.sweep_value] = {}
            order.append(rec.sweep_value)
        groups[rec.sweep_value][rec.scheme] = {
            c: _json_num(getattr(rec, c))
            for c in CSV_COLUMNS
            if c not in ("sweep_var", "sweep_value", "scheme")
        }
    doc = {
        "sweep_var": records[0].sweep_var if records else None,
        "columns": list(CSV_COLUMNS),
        "results": [{"sweep_value": v, "schemes": groups[v]} for v in order],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"
