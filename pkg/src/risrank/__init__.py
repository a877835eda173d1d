"""Capacity maximization for RIS-assisted multi-user MISO downlinks.

RIS phases are tuned by gradient ascent on the effective rank of the
weighted channel covariance ``H Rx H^H``; the input covariance comes from
MRT or MMSE precoding with water-filling power allocation.
"""
from .channel import (
    ChannelRealization,
    RisPhases,
    SystemDims,
    channel_phase_derivative,
    composite_channel,
    sample_rayleigh,
)
from .effective_rank import (
    effective_rank,
    effrank_eigen_gradient,
    effrank_phase_gradient,
    finite_difference_gradient,
)
from .evaluation import (
    MetricsRecord,
    SimulationConfig,
    capacity,
    run_monte_carlo,
    sum_rate,
    user_sinr,
)
from .optimizer import OptimizerConfig, OptimizationTrace, alternate, ascend_phases
from .precoding import (
    assemble_covariance,
    eigen_waterfill_covariance,
    mmse_precoder,
    mrt_precoder,
    upa_covariance,
    waterfill,
)

__version__ = "0.1.0"
