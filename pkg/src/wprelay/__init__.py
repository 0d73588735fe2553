"""Wireless-powered relay link: beam/time-split optimization and analysis."""

from .channel import (ChannelDecomposition, ChannelState,
                      DegenerateChannelError, SystemParams, build_beamformer,
                      decompose, sample_channel, sample_channel_block)
from .beamform import BeamformerDesign, solve
from .montecarlo import PerformanceEstimate, SimulationError, estimate, sweep
from .sysmodel import SnrBreakdown, snr_exact, snr_upper, throughput
from .timesplit import TimeSplitResult, lambert_w0, optimal_tau, search_tau

__version__ = "0.1.0"

__all__ = [
    "ChannelDecomposition", "ChannelState", "DegenerateChannelError",
    "SystemParams", "build_beamformer", "decompose", "sample_channel",
    "sample_channel_block", "BeamformerDesign", "solve",
    "PerformanceEstimate", "SimulationError", "estimate", "sweep",
    "SnrBreakdown", "snr_exact", "snr_upper", "throughput",
    "TimeSplitResult", "lambert_w0", "optimal_tau", "search_tau",
    "__version__",
]
