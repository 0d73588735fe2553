"""End-to-end SNR and throughput of the harvest-then-cooperate link.

Timeline per block of length T: the access point beams energy for tau*T,
the user broadcasts for (1-tau)*T/2, and the relay amplifies-and-forwards
for the remaining (1-tau)*T/2. The AP combines both hops by MRC, so the
post-combining SNR is the direct-link term plus the relayed term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelState, SystemParams

__all__ = [
    "SnrBreakdown",
    "transmit_powers",
    "snr_exact",
    "snr_upper",
    "throughput",
]

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class SnrBreakdown:
    """Post-MRC SNR split into its direct and relayed contributions.

    gamma_upper replaces the relayed term by min of the two hop SNRs,
    which bounds the amplify-and-forward term from above.
    """

    gamma_direct: float
    gamma_relay: float
    gamma_total: float
    gamma_upper: float


def transmit_powers(params: SystemParams, ch: ChannelState, w: np.ndarray,
                    tau: float) -> tuple[float, float]:
    """Average user and relay transmit powers in watts for beam w.

    Harvested energy eta*tau*Ps*|h^T w|^2/d^alpha is spent uniformly over
    the (1-tau)/2 transmit phase; a fixed circuit draw pc_watt is deducted
    and the result floored at zero.
    """
    if not (0.0 < tau < 1.0):
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    scale = 2.0 * params.eta * tau * params.ps_watt / (1.0 - tau)
    pu = scale * abs(ch.h1 @ w) ** 2 / params.d1 ** params.alpha
    pr = scale * abs(ch.h2 @ w) ** 2 / params.d2 ** params.alpha
    pc = params.pc_watt
    return max(0.0, pu - pc), max(0.0, pr - pc)


def snr_exact(params: SystemParams, ch: ChannelState, w: np.ndarray,
              tau: float) -> SnrBreakdown:
    """Exact post-MRC SNR of the two-phase transmission under beam w."""
    nw = float(np.linalg.norm(w))
    if abs(nw - 1.0) > _NORM_TOL:
        raise ValueError(f"beam must be unit norm, got |w| = {nw}")
    pu, pr = transmit_powers(params, ch, w, tau)
    n0 = params.noise_watt
    n1_sq = float(np.vdot(ch.h1, ch.h1).real)
    n2_sq = float(np.vdot(ch.h2, ch.h2).real)
    gd = pu * n1_sq / (params.d1 ** params.alpha * n0)
    xu = pu * abs(ch.h3) ** 2 / (params.d3 ** params.alpha * n0)
    xr = pr * n2_sq / (params.d2 ** params.alpha * n0)
    denom = xu + xr + 1.0
    gr = xu * xr / denom if denom > 0 else 0.0
    return SnrBreakdown(gamma_direct=gd, gamma_relay=gr,
                        gamma_total=gd + gr, gamma_upper=gd + min(xu, xr))


def snr_upper(params: SystemParams, ch: ChannelState, w: np.ndarray,
              tau: float) -> float:
    """Upper bound gamma_direct + min(hop SNRs), ignoring circuit power."""
    nw = float(np.linalg.norm(w))
    if abs(nw - 1.0) > _NORM_TOL:
        raise ValueError(f"beam must be unit norm, got |w| = {nw}")
    if not (0.0 < tau < 1.0):
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    g1 = abs(ch.h1 @ w) ** 2
    g2 = abs(ch.h2 @ w) ** 2
    d1a = params.d1 ** params.alpha
    scale = 2.0 * params.eta * tau * params.rho / (1.0 - tau)
    cap_a = float(np.vdot(ch.h1, ch.h1).real) / d1a ** 2
    cap_c = abs(ch.h3) ** 2 / (d1a * params.d3 ** params.alpha)
    cap_d = float(np.vdot(ch.h2, ch.h2).real) / params.d2 ** (2 * params.alpha)
    return scale * ((cap_a + cap_c) * g1 if cap_c * g1 <= cap_d * g2
                    else cap_a * g1 + cap_d * g2)


def throughput(gamma: float, tau: float) -> float:
    """Delay-limited throughput (1-tau)/2 * log2(1 + gamma) in bits/s/Hz."""
    if not (0.0 < tau < 1.0):
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    return 0.5 * (1.0 - tau) * math.log2(1.0 + gamma)
