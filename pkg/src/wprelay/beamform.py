"""Energy-beam and harvest-time optimization strategies.

Every strategy returns a BeamformerDesign with the mixing coefficient
x_bar of the two-direction beam, the beam itself, the achieved SNR, and
the harvest fraction tau:

- "exact":      2-D grid search over (x_bar, tau) on the exact throughput,
                followed by golden-section refinement.
- "suboptimal": closed-form x_bar maximizing the min of the two branches
                of the SNR upper bound (tau-independent), then the
                Lambert-W harvest time for the resulting SNR coefficient.
- "large-n":    many-antenna limit where h1 and h2 are treated as
                orthogonal and x_bar depends on channel norms only.
- "mrt-user":   beam fully toward the user (x_bar = 1).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .channel import (ChannelDecomposition, ChannelState, SystemParams,
                      build_beamformer, decompose)
from .sysmodel import snr_exact, throughput
from .timesplit import golden_max, optimal_tau

__all__ = [
    "BeamformerDesign",
    "solve",
    "solve_exact",
    "solve_suboptimal",
    "solve_suboptimal_xbar",
    "solve_large_n",
    "solve_mrt_user",
    "STRATEGIES",
]

logger = logging.getLogger(__name__)

STRATEGIES = ("exact", "suboptimal", "large-n", "mrt-user")

_SLOPE_ZERO_BAND = 1e-9
_REF_TAU = 0.5  # scale(0.5) = 2*eta*rho, so SNR here equals the tau-free kappa


@dataclass(frozen=True)
class BeamformerDesign:
    strategy: str
    x_bar: float
    w: np.ndarray
    gamma_max: float
    tau: float
    scenario: str | None = None  # sign regime of the mixed-branch slope
    case_index: int | None = None  # which closed-form case fired


def branch_user_hop(dec: ChannelDecomposition, x_bar):
    """SNR upper bound when the user->relay hop binds the relayed term."""
    return (dec.a0 + dec.c0) * dec.a * dec.a * np.square(x_bar)


def branch_relay_hop(dec: ChannelDecomposition, x_bar):
    """SNR upper bound when the relay->AP hop binds the relayed term."""
    x = np.asarray(x_bar, dtype=float)
    s = np.sqrt(np.clip(1.0 - np.square(x), 0.0, None))
    return dec.a0 * dec.a * dec.a * np.square(x) + dec.d0 * np.square(dec.b * x + dec.c * s)


def bound_min(dec: ChannelDecomposition, x_bar):
    """min of the two bound branches; the objective of the suboptimal design."""
    return np.minimum(branch_user_hop(dec, x_bar), branch_relay_hop(dec, x_bar))


def solve_suboptimal_xbar(dec: ChannelDecomposition) -> tuple[float, float, str, int]:
    """Closed-form maximizer of bound_min over x_bar in [0, 1].

    Returns (x_bar, gamma_max, scenario, case_index). With t = x_bar^2:
      f1(x) = S t,                          S = (A0 + C0) a^2,
      f3(x) = P t + q x sqrt(1 - t) + D0 c^2,
              P = A0 a^2 + D0 (b^2 - c^2),  q = 2 D0 b c.
    f1 rises from 0 to S; f3 peaks at x_hat (from d/dt = 0). The maximizer
    of the min is x = 1 when f1 stays below f3 there, the peak x_hat when
    f1 already dominates there, and otherwise the crossing point in
    between, located numerically.
    """
    a_sq = dec.a * dec.a
    s_top = (dec.a0 + dec.c0) * a_sq
    p = dec.a0 * a_sq + dec.d0 * (dec.b * dec.b - dec.c * dec.c)
    q = 2.0 * dec.d0 * dec.b * dec.c

    if q == 0.0:
        x_hat = 1.0 if p >= 0.0 else 0.0
    else:
        k = p / q
        x_hat = math.sqrt(0.5 + k / (2.0 * math.sqrt(1.0 + k * k)))

    if abs(p) <= _SLOPE_ZERO_BAND * dec.d0 * dec.b * dec.c:
        scenario = "mixed-slope-zero"
    elif p > 0:
        scenario = "mixed-slope-positive"
    else:
        scenario = "mixed-slope-negative"

    f3_one = float(branch_relay_hop(dec, 1.0))
    if s_top <= f3_one:
        # f1 never exceeds f3 on [0, 1]; min == f1, maximized at the edge
        x_opt, case = 1.0, 1
    elif s_top * x_hat * x_hat >= float(branch_relay_hop(dec, x_hat)):
        # f1 already above f3 at f3's peak; min == f3, maximized at the peak
        x_opt, case = x_hat, 3
    else:
        # branches cross between the peak and the edge
        def gap(x: float) -> float:
            return float(branch_user_hop(dec, x) - branch_relay_hop(dec, x))

        x_opt = float(brentq(gap, x_hat, 1.0, xtol=1e-14, rtol=8.9e-16))
        case = 2
        logger.debug("branch crossing at x=%.15g residual=%.3g", x_opt, gap(x_opt))
    gamma = float(bound_min(dec, x_opt))
    return x_opt, gamma, scenario, case


def solve_suboptimal(params: SystemParams, ch: ChannelState) -> BeamformerDesign:
    """Closed-form beam plus Lambert-W harvest time on the SNR upper bound.

    The beam maximizing the bound does not depend on tau (every branch
    scales by the same tau factor), so it is computed once at a reference
    tau and the harvest time follows from the resulting SNR coefficient.
    """
    dec = decompose(params, ch, _REF_TAU)
    x_opt, kappa, scenario, case = solve_suboptimal_xbar(dec)
    ts = optimal_tau(kappa)
    gamma = kappa * ts.tau / (1.0 - ts.tau)
    return BeamformerDesign(strategy="suboptimal", x_bar=x_opt,
                            w=build_beamformer(ch, x_opt), gamma_max=gamma,
                            tau=ts.tau, scenario=scenario, case_index=case)


def _mixed_snr(params: SystemParams, dec0: ChannelDecomposition, x, tau: float):
    """Exact end-to-end SNR for a vector of mixing coefficients at one tau.

    dec0 may come from any tau; only its tau-free pieces are used. Includes
    the circuit-power floor on both transmit powers.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - np.square(x), 0.0, None))
    g1 = dec0.a * dec0.a * np.square(x)
    g2 = np.square(dec0.b * x + dec0.c * s)
    scale_p = 2.0 * params.eta * tau * params.ps_watt / (1.0 - tau)
    d1a = params.d1 ** params.alpha
    d2a = params.d2 ** params.alpha
    pc = params.pc_watt
    pu = np.maximum(0.0, scale_p * g1 / d1a - pc)
    pr = np.maximum(0.0, scale_p * g2 / d2a - pc)
    n0 = params.noise_watt
    a_sq = dec0.a * dec0.a
    h2_sq = dec0.b * dec0.b + dec0.c * dec0.c
    h3_sq = dec0.cap_c * d1a * params.d3 ** params.alpha
    gd = pu * a_sq / (d1a * n0)
    xu = pu * h3_sq / (params.d3 ** params.alpha * n0)
    xr = pr * h2_sq / (d2a * n0)
    return gd + xu * xr / (xu + xr + 1.0)


def solve_exact(params: SystemParams, ch: ChannelState,
                grid: tuple[int, int] = (256, 256)) -> BeamformerDesign:
    """Joint (x_bar, tau) maximization of the exact throughput.

    Grid search over the full rectangle, then alternating golden-section
    refinement in each coordinate. Ties on the grid resolve to the
    smallest x_bar.
    """
    nx, nt = grid
    if nx < 2 or nt < 2:
        raise ValueError("grid must have at least 2 points per axis")
    dec0 = decompose(params, ch, _REF_TAU)
    xs = np.linspace(0.0, 1.0, nx)
    taus = np.linspace(1e-4, 1.0 - 1e-4, nt)

    if dec0.c == 0.0:
        # no perpendicular direction: beam is fixed, only tau matters
        best_x = 1.0
        tau, _ = golden_max(
            lambda t: throughput(float(_mixed_snr(params, dec0, 1.0, t)), t),
            1e-6, 1.0 - 1e-6, 1e-9)
        gamma = float(_mixed_snr(params, dec0, 1.0, tau))
        return BeamformerDesign(strategy="exact", x_bar=best_x,
                                w=build_beamformer(ch, best_x),
                                gamma_max=gamma, tau=tau)

    best_val = -1.0
    best_x = 0.0
    best_tau = taus[0]
    for tau in taus:
        vals = 0.5 * (1.0 - tau) * np.log2(1.0 + _mixed_snr(params, dec0, xs, tau))
        i = int(np.argmax(vals))  # first max -> smallest x_bar on ties
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_x = float(xs[i])
            best_tau = float(tau)

    dx = 1.0 / (nx - 1)
    dt = (taus[-1] - taus[0]) / (nt - 1)
    for _ in range(6):
        lo, hi = max(0.0, best_x - dx), min(1.0, best_x + dx)
        best_x, _ = golden_max(
            lambda x: throughput(float(_mixed_snr(params, dec0, x, best_tau)), best_tau),
            lo, hi, 1e-9)
        lo, hi = max(1e-7, best_tau - dt), min(1.0 - 1e-7, best_tau + dt)
        best_tau, best_val = golden_max(
            lambda t: throughput(float(_mixed_snr(params, dec0, best_x, t)), t),
            lo, hi, 1e-9)
        dx /= 4.0
        dt /= 4.0

    gamma = float(_mixed_snr(params, dec0, best_x, best_tau))
    return BeamformerDesign(strategy="exact", x_bar=best_x,
                            w=build_beamformer(ch, best_x),
                            gamma_max=gamma, tau=best_tau)


def solve_large_n(params: SystemParams, ch: ChannelState) -> BeamformerDesign:
    """Many-antenna beam: mix raw h1*/||h1|| and h2*/||h2|| directions.

    In the limit the two channel vectors become orthogonal; the mixing
    weight then depends only on the channel norms. For finite N the two
    directions are not exactly orthogonal, so the combined vector is
    renormalized before use.
    """
    dec = decompose(params, ch, _REF_TAU)
    a_sq = dec.a * dec.a
    h2_sq = dec.b * dec.b + dec.c * dec.c
    au = dec.a0 * a_sq       # direct-branch level at x_bar = 1
    cu = dec.c0 * a_sq
    du = dec.d0 * h2_sq
    if au - du >= 0.0 or h2_sq == 0.0:
        x_bar = 1.0
    else:
        x_bar = math.sqrt(du / (cu + du))
    n1 = dec.a
    n2 = math.sqrt(h2_sq)
    w = x_bar * np.conj(ch.h1) / n1
    if n2 > 0.0:
        w = w + math.sqrt(max(0.0, 1.0 - x_bar * x_bar)) * np.conj(ch.h2) / n2
    w = w / np.linalg.norm(w)
    # harvest time from the actual bound value achieved by this beam
    g1 = abs(ch.h1 @ w) ** 2
    g2 = abs(ch.h2 @ w) ** 2
    kappa = min((dec.a0 + dec.c0) * g1, dec.a0 * g1 + dec.d0 * g2)
    ts = optimal_tau(max(kappa, 1e-300))
    gamma = kappa * ts.tau / (1.0 - ts.tau)
    return BeamformerDesign(strategy="large-n", x_bar=x_bar, w=w,
                            gamma_max=gamma, tau=ts.tau)


def solve_mrt_user(params: SystemParams, ch: ChannelState,
                   tau: float | None = None) -> BeamformerDesign:
    """Beam all energy toward the user: w = h1*/||h1||.

    With tau omitted, the harvest time maximizes the exact throughput of
    this beam by golden-section search.
    """
    n1 = float(np.linalg.norm(ch.h1))
    if n1 == 0.0:
        raise ValueError("h1 vanishes; no beam direction exists")
    w = np.conj(ch.h1) / n1
    if tau is None:
        tau, _ = golden_max(
            lambda t: throughput(snr_exact(params, ch, w, t).gamma_total, t),
            1e-6, 1.0 - 1e-6, 1e-9)
    gamma = snr_exact(params, ch, w, tau).gamma_total
    return BeamformerDesign(strategy="mrt-user", x_bar=1.0, w=w,
                            gamma_max=gamma, tau=tau)


def solve(strategy: str, params: SystemParams, ch: ChannelState,
          tau: float | None = None, **kwargs) -> BeamformerDesign:
    """Dispatch on strategy name; see module docstring for the catalogue."""
    if strategy == "exact":
        return solve_exact(params, ch, **kwargs)
    if strategy == "suboptimal":
        return solve_suboptimal(params, ch)
    if strategy == "large-n":
        return solve_large_n(params, ch)
    if strategy == "mrt-user":
        return solve_mrt_user(params, ch, tau=tau)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
