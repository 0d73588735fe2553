"""Harvest-time optimization: Lambert-W closed form and golden-section search."""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "TimeSplitResult",
    "lambert_w0",
    "optimal_tau",
    "search_tau",
    "golden_max",
    "rate_upper",
]

_INV_E = math.exp(-1.0)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TimeSplitResult:
    tau: float
    kappa: float
    method: str  # "lambert-w" | "search"
    objective: float


def rate_upper(kappa: float, tau: float) -> float:
    """Rate bound (1-tau)/2 * log2(1 + kappa*tau/(1-tau))."""
    return 0.5 * (1.0 - tau) * math.log2(1.0 + kappa * tau / (1.0 - tau))


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for x >= -1/e.

    Halley iteration on w*e^w = x from a series (near the branch point and
    near zero) or log-based (large x) initial guess.
    """
    if x < -_INV_E:
        if x > -_INV_E - 1e-15:  # rounding slop at the branch point
            x = -_INV_E
        else:
            raise ValueError(f"lambert_w0 requires x >= -1/e, got {x}")
    if x == 0.0:
        return 0.0
    if x <= -_INV_E + 1e-16:
        return -1.0
    if x < -0.25:
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    elif x < math.e:
        w = x / (1.0 + x)
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - x
        w1 = w + 1.0
        step = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= step
        if abs(step) <= 1e-15 * (1.0 + abs(w)):
            break
    return w


def optimal_tau(kappa: float) -> TimeSplitResult:
    """Closed-form maximizer of rate_upper(kappa, .) on (0, 1)."""
    if kappa <= 0:
        raise ValueError(f"optimal_tau requires kappa > 0, got {kappa}")
    z = math.exp(lambert_w0((kappa - 1.0) / math.e) + 1.0)
    tau = (z - 1.0) / (kappa - 1.0 + z)
    return TimeSplitResult(tau=tau, kappa=kappa, method="lambert-w",
                           objective=rate_upper(kappa, tau))


def golden_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section maximum of a unimodal f on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def search_tau(objective, tol: float = 1e-9, kappa: float = float("nan")) -> TimeSplitResult:
    """Golden-section maximization of objective(tau) on (0, 1).

    Non-unimodal objectives yield a local maximum.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    eps = 1e-9
    tau, val = golden_max(objective, eps, 1.0 - eps, tol)
    return TimeSplitResult(tau=tau, kappa=kappa, method="search", objective=val)
