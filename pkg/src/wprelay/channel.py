"""Scenario parameters, Rayleigh channel sampling and geometric decomposition.

The downlink beam is a mix of two orthonormal directions derived from the
user channel h1 and the relay channel h2: the component of h2* along h1*
and the perpendicular remainder. All solvers work with the scalars
(a, b, c) of that decomposition instead of the raw N-dimensional vectors.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

__all__ = [
    "DEFAULT_NOISE_DBM",
    "SystemParams",
    "ChannelState",
    "ChannelDecomposition",
    "DegenerateChannelError",
    "dbm_to_watt",
    "sample_channel",
    "sample_channel_block",
    "decompose",
    "build_beamformer",
]

# -174 dBm/Hz noise density over 20 MHz bandwidth
DEFAULT_NOISE_DBM = -174.0 + 10.0 * math.log10(20e6)

_RADICAND_SLOP = 1e-12


class DegenerateChannelError(ValueError):
    """Raised when the user channel vanishes and no beam direction exists."""


def dbm_to_watt(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """All scenario constants. Powers in dBm, distances in meters.

    Conversions to linear scale happen once here; everything downstream
    works in watts and linear SNR.
    """

    n_antennas: int
    d1: float
    d2: float
    d3: float
    alpha: float = 2.5
    eta: float = 0.5
    ps_dbm: float = 40.0
    noise_dbm: float = DEFAULT_NOISE_DBM
    gamma_th_db: float = 0.0
    pc_dbm: float | None = None

    def __post_init__(self) -> None:
        if self.n_antennas < 1:
            raise ValueError("n_antennas must be >= 1")
        for name in ("d1", "d2", "d3"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.alpha < 2:
            raise ValueError("alpha must be >= 2")
        if not (0 < self.eta <= 1):
            raise ValueError("eta must lie in (0, 1]")

    @property
    def rho(self) -> float:
        """Linear transmit SNR Ps/N0."""
        return 10.0 ** ((self.ps_dbm - self.noise_dbm) / 10.0)

    @property
    def ps_watt(self) -> float:
        return dbm_to_watt(self.ps_dbm)

    @property
    def noise_watt(self) -> float:
        return dbm_to_watt(self.noise_dbm)

    @property
    def pc_watt(self) -> float:
        return 0.0 if self.pc_dbm is None else dbm_to_watt(self.pc_dbm)

    @property
    def gamma_th(self) -> float:
        return 10.0 ** (self.gamma_th_db / 10.0)

    def digest(self) -> str:
        """Stable hash of the parameter set."""
        payload = ",".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @classmethod
    def from_config(cls, path: str | Path, **overrides) -> "SystemParams":
        """Load from a flat key-value text file (key = value per line)."""
        values: dict[str, object] = {}
        known = {f.name for f in fields(cls)}
        for raw in Path(path).read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, val = line.partition("=")
            else:
                key, _, val = line.partition(" ")
            key = key.strip()
            val = val.strip()
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            if key == "n_antennas":
                values[key] = int(val)
            elif key == "pc_dbm" and val.lower() in ("", "none"):
                values[key] = None
            else:
                values[key] = float(val)
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class ChannelState:
    """One block-fading realization: h1 user->AP, h2 relay->AP, h3 user->relay."""

    h1: np.ndarray
    h2: np.ndarray
    h3: complex

    def __post_init__(self) -> None:
        if self.h1.shape != self.h2.shape or self.h1.ndim != 1:
            raise ValueError("h1 and h2 must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(self.h1)) and np.all(np.isfinite(self.h2))
                and np.isfinite(self.h3)):
            raise ValueError("channel entries must be finite")


@dataclass(frozen=True)
class ChannelDecomposition:
    """Projection scalars and SNR coefficients of one (channel, tau) pair.

    a, b, c: user-channel norm, parallel and perpendicular relay components.
    cap_a, cap_c, cap_d: tau-free path coefficients.
    a0..d0: tau-dependent coefficients of the end-to-end SNR.
    a1, b1, c1: coefficients of the user-directed (MRT) branch SNR.
    """

    a: float
    b: float
    c: float
    cap_a: float
    cap_c: float
    cap_d: float
    a0: float
    b0: float
    c0: float
    d0: float
    a1: float
    b1: float
    c1: float


def sample_channel(params: SystemParams, rng: Generator) -> ChannelState:
    """Draw one realization with i.i.d. CN(0, 1) entries from rng."""
    n = params.n_antennas
    z = rng.standard_normal(4 * n + 2)
    h1 = (z[0:n] + 1j * z[n:2 * n]) / math.sqrt(2.0)
    h2 = (z[2 * n:3 * n] + 1j * z[3 * n:4 * n]) / math.sqrt(2.0)
    h3 = complex(z[4 * n], z[4 * n + 1]) / math.sqrt(2.0)
    return ChannelState(h1=h1, h2=h2, h3=h3)


def sample_channel_block(params: SystemParams, master_seed: int, start: int, stop: int
                         ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Channels for trials [start, stop) of a counter-based stream.

    Trial t always consumes the same fixed-size block of the Philox
    keystream keyed by master_seed, so any chunking of the trial range
    reproduces identical channels. Normals come from the inverse CDF of
    the raw uniforms (fixed consumption of one word per draw).
    """
    n = params.n_antennas
    draws = 4 * n + 2
    words = -4 * (-draws // 4)  # round up to the 4-word Philox block
    count = stop - start
    if count <= 0:
        raise ValueError("empty trial range")
    bg = Philox(key=master_seed, counter=start * words // 4)
    u = Generator(bg).random(count * words).reshape(count, words)[:, :draws]
    z = ndtri(np.clip(u, 2.0 ** -55, 1.0 - 2.0 ** -53))
    inv = 1.0 / math.sqrt(2.0)
    h1 = (z[:, 0:n] + 1j * z[:, n:2 * n]) * inv
    h2 = (z[:, 2 * n:3 * n] + 1j * z[:, 3 * n:4 * n]) * inv
    h3 = (z[:, 4 * n] + 1j * z[:, 4 * n + 1]) * inv
    return h1, h2, h3


def decompose(params: SystemParams, ch: ChannelState, tau: float) -> ChannelDecomposition:
    """Projection scalars (a, b, c) plus every SNR coefficient set."""
    if not (0.0 < tau < 1.0):
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    n1_sq = float(np.vdot(ch.h1, ch.h1).real)
    if n1_sq == 0.0:
        raise DegenerateChannelError("h1 vanishes; no beam direction exists")
    n1 = math.sqrt(n1_sq)
    n2_sq = float(np.vdot(ch.h2, ch.h2).real)
    inner = complex(np.vdot(ch.h1, ch.h2))  # h1^H h2
    b = abs(inner) / n1
    c_sq = n2_sq - b * b
    if c_sq < 0.0:
        if c_sq < -_RADICAND_SLOP * max(n2_sq, 1.0):
            raise ValueError(f"perpendicular radicand {c_sq} below rounding slop")
        c_sq = 0.0
    c = math.sqrt(c_sq)
    h3_sq = abs(ch.h3) ** 2
    d1a = params.d1 ** params.alpha
    d2a = params.d2 ** params.alpha
    d3a = params.d3 ** params.alpha
    cap_a = n1_sq / d1a ** 2
    cap_c = h3_sq / (d1a * d3a)
    cap_d = n2_sq / d2a ** 2
    scale = 2.0 * params.eta * tau * params.rho / (1.0 - tau)
    a0 = scale * cap_a
    c0 = scale * cap_c
    d0 = scale * cap_d
    a1 = scale / d1a ** 2
    b1 = scale / (d1a * d3a)
    c1 = scale / d2a ** 2
    return ChannelDecomposition(a=n1, b=b, c=c,
                                cap_a=cap_a, cap_c=cap_c, cap_d=cap_d,
                                a0=a0, b0=c0 * d0, c0=c0, d0=d0,
                                a1=a1, b1=b1, c1=c1)


def build_beamformer(ch: ChannelState, x_bar: float) -> np.ndarray:
    """Unit-norm beam mixing the h1-parallel and h1-perpendicular directions.

    x_bar = 1 is the pure user-directed (MRT) direction, x_bar = 0 the
    zero-leakage direction toward the relay. When the perpendicular
    component vanishes only the parallel direction exists and is returned.
    """
    if not (0.0 <= x_bar <= 1.0):
        raise ValueError(f"x_bar must lie in [0, 1], got {x_bar}")
    n1_sq = float(np.vdot(ch.h1, ch.h1).real)
    if n1_sq == 0.0:
        raise DegenerateChannelError("h1 vanishes; no beam direction exists")
    inner = complex(np.vdot(ch.h1, ch.h2))  # h1^H h2
    par = np.conj(ch.h1) * np.conj(inner) / n1_sq  # component of h2* along h1*
    par_norm = abs(inner) / math.sqrt(n1_sq)
    if par_norm < 1e-300:
        u_par = np.conj(ch.h1) / math.sqrt(n1_sq)
    else:
        u_par = par / par_norm
    perp = np.conj(ch.h2) - par
    perp_norm = float(np.linalg.norm(perp))
    n2 = float(np.linalg.norm(ch.h2))
    if perp_norm <= 1e-12 * max(n2, 1.0):
        return u_par
    return x_bar * u_par + math.sqrt(max(0.0, 1.0 - x_bar * x_bar)) * perp / perp_norm
