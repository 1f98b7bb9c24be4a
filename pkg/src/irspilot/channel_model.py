"""Rayleigh block-fading channels for a BS / IRS / user-disk layout."""

import math
import zlib
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SystemDims:
    K: int
    M: int
    N: int

    def __post_init__(self):
        for name in ("K", "M", "N"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class GeometryConfig:
    """Path-loss constants and distances (metres, dB, dBm)."""

    d0: float = 1.0
    beta0_db: float = -20.0
    alpha_direct: float = 4.2
    alpha_user_irs: float = 2.1
    alpha_bs_irs: float = 2.2
    d_bs_irs: float = 100.0
    d_center_bs: float = 105.0
    d_center_irs: float = 10.0
    circle_radius: float = 5.0
    power_dbm: float = 23.0

    def __post_init__(self):
        for name in ("d0", "d_bs_irs", "d_center_bs", "d_center_irs"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.circle_radius < 0:
            raise ValueError("circle_radius must be non-negative")
        if not self.d_center_bs < self.d_bs_irs + self.d_center_irs:
            raise ValueError(
                "d_center_bs must be smaller than d_bs_irs + d_center_irs"
            )

    @property
    def power_linear(self):
        return dbm_to_watts(self.power_dbm)


@dataclass
class ChannelRealization:
    """One fading block.

    ``h`` is M x K (direct), ``t`` is N x K (user to IRS), ``r`` is M x N
    (IRS to BS) and ``g`` is K x M x N with ``g[k][:, n] = t[n, k] * r[:, n]``.
    """

    h: np.ndarray
    t: np.ndarray
    r: np.ndarray
    g: np.ndarray = field(default=None)

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=np.complex128)
        self.t = np.asarray(self.t, dtype=np.complex128)
        self.r = np.asarray(self.r, dtype=np.complex128)
        if self.g is None:
            self.g = effective_channels(self.t, self.r)
        M, K = self.h.shape
        N = self.r.shape[1]
        if self.t.shape != (N, K) or self.r.shape[0] != M:
            raise ValueError(
                f"inconsistent shapes h{self.h.shape} t{self.t.shape} r{self.r.shape}"
            )
        if self.g.shape != (K, M, N):
            raise ValueError(f"g has shape {self.g.shape}, expected {(K, M, N)}")

    @property
    def dims(self):
        M, K = self.h.shape
        return SystemDims(K=K, M=M, N=self.r.shape[1])


def dbm_to_watts(power_dbm):
    return 10.0 ** ((power_dbm - 30.0) / 10.0)


def make_rng(seed, trial=0, purpose="channels"):
    """Independent, replayable stream keyed by ``(seed, trial, purpose)``."""
    tag = zlib.crc32(purpose.encode("utf-8"))
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(trial), tag])
    return np.random.default_rng(ss)


def path_loss_linear(distance, alpha, geo=GeometryConfig()):
    """``beta0 * (distance / d0) ** -alpha`` as a linear power gain."""
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ValueError("distance must be positive")
    gain = 10.0 ** (geo.beta0_db / 10.0) * (distance / geo.d0) ** (-alpha)
    return float(gain) if gain.ndim == 0 else gain


def circle_center(geo):
    """Centre of the user disk with the BS at the origin and the IRS on +x."""
    b, c, d = geo.d_bs_irs, geo.d_center_bs, geo.d_center_irs
    x = (c * c - d * d + b * b) / (2.0 * b)
    y2 = c * c - x * x
    if y2 < -1e-9 * c * c:
        raise ValueError(
            f"no point is {c} m from the BS and {d} m from an IRS {b} m away"
        )
    return x, math.sqrt(max(y2, 0.0))


def user_positions(dims, geo, rng):
    """Planar ``(x, y)`` of K users drawn uniformly on the disk."""
    cx, cy = circle_center(geo)
    radius = geo.circle_radius * np.sqrt(rng.uniform(size=dims.K))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=dims.K)
    return cx + radius * np.cos(angle), cy + radius * np.sin(angle)


def place_users(dims, geo, rng):
    """Per-user distances ``(d_bs, d_irs)`` for users uniform on the disk."""
    ux, uy = user_positions(dims, geo, rng)
    return np.hypot(ux, uy), np.hypot(ux - geo.d_bs_irs, uy)


def complex_normal(rng, variance, size):
    """CN(0, variance): independent real and imaginary parts of variance/2."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def effective_channels(t, r):
    """Cascaded channels ``g[k][:, n] = t[n, k] * r[:, n]``."""
    t = np.asarray(t, dtype=np.complex128)
    r = np.asarray(r, dtype=np.complex128)
    if t.ndim != 2 or r.ndim != 2 or t.shape[0] != r.shape[1]:
        raise ValueError(f"t {t.shape} and r {r.shape} disagree on N")
    return t.T[:, None, :] * r[None, :, :]


def sample_channels(dims, geo, rng):
    d_bs, d_irs = place_users(dims, geo, rng)
    beta_bu = path_loss_linear(d_bs, geo.alpha_direct, geo)
    # one user-IRS distance per user, shared by every element
    beta_iu = path_loss_linear(d_irs, geo.alpha_user_irs, geo)
    beta_bi = path_loss_linear(geo.d_bs_irs, geo.alpha_bs_irs, geo)
    h = complex_normal(rng, beta_bu[None, :], (dims.M, dims.K))
    t = complex_normal(rng, beta_iu[None, :], (dims.N, dims.K))
    r = complex_normal(rng, beta_bi, (dims.M, dims.N))
    return ChannelRealization(h=h, t=t, r=r)


def true_lambdas(t, floor=1e-30):
    """Ratios ``t[n, k] / t[n, 0]`` for users 2..K, shaped (K-1) x N."""
    t = np.asarray(t, dtype=np.complex128)
    ref = t[:, 0]
    if np.any(np.abs(ref) < floor):
        raise ValueError("reference user has a vanishing user-IRS channel")
    return (t[:, 1:] / ref[:, None]).T
