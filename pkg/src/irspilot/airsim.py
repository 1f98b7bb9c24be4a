"""Received training block at the BS."""

from dataclasses import dataclass

import numpy as np

from .channel_model import complex_normal, dbm_to_watts
from .kernels import received_block


@dataclass
class RxBlock:
    Y: np.ndarray
    power_linear: float
    noise_variance: float = 0.0


def synthesize_rx(schedule, ch, power_dbm, noise_variance=0.0, rng=None):
    """Column ``i`` is ``sum_k (h_k + sum_n phi[n,i] g[k][:,n]) sqrt(p) a[k,i] + z_i``.

    Noise is added only when ``noise_variance > 0`` (then ``rng`` is
    required); the noisy path is not used by any recovery guarantee.
    """
    d = schedule.dims
    if ch.h.shape != (d.M, d.K) or ch.g.shape != (d.K, d.M, d.N):
        raise ValueError(
            f"channels are {ch.dims}, schedule expects {d}"
        )
    if noise_variance < 0:
        raise ValueError("noise_variance must be non-negative")
    p = dbm_to_watts(power_dbm)
    Y = received_block(ch.h, ch.g, schedule.A, schedule.Phi, np.sqrt(p))
    if noise_variance > 0:
        if rng is None:
            raise ValueError("an rng is needed to draw noise")
        Y = Y + complex_normal(rng, noise_variance, Y.shape)
    return RxBlock(Y=Y, power_linear=p, noise_variance=float(noise_variance))
