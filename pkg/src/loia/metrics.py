"""Leakage, achievable rates and the orthogonal (time-sharing) baseline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .iia import forward_leakage, interference_covariance
from .linalg import hermitian, normalize_columns, orthonormalize
from .network import ChannelSet, TransmitConfig, reciprocal

__all__ = [
    "MetricRecord",
    "leakage_per_user",
    "reverse_leakage_per_user",
    "rate_per_user",
    "sum_rate",
    "orthogonal_baseline",
]


@dataclass(frozen=True)
class MetricRecord:
    """Outcome of one scheme on one realization at one SNR."""

    scheme: str
    snr_db: float
    per_user_rate: tuple
    per_user_leakage: tuple
    training_rounds: int = 0
    seed: int | None = None
    sum_rate: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sum_rate", float(sum(self.per_user_rate)))

    @property
    def mean_leakage(self):
        return float(np.mean(self.per_user_leakage)) if self.per_user_leakage else 0.0


def leakage_per_user(channels: ChannelSet, V, U, config: TransmitConfig):
    """Interference power left after each receive filter, length-K array."""
    return forward_leakage(channels, V, U, config)


def reverse_leakage_per_user(channels: ChannelSet, V, U, config: TransmitConfig):
    """
    Leakage of the reverse link: the forward filters ``U`` transmit over the
    reciprocal network and the transmitters filter with orthonormal bases of
    their forward precoders ``V``.
    """
    return forward_leakage(reciprocal(channels), U, tuple(orthonormalize(v) for v in V), config)


def _log2det_hpd(A):
    sign, logdet = np.linalg.slogdet(A)
    return logdet / np.log(2.0)


def rate_per_user(channels: ChannelSet, V, U, config: TransmitConfig):
    """
    Achievable rate of every user with residual interference treated as
    Gaussian noise:

        R_k = log2 det(I + (P/d_k) (U^H (Q_k + N0 I) U)^-1 U^H H_kk V_k V_k^H H_kk^H U)

    Precoder columns are scaled to unit norm. For symbol-extended (diagonal)
    channels the rate is divided by ``M`` to give bits per channel use.
    """
    M = channels.M
    rates = np.empty(channels.K)
    for k in range(1, channels.K + 1):
        Uk = U[k - 1]
        Q = interference_covariance(channels, V, k, config)
        noise = hermitian(Uk) @ (Q + config.N0 * np.eye(M)) @ Uk
        G = hermitian(Uk) @ channels.h(k, k) @ normalize_columns(V[k - 1])
        signal = config.stream_power(k) * (G @ hermitian(G))
        r = _log2det_hpd(noise + signal) - _log2det_hpd(noise)
        rates[k - 1] = max(r, 0.0)
    if channels.is_diagonal:
        rates /= M
    return rates


def sum_rate(channels: ChannelSet, V, U, config: TransmitConfig):
    """``(per_user_rate, sum_rate)``."""
    rates = rate_per_user(channels, V, U, config)
    return rates, float(np.sum(rates))


def orthogonal_baseline(channels: ChannelSet, config: TransmitConfig):
    """
    Equal time sharing among the K users with power ``K P`` per active node.

    Each user is active a ``1/K`` fraction of the time and spreads its power
    over ``M`` streams with identity precoding, free of interference.
    Returns ``(per_user_rate, sum_rate)`` in bits per channel use.
    """
    K, M = channels.K, channels.M
    power = K * config.P / M
    rates = np.empty(K)
    for k in range(1, K + 1):
        H = channels.h(k, k)
        A = np.eye(M) + (power / config.N0) * (H @ hermitian(H))
        rates[k - 1] = max(_log2det_hpd(A), 0.0) / K
    if channels.is_diagonal:
        rates /= M
    return rates, float(np.sum(rates))
