"""
Iterative interference alignment baseline (alternating leakage minimization).

Each iteration runs a forward sweep, where every receiver picks the
``d`` least-interfered directions of its interference covariance, followed
by a reverse sweep doing the same on the reciprocal network with the
filters acting as transmit precoders.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import hermitian, normalize_columns, orthonormalize
from .network import ChannelSet, TransmitConfig, crandn, reciprocal

__all__ = [
    "LeakageRecord",
    "IiaState",
    "interference_covariance",
    "forward_leakage",
    "initial_state",
    "iia_half_step",
    "iia_run",
]

FORWARD = "forward"
REVERSE = "reverse"


def _projectors(X, config):
    """Stacked ``(P / d_j) X_j X_j^H`` with unit-norm columns, shape (K, M, M)."""
    out = []
    for j, Xj in enumerate(X, start=1):
        Xn = normalize_columns(Xj)
        out.append(config.stream_power(j) * (Xn @ hermitian(Xn)))
    return np.stack(out)


def _covariances(H, X, config):
    """Interference covariances of all receivers, shape (K, M, M)."""
    K = H.shape[0]
    terms = H @ _projectors(X, config)[None] @ hermitian(H)
    terms[np.arange(K), np.arange(K)] = 0.0
    Q = terms.sum(axis=1)
    return 0.5 * (Q + hermitian(Q))


def interference_covariance(channels: ChannelSet, V, k: int, config: TransmitConfig):
    """
    Interference covariance at receiver ``k`` (1-based).

    ``sum_{j != k} (P / d_j) H[k, j] V_j V_j^H H[k, j]^H`` with the columns
    of every ``V_j`` scaled to unit norm.
    """
    M = channels.M
    Q = np.zeros((M, M), dtype=complex)
    for j in range(1, channels.K + 1):
        if j == k:
            continue
        G = channels.h(k, j) @ normalize_columns(V[j - 1])
        Q += config.stream_power(j) * (G @ hermitian(G))
    return 0.5 * (Q + hermitian(Q))


def _leakage(Q, U):
    Pu = np.stack([Uk @ hermitian(Uk) for Uk in U])
    return np.maximum(np.real(np.sum(Q * np.conj(Pu), axis=(1, 2))), 0.0)


def forward_leakage(channels: ChannelSet, V, U, config: TransmitConfig):
    """Per-user leakage ``trace(U_k^H Q_k U_k)`` as a length-K array."""
    return _leakage(_covariances(channels.H, V, config), U)


@dataclass(frozen=True)
class LeakageRecord:
    iteration: float
    per_user: tuple

    @property
    def mean(self):
        return float(np.mean(self.per_user))


@dataclass(frozen=True)
class IiaState:
    """
    Precoders ``V``, filters ``U`` and leakage bookkeeping.

    ``leakage_history`` has one record per completed iteration (plus the
    initial state); ``half_step_history`` has one per half-step, indexed by
    iteration in steps of 0.5.
    """

    V: tuple
    U: tuple
    iteration: int = 0
    leakage_history: tuple = ()
    half_step_history: tuple = ()
    half_steps: int = field(default=0)

    def mean_history(self):
        return np.array([r.mean for r in self.leakage_history])


def _sweep_from(Q, d):
    """Filters from the ``d_k`` smallest eigenvectors of each covariance, plus their leakage."""
    # eigh returns ascending eigenvalues; ties keep LAPACK's index order.
    vals, vecs = np.linalg.eigh(Q)
    filters = tuple(vecs[k, :, :dk] for k, dk in enumerate(d))
    leak = np.array([max(float(np.sum(vals[k, :dk])), 0.0) for k, dk in enumerate(d)])
    return filters, leak


def _sweep(channels, X, config):
    return _sweep_from(_covariances(channels.H, X, config), config.d)[0]


def initial_state(channels: ChannelSet, config: TransmitConfig, seed: int) -> IiaState:
    """Random orthonormal precoders and filters drawn from ``seed``."""
    config.check(channels.M, channels.K)
    rng = np.random.default_rng(seed)
    V = tuple(orthonormalize(crandn(rng, channels.M, dk)) for dk in config.d)
    U = tuple(orthonormalize(crandn(rng, channels.M, dk)) for dk in config.d)
    rec = LeakageRecord(0, tuple(forward_leakage(channels, V, U, config)))
    return IiaState(V=V, U=U, leakage_history=(rec,), half_step_history=(rec,))


def iia_half_step(channels: ChannelSet, state: IiaState, config: TransmitConfig, direction=FORWARD, reverse=None) -> IiaState:
    """
    One sweep in ``direction``.

    Forward updates the receive filters given the precoders; reverse
    updates the precoders on the reciprocal network given the filters.
    ``reverse`` may pass a precomputed ``reciprocal(channels)``.
    """
    if direction == FORWARD:
        U = _sweep(channels, state.V, config)
        V = state.V
    elif direction == REVERSE:
        V = _sweep(reverse if reverse is not None else reciprocal(channels), state.U, config)
        U = state.U
    else:
        raise ValueError(f"unknown direction {direction!r}")
    half_steps = state.half_steps + 1
    rec = LeakageRecord(half_steps / 2, tuple(forward_leakage(channels, V, U, config)))
    return replace(state, V=V, U=U, half_steps=half_steps, half_step_history=state.half_step_history + (rec,))


def iia_run(channels: ChannelSet, config: TransmitConfig, iterations: int, seed: int, init: IiaState | None = None) -> IiaState:
    """
    Run ``iterations`` forward+reverse iterations from a seeded random start
    (or from ``init``).
    """
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    state = init if init is not None else initial_state(channels, config, seed)
    rev = reciprocal(channels)
    history = list(state.leakage_history)
    half = list(state.half_step_history)
    V, U = state.V, state.U
    hs = state.half_steps
    Q = _covariances(channels.H, V, config)
    for it in range(state.iteration + 1, state.iteration + iterations + 1):
        U, leak = _sweep_from(Q, config.d)
        hs += 1
        half.append(LeakageRecord(hs / 2, tuple(leak)))
        V = _sweep(rev, U, config)
        hs += 1
        # Covariances for the new precoders serve both the record and the next sweep.
        Q = _covariances(channels.H, V, config)
        rec = LeakageRecord(hs / 2, tuple(_leakage(Q, U)))
        half.append(rec)
        history.append(LeakageRecord(it, rec.per_user))
    return IiaState(
        V=V,
        U=U,
        iteration=state.iteration + iterations,
        leakage_history=tuple(history),
        half_step_history=tuple(half),
        half_steps=hs,
    )
