"""Batch alignment checks used by the ``verify`` command and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .metrics import leakage_per_user, reverse_leakage_per_user
from .mimo import build_precoders_mimo, p_matrices_mimo, receive_filters_mimo, verify_alignment_mimo
from .network import ChannelSet, TransmitConfig, derive_seed, sample_mimo, sample_siso_extended
from .siso import build_precoders_siso, p_matrices_siso, receive_filters_siso, verify_alignment_siso

TOLERANCES = {
    "siso": {"r10": 1e-9, "r11": 1e-9, "r12": 1e-9, "r31": 1e-9, "r32": 1e-9, "r33": 1e-9},
    "mimo": {"r23": 1e-9, "r24": 1e-10, "r25": 1e-10},
}
LEAKAGE_TOL = 1e-9  # relative to P
VERIFY_SNR_DB = 40.0


def check_realization(channels: ChannelSet, snr_db=VERIFY_SNR_DB):
    """
    Residuals, forward leakage and reverse leakage (both divided by ``P``)
    of the closed-form solution on one channel set.
    """
    if channels.is_diagonal:
        n = (channels.M - 1) // 2
        pre = build_precoders_siso(*p_matrices_siso(channels), n)
        res = verify_alignment_siso(channels, pre)
        filt = receive_filters_siso(channels, pre)
    else:
        pre = build_precoders_mimo(*p_matrices_mimo(channels))
        res = verify_alignment_mimo(channels, pre)
        filt = receive_filters_mimo(channels, pre)
    tc = TransmitConfig.from_snr_db(snr_db, pre.d)
    out = {k: v for k, v in vars(res).items()}
    out["leakage"] = float(np.max(leakage_per_user(channels, pre.V, filt.U, tc)) / tc.P)
    out["reverse_leakage"] = float(np.max(reverse_leakage_per_user(channels, pre.V, filt.U, tc)) / tc.P)
    out["orthonormality"] = filt.orthonormality_error()
    return out


def alignment_suite(mode="mimo", n=1, antennas=2, realizations=100, seed=0):
    """
    Worst-case residuals over ``realizations`` seeded draws.

    Returns ``(worst, failures)`` where ``failures`` lists the names of
    checks that exceeded their tolerance.
    """
    worst = {}
    for r in range(realizations):
        s = derive_seed(seed, r, 0)
        ch = sample_siso_extended(3, n, s) if mode == "siso" else sample_mimo(3, antennas, s)
        for key, val in check_realization(ch).items():
            worst[key] = max(worst.get(key, 0.0), val)
    return worst, failures_of(worst, "siso" if mode == "siso" else "mimo")


def failures_of(worst, mode):
    tol = dict(TOLERANCES[mode], leakage=LEAKAGE_TOL, reverse_leakage=LEAKAGE_TOL, orthonormality=1e-12)
    return [k for k, t in tol.items() if not worst.get(k, 0.0) <= t]
