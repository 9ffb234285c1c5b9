"""
Closed-form alignment for the 3-user SISO interference channel over a
``2n+1`` symbol extension.

User 1 sends ``n+1`` streams and users 2 and 3 send ``n`` each. All link
matrices are diagonal, so every product here is carried out on vectors of
diagonal entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import FilterSet, receive_filters, reverse_roles
from .errors import AlignmentError, DegeneracyError, ParameterError, SingularityError
from .linalg import containment_residual, normalize_columns, relative_residual
from .network import ChannelSet

__all__ = [
    "SisoPrecoders",
    "SisoResiduals",
    "p_matrix_siso",
    "p_matrices_siso",
    "krylov_basis",
    "build_precoders_siso",
    "verify_alignment_siso",
    "receive_filters_siso",
    "reverse_roles",
    "siso_streams",
]

ALIGNMENT_THRESHOLD = 1e-8
RANK_RTOL = 1e-12

# (receiver, numerator tx, denominator tx) for P_i = H[i, a] / H[i, b].
P_LINKS = ((1, 2, 3), (2, 3, 1), (3, 1, 2))


def siso_streams(n):
    return (n + 1, n, n)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _as_diag(p):
    p = np.asarray(p, dtype=complex)
    if p.ndim == 2:
        return np.diagonal(p).copy()
    return p


@dataclass(frozen=True)
class SisoPrecoders:
    """
    Precoders of the SISO construction and the intermediates they came from.

    Diagonal matrices (``T``) are kept as vectors of diagonal entries; use
    the ``T`` property for the dense form.
    """

    V1: np.ndarray
    V2: np.ndarray
    V3: np.ndarray
    t: np.ndarray
    B: np.ndarray
    C: np.ndarray
    w: np.ndarray
    n: int

    def __post_init__(self):
        for name in ("V1", "V2", "V3", "t", "B", "C", "w"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def T(self):
        return np.diag(self.t)

    @property
    def V(self):
        return (self.V1, self.V2, self.V3)

    @property
    def M(self):
        return 2 * self.n + 1

    @property
    def d(self):
        return siso_streams(self.n)


@dataclass(frozen=True)
class SisoResiduals:
    """
    Alignment residuals of a SISO solution.

    ``r10`` is the relative mismatch between the two interferers at
    receiver 1; ``r11``/``r12`` measure how far the interference from the
    third user leaves the span of user 1's interference at receivers 2
    and 3. ``r31``-``r33`` check the Krylov structure ``B = T C`` and that
    ``B`` and ``C`` are column subsets of ``V1``.
    """

    r10: float
    r11: float
    r12: float
    r31: float = 0.0
    r32: float = 0.0
    r33: float = 0.0

    @property
    def interference(self):
        return max(self.r10, self.r11, self.r12)

    @property
    def construction(self):
        return max(self.r31, self.r32, self.r33)

    def max(self):
        return max(self.interference, self.construction)


def p_matrix_siso(numerator, denominator, link="?"):
    """Element-wise ratio ``diag(numerator) diag(denominator)^-1``."""
    numerator = _as_diag(numerator)
    denominator = _as_diag(denominator)
    if np.any(denominator == 0):
        raise SingularityError(f"channel {link} is singular")
    return numerator / denominator


def _check_siso(channels):
    if channels.K != 3:
        raise ParameterError(f"SISO construction needs K=3, got K={channels.K}")
    if not channels.is_diagonal:
        raise ParameterError("SISO construction needs a diagonal (symbol-extended) channel set")


def p_matrices_siso(channels: ChannelSet):
    """
    Per-receiver ratio matrices of the SISO scheme.

    Returns the diagonals of ``P1 = H12 H13^-1``, ``P2 = H23 H21^-1`` and
    ``P3 = H31 H32^-1`` as length-``M`` vectors.
    """
    _check_siso(channels)
    g = channels.diagonals()
    return tuple(
        p_matrix_siso(g[k - 1, a - 1], g[k - 1, b - 1], link=f"H[{k}{b}]") for k, a, b in P_LINKS
    )


def reference_vector(M):
    """The predefined all-ones vector ``w`` every transmitter knows."""
    return np.ones(M, dtype=complex)


def krylov_basis(t, n, w=None):
    """Columns ``[w, T w, ..., T^n w]``; ``w`` defaults to all ones."""
    t = _as_diag(t)
    cols = [reference_vector(t.shape[0]) if w is None else np.asarray(w, dtype=complex)]
    for _ in range(n):
        cols.append(t * cols[-1])
    return np.stack(cols, axis=1)


def transfer_siso(p1, p2, p3):
    return _as_diag(p1) * _as_diag(p2) * _as_diag(p3)


def precoder_tx1(t, n, w=None):
    return krylov_basis(t, n, w)


def precoder_tx2(t, p3, n, w=None):
    """``(V2, C)`` as computed at transmitter 2."""
    C = krylov_basis(t, n, w)[:, :n]
    return _as_diag(p3)[:, None] * C, C


def precoder_tx3(t, p2, n, w=None):
    """``(V3, B)`` as computed at transmitter 3."""
    B = krylov_basis(t, n, w)[:, 1:]
    return B / _as_diag(p2)[:, None], B


def _full_column_rank(A):
    if A.shape[1] == 0:
        return True
    s = np.linalg.svd(normalize_columns(A), compute_uv=False)
    return s[-1] > RANK_RTOL * s[0]


def _column_subset_residual(P, Q):
    """Largest relative distance from a column of ``P`` to its nearest column of ``Q``."""
    if P.shape[1] == 0:
        return 0.0
    worst = 0.0
    for p in P.T:
        scale = max(np.linalg.norm(p), 1e-300)
        worst = max(worst, min(np.linalg.norm(p - q) for q in Q.T) / scale)
    return float(worst)


def check_construction(t, V1, V2, V3, B, C):
    """Raise :class:`DegeneracyError` unless ``B = T C`` and every precoder has full column rank."""
    if not np.array_equal(B, t[:, None] * C):
        raise DegeneracyError("B != T C")
    for name, V in (("V1", V1), ("V2", V2), ("V3", V3)):
        if not np.all(np.isfinite(V)):
            raise DegeneracyError(f"{name} has non-finite entries")
        if not _full_column_rank(V):
            raise DegeneracyError(f"{name} is rank deficient (T has repeated entries?)")


def build_precoders_siso(p1, p2, p3, n) -> SisoPrecoders:
    """
    Precoders for ``d = (n+1, n, n)`` streams over ``M = 2n+1`` extensions.

    With ``T = P1 P2 P3`` and ``w`` all ones, ``V1 = [w, ..., T^n w]``,
    ``V2 = P3 C`` with ``C = [w, ..., T^(n-1) w]`` and ``V3 = P2^-1 B``
    with ``B = [T w, ..., T^n w]``.

    Raises
    ------
    DegeneracyError
        If any precoder loses column rank, e.g. when ``T`` has too few
        distinct diagonal entries.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be an integer >= 1, got {n}")
    n = int(n)
    p1, p2, p3 = (_as_diag(p) for p in (p1, p2, p3))
    M = 2 * n + 1
    if not p1.shape == p2.shape == p3.shape == (M,):
        raise ParameterError(f"P matrices must be {M}x{M} diagonal for n={n}")
    if np.any(p2 == 0):
        raise SingularityError("P2 is singular")

    t = transfer_siso(p1, p2, p3)
    V1 = precoder_tx1(t, n)
    C = V1[:, :n]
    B = V1[:, 1:]
    V2, _ = precoder_tx2(t, p3, n)
    V3, _ = precoder_tx3(t, p2, n)

    check_construction(t, V1, V2, V3, B, C)
    return SisoPrecoders(V1=V1, V2=V2, V3=V3, t=t, B=B, C=C, w=V1[:, 0], n=n)


def verify_alignment_siso(channels: ChannelSet, precoders: SisoPrecoders) -> SisoResiduals:
    """
    Residuals of the alignment conditions, evaluated with dense products.

    Never raises on misalignment; large residuals report it.
    """
    V1, V2, V3 = precoders.V
    h = channels.h
    r10 = relative_residual(h(1, 2) @ V2, h(1, 3) @ V3)
    r11 = containment_residual(h(2, 1) @ V1, h(2, 3) @ V3)
    r12 = containment_residual(h(3, 1) @ V1, h(3, 2) @ V2)
    r31 = relative_residual(precoders.B, precoders.T @ precoders.C)
    r32 = _column_subset_residual(precoders.B, V1)
    r33 = _column_subset_residual(precoders.C, V1)
    return SisoResiduals(r10, r11, r12, r31, r32, r33)


def receive_filters_siso(channels: ChannelSet, precoders: SisoPrecoders, threshold=ALIGNMENT_THRESHOLD) -> FilterSet:
    """
    Orthonormal receive filters nulling the aligned interference.

    Receiver 1 keeps ``n+1`` dimensions orthogonal to ``H12 V2``; receivers
    2 and 3 keep ``n`` dimensions orthogonal to ``H21 V1`` and ``H31 V1``.
    """
    res = verify_alignment_siso(channels, precoders)
    if not res.interference <= threshold:
        raise AlignmentError(f"alignment residual {res.interference:.3g} exceeds {threshold:g}")
    return receive_filters(channels, precoders.V, precoders.d)
