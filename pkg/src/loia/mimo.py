"""
Closed-form alignment for the 3-user MIMO interference channel with an even
number ``M`` of antennas per node and ``M/2`` streams per user.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import FilterSet, receive_filters, reverse_roles
from .errors import AlignmentError, DegeneracyError, ParameterError, SingularityError
from .linalg import relative_residual, subspace_distance
from .network import MAX_CONDITION_NUMBER, ChannelSet

__all__ = [
    "MimoPrecoders",
    "MimoResiduals",
    "p_matrix_mimo",
    "p_matrices_mimo",
    "select_eigenvectors",
    "eigen_basis",
    "build_precoders_mimo",
    "verify_alignment_mimo",
    "receive_filters_mimo",
    "reverse_roles",
]

ALIGNMENT_THRESHOLD = 1e-8
INVARIANCE_TOL = 1e-9

# (receiver, inverted tx, multiplied tx) for P_i = H[i, a]^-1 H[i, b].
P_LINKS = ((1, 2, 3), (2, 3, 1), (3, 1, 2))


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MimoPrecoders:
    V1: np.ndarray
    V2: np.ndarray
    V3: np.ndarray
    T: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    selected: tuple

    def __post_init__(self):
        for name in ("V1", "V2", "V3", "T", "eigenvalues", "eigenvectors"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "selected", tuple(int(i) for i in self.selected))

    @property
    def V(self):
        return (self.V1, self.V2, self.V3)

    @property
    def M(self):
        return self.T.shape[0]

    @property
    def d(self):
        return (self.M // 2,) * 3


@dataclass(frozen=True)
class MimoResiduals:
    """``r23`` is a subspace distance; ``r24``/``r25`` are relative matrix mismatches."""

    r23: float
    r24: float
    r25: float

    def max(self):
        return max(self.r23, self.r24, self.r25)


def p_matrix_mimo(inverted, multiplied, link="?"):
    """``inverted^-1 @ multiplied`` by a linear solve."""
    if np.linalg.cond(inverted) > MAX_CONDITION_NUMBER:
        raise SingularityError(f"channel {link} is ill-conditioned")
    return np.linalg.solve(inverted, multiplied)


def _check_mimo(channels):
    if channels.K != 3:
        raise ParameterError(f"MIMO construction needs K=3, got K={channels.K}")
    if channels.M % 2:
        raise ParameterError(f"MIMO construction needs an even antenna count, got M={channels.M}")


def p_matrices_mimo(channels: ChannelSet):
    """``P1 = H12^-1 H13``, ``P2 = H23^-1 H21``, ``P3 = H31^-1 H32``."""
    _check_mimo(channels)
    h = channels.h
    return tuple(p_matrix_mimo(h(k, a), h(k, b), link=f"H[{k}{a}]") for k, a, b in P_LINKS)


def transfer_mimo(p1, p2, p3):
    return p3 @ p1 @ p2


def select_eigenvectors(eigenvalues, count):
    """
    Indices of ``count`` eigenvalues ordered by decreasing magnitude, then
    increasing phase.
    """
    lam = np.asarray(eigenvalues)
    order = np.lexsort((np.angle(lam), -np.abs(lam)))
    return tuple(int(i) for i in order[:count])


def _normalize_eigenvectors(E):
    E = E / np.linalg.norm(E, axis=0, keepdims=True)
    for c in range(E.shape[1]):
        col = E[:, c]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            ref = col[nz[0]]
            E[:, c] = col * (np.conj(ref) / abs(ref))
    return E


def eigen_basis(T, selected=None):
    """
    Eigendecomposition of ``T`` and the ``M/2``-column invariant basis ``V1``.

    Returns ``(eigenvalues, eigenvectors, selected, V1)``. Eigenvectors are
    unit-norm with their first nonzero entry real and positive.
    """
    T = np.asarray(T, dtype=complex)
    M = T.shape[0]
    lam, E = np.linalg.eig(T)
    if not np.all(np.isfinite(E)) or np.linalg.cond(E) > MAX_CONDITION_NUMBER:
        raise DegeneracyError("T is defective or nearly so")
    E = _normalize_eigenvectors(E)
    if selected is None:
        selected = select_eigenvectors(lam, M // 2)
    selected = tuple(int(i) for i in selected)
    if len(selected) != M // 2 or len(set(selected)) != len(selected):
        raise ParameterError(f"need {M // 2} distinct eigenvector indices, got {selected}")
    return lam, E, selected, E[:, list(selected)]


def precoder_tx2(V1, p3):
    """``V2 = P3^-1 V1`` by a linear solve."""
    return p_matrix_mimo(p3, V1, link="P3")


def precoder_tx3(V1, p2):
    return p2 @ V1


def check_construction(T, V1, V2, V3):
    if subspace_distance(T @ V1, V1) > INVARIANCE_TOL:
        raise DegeneracyError("span(V1) is not invariant under T")
    for name, V in (("V2", V2), ("V3", V3)):
        s = np.linalg.svd(V, compute_uv=False)
        if not s[-1] > 1e-12 * s[0]:
            raise DegeneracyError(f"{name} is rank deficient")


def build_precoders_mimo(p1, p2, p3, selected=None) -> MimoPrecoders:
    """
    Precoders from ``T = P3 P1 P2``: ``V1`` spans ``M/2`` eigenvectors of
    ``T``, ``V2 = P3^-1 V1`` and ``V3 = P2 V1``.

    ``selected`` overrides the default eigenvector choice. Columns of ``V2``
    and ``V3`` are left unnormalized.
    """
    p1, p2, p3 = (np.asarray(p, dtype=complex) for p in (p1, p2, p3))
    M = p1.shape[0]
    if M % 2 or not p1.shape == p2.shape == p3.shape == (M, M):
        raise ParameterError("P matrices must be square with an even, common size")
    T = transfer_mimo(p1, p2, p3)
    lam, E, selected, V1 = eigen_basis(T, selected)
    V2 = precoder_tx2(V1, p3)
    V3 = precoder_tx3(V1, p2)
    check_construction(T, V1, V2, V3)
    return MimoPrecoders(V1=V1, V2=V2, V3=V3, T=T, eigenvalues=lam, eigenvectors=E, selected=selected)


def verify_alignment_mimo(channels: ChannelSet, precoders: MimoPrecoders) -> MimoResiduals:
    V1, V2, V3 = precoders.V
    h = channels.h
    return MimoResiduals(
        r23=subspace_distance(h(1, 2) @ V2, h(1, 3) @ V3),
        r24=relative_residual(h(2, 1) @ V1, h(2, 3) @ V3),
        r25=relative_residual(h(3, 1) @ V1, h(3, 2) @ V2),
    )


def receive_filters_mimo(channels: ChannelSet, precoders: MimoPrecoders, threshold=ALIGNMENT_THRESHOLD) -> FilterSet:
    res = verify_alignment_mimo(channels, precoders)
    if not res.max() <= threshold:
        raise AlignmentError(f"alignment residual {res.max():.3g} exceeds {threshold:g}")
    return receive_filters(channels, precoders.V, precoders.d)
